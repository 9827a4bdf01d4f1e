//! Render a seeded synthetic corpus with planted MI scores and ratings.
//!
//! ```text
//! cargo run --release --example synth_corpus -- [out_dir] [n_images]
//! ```

use std::path::PathBuf;

use profileiq::cli::cmd_synth;
use profileiq::io::RunConfig;

fn main() -> profileiq::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synth_out".into()));
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);

    let mut cfg = RunConfig::default();
    cfg.synth.n_images = n;
    cfg.synth.seed = 42;
    let manifest = cmd_synth(&cfg, &out)?;

    println!("{} images in {}", manifest.rows.len(), out.display());
    for row in manifest.rows.iter().take(5) {
        println!(
            "  {:<8} {:?} age {:>4.1} MI {:>6.1}",
            row.image_id,
            row.gender,
            row.age.unwrap_or_default(),
            row.mi_score.unwrap_or_default()
        );
    }
    println!("files: manifest.csv, ratings.csv, truth.csv, images/, annotations/");
    Ok(())
}
