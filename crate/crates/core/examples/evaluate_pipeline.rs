//! End to end: synthetic corpus, feature extraction, rater reliability and
//! leave-one-out evaluation against random and mean baselines, with a
//! shuffled-target control.
//!
//! ```text
//! cargo run --release --example evaluate_pipeline -- [work_dir] [n_images]
//! ```

use std::path::PathBuf;

use profileiq::analysis::TargetKind;
use profileiq::cli::{cmd_evaluate, cmd_extract, cmd_icc, cmd_synth};
use profileiq::io::{FeatureSet, RunConfig};
use profileiq::reliability::RatingsTable;

fn main() -> profileiq::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "pipeline_out".into()));
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(40);

    let mut cfg = RunConfig { seed: 1, ..RunConfig::default() };
    cfg.synth.n_images = n;
    cfg.synth.seed = 1;
    let manifest = cmd_synth(&cfg, &dir.join("corpus"))?;

    let ratings = RatingsTable::load(&dir.join("corpus/ratings.csv"))?;
    let icc = cmd_icc(&ratings, Some(&manifest), cfg.seed, &dir.join("icc"))?;
    print!("{}", icc.report.to_text());
    let manifest = icc.manifest.expect("manifest was supplied");

    let extracted = cmd_extract(&manifest, &cfg, &dir.join("features"))?;
    println!("\nextracted {} images, {} failures", extracted.features.image_ids.len(), extracted.failures.len());
    let features = FeatureSet::load(&dir.join("features"))?;

    for target in [TargetKind::Mi, TargetKind::Pi] {
        let c = RunConfig { target, ..cfg.clone() };
        let o = cmd_evaluate(&features, &manifest, &c, &dir.join("eval"))?;
        println!();
        print!("{}", o.report.to_text());
    }

    let control = RunConfig { shuffle_target: true, ..cfg.clone() };
    let o = cmd_evaluate(&features, &manifest, &control, &dir.join("shuffled"))?;
    println!("\nshuffled MI control: rho {:.3}", o.report.spearman.rho);
    Ok(())
}
