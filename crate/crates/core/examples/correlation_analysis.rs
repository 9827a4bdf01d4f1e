//! Per-feature correlation table and grouped MI/PI regression.
//!
//! Features come from a synthetic corpus; the table reports, per feature
//! group, how many features correlate significantly with MI and PI.
//!
//! ```text
//! cargo run --release --example correlation_analysis -- [n_images]
//! ```

use nalgebra::DMatrix;
use profileiq::analysis::{feature_correlation_table, group_ratio_text, grouped_pi_mi_analysis};
use profileiq::imagefeat::{extract_all, FEATURE_DIM};
use profileiq::reliability::{aggregate_pi, znormalize_raters, RatingsTable};
use profileiq::synth::{generate, SynthConfig};

fn main() -> profileiq::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let corpus = generate(&SynthConfig { n_images: n, seed: 8, ..SynthConfig::default() })?;

    let rows: Vec<Vec<f64>> = corpus
        .images
        .iter()
        .map(|s| extract_all(&s.image, &s.annotation).map(|v| v.into_values()))
        .collect::<profileiq::Result<_>>()?;
    let x = DMatrix::from_fn(n, FEATURE_DIM, |i, j| rows[i][j]);
    let mi: Vec<f64> = corpus.images.iter().map(|s| s.mi_score).collect();

    let table = znormalize_raters(&RatingsTable::new(corpus.ratings.clone())?);
    let pi_by_id = aggregate_pi(&table);
    let pi: Vec<f64> = corpus
        .images
        .iter()
        .map(|s| pi_by_id.iter().find(|(id, _)| *id == s.id).map(|p| p.1).unwrap_or(f64::NAN))
        .collect();

    let t = feature_correlation_table(&x, Some(&mi), Some(&pi))?;
    print!("{}", group_ratio_text(&t.groups));

    let gender: Vec<_> = corpus.images.iter().map(|s| s.gender).collect();
    let age: Vec<f64> = corpus.images.iter().map(|s| s.age).collect();
    let grouped = grouped_pi_mi_analysis(&mi, &pi, &gender, &age, &[])?;
    println!("\nMI ~ PI + age by user group");
    for r in &grouped.regressions {
        if let Some(c) = r.fit.coefficient("pi") {
            println!(
                "  {:<13} n {:>3}  R^2 {:.3}  PI slope {:.2} (p {:.1e})",
                r.user_group, r.n, r.fit.r_squared, c.estimate, c.p
            );
        }
    }
    for row in &grouped.correlations {
        println!("  rho(PI, MI) for {}: {:.3}", row.rater_group, row.together.rho);
    }
    Ok(())
}
