//! Inter-rater reliability and perceived-intelligence scores from ratings.
//!
//! ```text
//! cargo run --release --example rater_reliability -- [ratings.csv]
//! ```
//!
//! Without a file, 20 images are rated by 24 raters with individual
//! leniency, and the noise level is varied to show its effect on ICC.

use std::path::Path;

use profileiq::reliability::{
    aggregate_pi, icc_one_way, rating_summary, znormalize_raters, Rating, RatingsTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn simulated(noise: f64, seed: u64) -> profileiq::Result<RatingsTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quality: Vec<f64> = (0..20).map(|_| rng.sample(StandardNormal)).collect();
    let leniency: Vec<f64> = (0..24).map(|_| 0.8 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut records = Vec::new();
    for (i, q) in quality.iter().enumerate() {
        for (j, l) in leniency.iter().enumerate() {
            let s = 4.0 + 1.2 * q + l + noise * rng.sample::<f64, _>(StandardNormal);
            records.push(Rating {
                rater_id: format!("rater{j:02}"),
                image_id: format!("img{i:02}"),
                raw_score: s.round().clamp(1.0, 7.0) as u8,
            });
        }
    }
    RatingsTable::new(records)
}

fn main() -> profileiq::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(p) => RatingsTable::load(Path::new(&p))?,
        None => {
            for noise in [0.5, 1.0, 2.0, 4.0] {
                let r = icc_one_way(&znormalize_raters(&simulated(noise, 1)?))?;
                println!("noise sd {noise:>3}: ICC {:.3} ({})", r.icc, r.band.as_str());
            }
            println!();
            simulated(1.0, 1)?
        }
    };

    let z = znormalize_raters(&table);
    let r = icc_one_way(&z)?;
    println!(
        "{} images, {} ratings, k = {:.1}: MSB {:.3}, MSW {:.3}, ICC {:.3} ({})",
        r.n_images, r.n_ratings, r.k_eff, r.msb, r.msw, r.icc, r.band.as_str()
    );
    println!("\nimage    PI      q1      q3      extremes");
    let pi = aggregate_pi(&z);
    for ((id, score), s) in pi.iter().zip(rating_summary(&z)).take(8) {
        let b = s.stats;
        println!("{id:<8} {score:>6.3}  {:>6.3}  {:>6.3}  {}", b.q1, b.q3, b.extremes.len());
    }
    Ok(())
}
