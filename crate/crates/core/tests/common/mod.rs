#![allow(dead_code)]

pub mod features;
pub mod qp;

use nalgebra::DMatrix;
use profileiq::reliability::Rating;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn noise_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| normal(rng))
}

/// Scores `mu + r_i + e_ij` for `images` groups of `k` ratings.
pub fn random_effects_groups(rng: &mut ChaCha8Rng, images: usize, k: usize, sr: f64, se: f64) -> Vec<Vec<f64>> {
    (0..images)
        .map(|_| {
            let r = sr * normal(rng);
            (0..k).map(|_| 3.0 + r + se * normal(rng)).collect()
        })
        .collect()
}

/// Balanced table: every rater scores every image on the 1..=7 scale.
pub fn balanced_ratings(rng: &mut ChaCha8Rng, images: usize, raters: usize) -> Vec<Rating> {
    let quality: Vec<f64> = (0..images).map(|_| normal(rng)).collect();
    let bias: Vec<f64> = (0..raters).map(|_| 0.7 * normal(rng)).collect();
    let mut out = Vec::new();
    for (i, q) in quality.iter().enumerate() {
        for (j, b) in bias.iter().enumerate() {
            let s = 4.0 + 1.2 * q + b + 0.9 * normal(rng);
            out.push(Rating {
                rater_id: format!("r{j:02}"),
                image_id: format!("i{i:02}"),
                raw_score: s.round().clamp(1.0, 7.0) as u8,
            });
        }
    }
    out
}

/// Textbook ICC(1,k) for a balanced design, built from explicit group
/// means: `(MSB - MSW) / MSB`.
pub fn balanced_icc_oracle(groups: &[Vec<f64>]) -> f64 {
    let i = groups.len() as f64;
    let k = groups[0].len() as f64;
    assert!(groups.iter().all(|g| g.len() as f64 == k));
    let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / k).collect();
    let grand = means.iter().sum::<f64>() / i;
    let mut msb = 0.0;
    for m in &means {
        msb += k * (m - grand) * (m - grand);
    }
    msb /= i - 1.0;
    let mut msw = 0.0;
    for (g, m) in groups.iter().zip(&means) {
        for x in g {
            msw += (x - m) * (x - m);
        }
    }
    msw /= i * (k - 1.0);
    (msb - msw) / msb
}

/// Per-rater z-scores computed with plain loops, keyed like the records.
pub fn zscores_oracle(records: &[Rating]) -> Vec<f64> {
    let mut out = vec![0.0; records.len()];
    for (i, r) in records.iter().enumerate() {
        let mine: Vec<f64> = records
            .iter()
            .filter(|o| o.rater_id == r.rater_id)
            .map(|o| o.raw_score as f64)
            .collect();
        let n = mine.len() as f64;
        let mean = mine.iter().sum::<f64>() / n;
        let var = mine.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        out[i] = if n < 2.0 || var == 0.0 { 0.0 } else { (r.raw_score as f64 - mean) / var.sqrt() };
    }
    out
}

/// Type-7 quantile by insertion sort and explicit interpolation.
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = Vec::new();
    for &x in values {
        let pos = v.iter().position(|&y| y > x).unwrap_or(v.len());
        v.insert(pos, x);
    }
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor();
    let frac = h - lo;
    let lo = lo as usize;
    if lo + 1 >= v.len() {
        v[lo]
    } else {
        v[lo] * (1.0 - frac) + v[lo + 1] * frac
    }
}

/// Spearman rho of two permutations of `0..n` from the squared rank
/// differences, as a single division of exact integers.
pub fn spearman_permutation_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as i64;
    let d2: i64 = a.iter().zip(b).map(|(&x, &y)| (x as i64 - y as i64).pow(2)).sum();
    let denom = n * (n * n - 1);
    (denom - 6 * d2) as f64 / denom as f64
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `n` rows of 102 columns: columns 0 and 1 carry an MI-scale target,
/// the other 100 are noise.
pub fn planted_columns(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, Vec<f64>) {
    let x = noise_matrix(rng, n, 102);
    let scores = (0..n)
        .map(|i| 110.0 + 12.0 * x[(i, 0)] + 12.0 * x[(i, 1)] + 6.0 * normal(rng))
        .collect();
    (x, scores)
}

/// Pearson correlation with explicit sums.
pub fn pearson_oracle(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
