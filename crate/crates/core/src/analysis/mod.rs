//! Correlation, error metrics, baselines and reporting.

mod baselines;
mod correlation;
mod grouped;
mod report;

pub use baselines::{
    mean_baseline, mean_baseline_loo, random_baseline, random_baseline_loo, MeanBaseline,
    RandomBaseline,
};
pub use correlation::{
    correlation_table, feature_correlation_table, CorrelationGroup, FeatureCorrelation,
    FeatureCorrelationTable, GroupRatio, RowSubset, TargetCorrelation, TargetGroupStats,
};
pub use grouped::{
    grouped_pi_mi_analysis, ols, Gender, GroupedAnalysis, OlsFit, UserGroupRegression,
};
pub use report::{group_ratio_text, EvaluationReport, ReportBaselines, TargetKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact permutation p-values are used up to this sample size.
pub const EXACT_P_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

impl Spearman {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }

    fn degenerate(n: usize) -> Self {
        Spearman { rho: 0.0, p: 1.0, n }
    }
}

/// Average ranks, doubled so that ties stay integral (1-based).
pub fn doubled_ranks(xs: &[f64]) -> Vec<i64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0i64; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        // ranks i+1..=j share the average (i+1+j)/2
        let r2 = (i + 1 + j) as i64;
        for &k in &idx[i..j] {
            out[k] = r2;
        }
        i = j;
    }
    out
}

/// Average ranks (1-based) with ties sharing their mean rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    doubled_ranks(xs).into_iter().map(|r| r as f64 / 2.0).collect()
}

fn centred_cov(a: &[i64], b: &[i64], centre: i64) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - centre) * (y - centre)).sum()
}

/// Spearman rank correlation with average-rank ties.
///
/// The p-value is two-sided: an exact permutation test for `n <= 8`, the t
/// approximation otherwise. A constant input gives `rho = 0, p = 1`.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<Spearman> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "spearman inputs differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 3 {
        return Err(Error::input(format!("spearman needs at least 3 pairs, got {n}")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::input("spearman input contains non-finite values"));
    }
    let ra = doubled_ranks(a);
    let rb = doubled_ranks(b);
    // doubled ranks always average to n + 1
    let c = n as i64 + 1;
    let saa = centred_cov(&ra, &ra, c);
    let sbb = centred_cov(&rb, &rb, c);
    if saa == 0 || sbb == 0 {
        return Ok(Spearman::degenerate(n));
    }
    let sab = centred_cov(&ra, &rb, c);
    let rho = (sab as f64 / ((saa as f64) * (sbb as f64)).sqrt()).clamp(-1.0, 1.0);
    let p = if n <= EXACT_P_MAX_N {
        permutation_p(&ra, &rb, c, sab.abs())
    } else if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        crate::stats::t_two_sided(t, df)
    };
    Ok(Spearman { rho, p, n })
}

/// Fraction of orderings of `rb` whose |covariance| with `ra` reaches the
/// observed one (Heap's algorithm over all `n!` orderings).
fn permutation_p(ra: &[i64], rb: &[i64], c: i64, observed: i64) -> f64 {
    let mut perm = rb.to_vec();
    let n = perm.len();
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut count = |p: &[i64]| {
        total += 1;
        if centred_cov(ra, p, c).abs() >= observed {
            hits += 1;
        }
    };
    count(&perm);
    let mut stack = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            count(&perm);
            stack[i] += 1;
            i = 0;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.len() != actual.len() || pred.is_empty() {
        return Err(Error::input(format!(
            "rmse needs equal non-empty inputs ({} vs {})",
            pred.len(),
            actual.len()
        )));
    }
    let ss: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).powi(2)).sum();
    Ok((ss / pred.len() as f64).sqrt())
}

/// RMSE divided by the range of `actual`.
pub fn nrmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    let e = rmse(pred, actual)?;
    nrmse_from(e, actual)
}

pub fn nrmse_from(rmse: f64, actual: &[f64]) -> Result<f64> {
    let (lo, hi) = min_max(actual);
    if hi <= lo {
        return Err(Error::analysis("nrmse undefined: actual scores have zero range"));
    }
    Ok(rmse / (hi - lo))
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}
