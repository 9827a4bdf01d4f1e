use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{nrmse_from, rmse, spearman};
use crate::error::{Error, Result};
use crate::stats::{mean, sample_variance};

/// Gaussian draws matching the training mean and variance, averaged over
/// several runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub seed: u64,
    pub runs: usize,
    pub mean_rho: f64,
    pub mean_rmse: f64,
    pub nrmse: Option<f64>,
    pub run_rhos: Vec<f64>,
    pub run_rmses: Vec<f64>,
}

/// Constant prediction equal to the training mean. Its correlation is not
/// defined and is reported as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBaseline {
    pub rmse: f64,
    pub nrmse: Option<f64>,
    pub rho: Option<f64>,
}

fn normal(mu: f64, var: f64) -> Normal<f64> {
    Normal::new(mu, var.sqrt()).expect("finite mean and non-negative std")
}

fn check_scores(xs: &[f64], min: usize, what: &str) -> Result<()> {
    if xs.len() < min {
        return Err(Error::input(format!("{what} needs at least {min} scores, got {}", xs.len())));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(format!("{what} scores contain non-finite values")));
    }
    Ok(())
}

fn summarize(seed: u64, runs: usize, rhos: Vec<f64>, rmses: Vec<f64>, actual: &[f64]) -> RandomBaseline {
    let mean_rmse = mean(&rmses);
    RandomBaseline {
        seed,
        runs,
        mean_rho: mean(&rhos),
        mean_rmse,
        nrmse: nrmse_from(mean_rmse, actual).ok(),
        run_rhos: rhos,
        run_rmses: rmses,
    }
}

/// Draws `actual.len()` predictions per run from a Gaussian fitted to
/// `train_scores` and scores them against `actual`.
pub fn random_baseline(train_scores: &[f64], actual: &[f64], runs: usize, seed: u64) -> Result<RandomBaseline> {
    check_scores(train_scores, 2, "random baseline")?;
    check_scores(actual, 3, "random baseline test set")?;
    if runs == 0 {
        return Err(Error::input("random baseline needs at least one run"));
    }
    let dist = normal(mean(train_scores), sample_variance(train_scores));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rhos = Vec::with_capacity(runs);
    let mut rmses = Vec::with_capacity(runs);
    for _ in 0..runs {
        let pred: Vec<f64> = (0..actual.len()).map(|_| dist.sample(&mut rng)).collect();
        rhos.push(spearman(&pred, actual)?.rho);
        rmses.push(rmse(&pred, actual)?);
    }
    Ok(summarize(seed, runs, rhos, rmses, actual))
}

/// Leave-one-out form: each score is predicted by a draw from the Gaussian
/// fitted to all the other scores.
pub fn random_baseline_loo(actual: &[f64], runs: usize, seed: u64) -> Result<RandomBaseline> {
    check_scores(actual, 3, "random baseline")?;
    if runs == 0 {
        return Err(Error::input("random baseline needs at least one run"));
    }
    let dists: Vec<Normal<f64>> = (0..actual.len())
        .map(|i| {
            let rest: Vec<f64> = leave_out(actual, i);
            normal(mean(&rest), sample_variance(&rest))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rhos = Vec::with_capacity(runs);
    let mut rmses = Vec::with_capacity(runs);
    for _ in 0..runs {
        let pred: Vec<f64> = dists.iter().map(|d| d.sample(&mut rng)).collect();
        rhos.push(spearman(&pred, actual)?.rho);
        rmses.push(rmse(&pred, actual)?);
    }
    Ok(summarize(seed, runs, rhos, rmses, actual))
}

fn leave_out(xs: &[f64], i: usize) -> Vec<f64> {
    xs.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .collect()
}

pub fn mean_baseline(train_scores: &[f64], actual: &[f64]) -> Result<MeanBaseline> {
    check_scores(train_scores, 1, "mean baseline")?;
    check_scores(actual, 1, "mean baseline test set")?;
    let m = mean(train_scores);
    let pred = vec![m; actual.len()];
    let e = rmse(&pred, actual)?;
    Ok(MeanBaseline {
        rmse: e,
        nrmse: nrmse_from(e, actual).ok(),
        rho: None,
    })
}

/// Leave-one-out form: each score is predicted by the mean of the others.
pub fn mean_baseline_loo(actual: &[f64]) -> Result<MeanBaseline> {
    check_scores(actual, 2, "mean baseline")?;
    let pred: Vec<f64> = (0..actual.len()).map(|i| mean(&leave_out(actual, i))).collect();
    let e = rmse(&pred, actual)?;
    Ok(MeanBaseline {
        rmse: e,
        nrmse: nrmse_from(e, actual).ok(),
        rho: None,
    })
}
