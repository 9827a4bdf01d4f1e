use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelKind};
use super::model::{svr_train, HyperParams};
use crate::analysis::rmse;
use crate::error::{Error, Result};

/// Hyperparameter grid. RBF widths are multiples of `1/d` for `d` input
/// features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kernel: KernelKind,
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma_factors: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            kernel: KernelKind::Rbf,
            c: vec![0.1, 1.0, 10.0, 100.0],
            epsilon: vec![0.01, 0.1, 1.0],
            gamma_factors: vec![0.25, 1.0, 4.0],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.epsilon.is_empty() {
            return Err(Error::input("SVR grid needs at least one C and one epsilon"));
        }
        if self.kernel == KernelKind::Rbf && self.gamma_factors.is_empty() {
            return Err(Error::input("RBF grid needs at least one gamma factor"));
        }
        let bad = |v: &f64| !(v.is_finite() && *v > 0.0);
        if self.c.iter().any(bad) || self.gamma_factors.iter().any(bad) {
            return Err(Error::input("SVR grid values must be positive and finite"));
        }
        if self.epsilon.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::input("SVR epsilon values must be non-negative"));
        }
        Ok(())
    }

    /// Grid points for `d` features in preference order: smaller C, then
    /// larger epsilon, then smaller gamma.
    pub fn points(&self, d: usize) -> Vec<HyperParams> {
        let mut c = self.c.clone();
        c.sort_by(f64::total_cmp);
        let mut eps = self.epsilon.clone();
        eps.sort_by(|a, b| b.total_cmp(a));
        let kernels: Vec<Kernel> = match self.kernel {
            KernelKind::Linear => vec![Kernel::Linear],
            KernelKind::Rbf => {
                let mut g: Vec<f64> = self.gamma_factors.iter().map(|f| f / d.max(1) as f64).collect();
                g.sort_by(f64::total_cmp);
                g.into_iter().map(|gamma| Kernel::Rbf { gamma }).collect()
            }
        };
        let mut out = Vec::new();
        for &c in &c {
            for &epsilon in &eps {
                for &kernel in &kernels {
                    out.push(HyperParams { c, epsilon, kernel });
                }
            }
        }
        out
    }
}

/// Fold index of each of `n` samples; folds differ in size by at most one.
pub fn cv_folds(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = pos % folds;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: HyperParams,
    pub best_rmse: Option<f64>,
    /// Mean validation RMSE per grid point, in grid order.
    pub scores: Vec<(HyperParams, f64)>,
    pub folds: Vec<usize>,
}

/// Picks the grid point with the lowest mean validation RMSE over
/// `folds`-fold cross-validation. Exact ties keep the earlier point.
///
/// With fewer than 4 samples no split leaves 2 training rows in every fold,
/// so the first grid point is returned unscored.
pub fn grid_search(x: &DMatrix<f64>, y: &[f64], grid: &[HyperParams], folds: usize, seed: u64) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::input("empty hyperparameter grid"));
    }
    if folds < 2 {
        return Err(Error::input("grid search needs at least 2 folds"));
    }
    let n = y.len();
    if x.nrows() != n {
        return Err(Error::input("grid search rows and targets differ"));
    }
    if n < 4 {
        return Ok(GridSearchResult {
            best: grid[0],
            best_rmse: None,
            scores: Vec::new(),
            folds: Vec::new(),
        });
    }
    let folds = folds.min(n / 2);
    let assign = cv_folds(n, folds, seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assign[i] == f);
            (train, test)
        })
        .collect();
    let mut scores = Vec::with_capacity(grid.len());
    for &p in grid {
        let mut total = 0.0;
        for (train, test) in &splits {
            let xt = x.select_rows(train);
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = svr_train(&xt, &yt, p)?;
            let pred = model.predict_rows(&x.select_rows(test));
            let actual: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            total += rmse(&pred, &actual)?;
        }
        scores.push((p, total / folds as f64));
    }
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.1 < scores[best].1 {
            best = i;
        }
    }
    Ok(GridSearchResult {
        best: scores[best].0,
        best_rmse: Some(scores[best].1),
        scores,
        folds: assign,
    })
}
