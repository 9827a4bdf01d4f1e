use std::cmp::Ordering;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{svr_train, HyperParams, SvrModel};
use super::search::{grid_search, GridSpec};
use super::smo::SolveStatus;
use crate::analysis::TargetKind;
use crate::error::{Error, Result};
use crate::pipeline::SelectionModel;

/// How many PCA columns to keep for `n` training samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `floor(n / 2)`.
    HalfTraining,
    Fixed(usize),
}

impl KRule {
    pub fn k(self, n_train: usize) -> usize {
        match self {
            KRule::HalfTraining => n_train / 2,
            KRule::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub target: TargetKind,
    pub k_rule: KRule,
    pub grid: GridSpec,
    pub inner_folds: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            target: TargetKind::Mi,
            k_rule: KRule::HalfTraining,
            grid: GridSpec::default(),
            inner_folds: 5,
            seed: 0,
        }
    }
}

/// Selection and regression fitted on one training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub selection: SelectionModel,
    pub svr: SvrModel,
    pub validation_rmse: Option<f64>,
}

impl TrainedPipeline {
    /// PCA, F-test selection, inner grid search and a final SVR fit.
    ///
    /// Rows are put in a canonical order first, so the result depends only
    /// on the set of training samples.
    pub fn fit(x: &DMatrix<f64>, y: &[f64], cfg: &EvalConfig) -> Result<Self> {
        cfg.grid.validate()?;
        let order = canonical_order(x, y);
        let x = x.select_rows(&order);
        let y: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let selection = SelectionModel::fit(&x, &y, cfg.target, cfg.k_rule.k(y.len()))?;
        let z = selection.transform(&x)?;
        let grid = cfg.grid.points(z.ncols());
        let search = grid_search(&z, &y, &grid, cfg.inner_folds, cfg.seed)?;
        let svr = svr_train(&z, &y, search.best)?;
        Ok(TrainedPipeline {
            selection,
            svr,
            validation_rmse: search.best_rmse,
        })
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        Ok(self.svr.predict_rows(&self.selection.transform(x)?))
    }
}

fn canonical_order(x: &DMatrix<f64>, y: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| {
        y[a].total_cmp(&y[b]).then_with(|| {
            x.row(a)
                .iter()
                .zip(x.row(b).iter())
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub held_out: usize,
    pub prediction: Option<f64>,
    pub params: Option<HyperParams>,
    pub n_selected: usize,
    pub selection_fallback: bool,
    pub status: Option<SolveStatus>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvResult {
    /// One slot per input row; `None` where that fold failed.
    pub predictions: Vec<Option<f64>>,
    pub folds: Vec<FoldOutcome>,
}

impl LoocvResult {
    pub fn failed(&self) -> Vec<&FoldOutcome> {
        self.folds.iter().filter(|f| f.error.is_some()).collect()
    }
}

/// Leave-one-out evaluation: every fold refits PCA, selection, the grid
/// search and the SVR on the other `n - 1` rows only.
pub fn loocv(x: &DMatrix<f64>, y: &[f64], cfg: &EvalConfig) -> Result<LoocvResult> {
    let n = y.len();
    if n < 3 {
        return Err(Error::input(format!("leave-one-out needs at least 3 samples, got {n}")));
    }
    if x.nrows() != n {
        return Err(Error::input(format!("{} feature rows for {n} targets", x.nrows())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::input("leave-one-out inputs contain non-finite values"));
    }
    cfg.grid.validate()?;
    let folds: Vec<FoldOutcome> = (0..n)
        .into_par_iter()
        .map(|held_out| {
            let train: Vec<usize> = (0..n).filter(|&i| i != held_out).collect();
            let xt = x.select_rows(&train);
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let fitted = TrainedPipeline::fit(&xt, &yt, cfg)
                .and_then(|p| p.predict(&x.select_rows(&[held_out])).map(|v| (p, v[0])));
            match fitted {
                Ok((p, v)) => FoldOutcome {
                    held_out,
                    prediction: Some(v),
                    params: Some(p.svr.params),
                    n_selected: p.selection.selection.selected.len(),
                    selection_fallback: p.selection.selection.fallback,
                    status: Some(p.svr.status),
                    error: None,
                },
                Err(e) => FoldOutcome {
                    held_out,
                    prediction: None,
                    params: None,
                    n_selected: 0,
                    selection_fallback: false,
                    status: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(LoocvResult {
        predictions: folds.iter().map(|f| f.prediction).collect(),
        folds,
    })
}
