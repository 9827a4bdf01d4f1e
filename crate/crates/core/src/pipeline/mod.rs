//! PCA projection, F-test feature ranking and the MI/PI selection schemes.

mod category;
mod ftest;
mod pca;

pub use category::{mi_category, MiCategory};
pub use ftest::{f_test_anova, f_test_regression, rank_by_significance, FTest};
pub use pca::{pca_fit, pca_inverse_transform, pca_transform, PcaModel};

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::TargetKind;
use crate::error::{Error, Result};

pub const SELECTION_FORMAT_VERSION: u32 = 1;

/// Chosen columns of a PCA score matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Ascending column indices.
    pub selected: Vec<usize>,
    pub k: usize,
    /// True when the MI intersection was empty and the score-based set was
    /// used instead.
    pub fallback: bool,
}

fn column_tests(x: &DMatrix<f64>, test: impl Fn(&[f64]) -> Result<FTest>) -> Result<Vec<FTest>> {
    (0..x.ncols()).map(|j| test(x.column(j).as_slice())).collect()
}

fn top_k(tests: &[FTest], k: usize) -> Vec<usize> {
    let mut idx = rank_by_significance(tests);
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

fn check_k(x: &DMatrix<f64>, n_targets: usize, k: usize) -> Result<()> {
    if n_targets != x.nrows() {
        return Err(Error::input(format!("{} targets for {} rows", n_targets, x.nrows())));
    }
    if k > x.ncols() {
        return Err(Error::input(format!("K = {k} exceeds the {} available columns", x.ncols())));
    }
    Ok(())
}

/// `K = 0` selects nothing and `K = columns` selects everything, with no
/// tests needed.
fn trivial_selection(x: &DMatrix<f64>, k: usize) -> Option<Selection> {
    (k == 0 || k == x.ncols()).then(|| Selection {
        selected: (0..k).collect(),
        k,
        fallback: false,
    })
}

/// The `k` columns with the most significant regression F-test against
/// `scores`.
pub fn select_features_pi(x: &DMatrix<f64>, scores: &[f64], k: usize) -> Result<Selection> {
    check_k(x, scores.len(), k)?;
    if let Some(all) = trivial_selection(x, k) {
        return Ok(all);
    }
    let tests = column_tests(x, |c| f_test_regression(c, scores))?;
    Ok(Selection { selected: top_k(&tests, k), k, fallback: false })
}

/// Intersection of the top `k` columns by regression F-test on `scores`
/// and the top `k` by ANOVA F-test on `labels`; the score-based set when
/// the intersection is empty.
pub fn select_features_mi(x: &DMatrix<f64>, scores: &[f64], labels: &[MiCategory], k: usize) -> Result<Selection> {
    check_k(x, scores.len(), k)?;
    if labels.len() != scores.len() {
        return Err(Error::input("MI labels and scores differ in length"));
    }
    if let Some(all) = trivial_selection(x, k) {
        return Ok(all);
    }
    let by_score = top_k(&column_tests(x, |c| f_test_regression(c, scores))?, k);
    let by_label = top_k(&column_tests(x, |c| f_test_anova(c, labels))?, k);
    let both: Vec<usize> = by_score.iter().copied().filter(|i| by_label.contains(i)).collect();
    Ok(if both.is_empty() {
        Selection { selected: by_score, k, fallback: true }
    } else {
        Selection { selected: both, k, fallback: false }
    })
}

/// PCA projection plus selected columns, fitted on one training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionModel {
    pub version: u32,
    pub target: TargetKind,
    pub pca: PcaModel,
    #[serde(flatten)]
    pub selection: Selection,
}

impl SelectionModel {
    /// PCA to `min(n - 1, M)` components, then MI or PI selection of `k`
    /// columns (clamped to the components available).
    pub fn fit(x: &DMatrix<f64>, target: &[f64], kind: TargetKind, k: usize) -> Result<Self> {
        let n_comp = (x.nrows().saturating_sub(1)).min(x.ncols());
        let pca = pca_fit(x, n_comp)?;
        let z = pca_transform(&pca, x)?;
        let k = k.min(z.ncols());
        let selection = match kind {
            TargetKind::Pi => select_features_pi(&z, target, k)?,
            TargetKind::Mi => {
                let labels: Vec<MiCategory> = target.iter().map(|&s| mi_category(s)).collect();
                select_features_mi(&z, target, &labels, k)?
            }
        };
        Ok(SelectionModel {
            version: SELECTION_FORMAT_VERSION,
            target: kind,
            pca,
            selection,
        })
    }

    /// Projects rows of raw features and keeps the selected columns.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let z = pca_transform(&self.pca, x)?;
        Ok(z.select_columns(&self.selection.selected))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SelectionModel = serde_json::from_str(text)?;
        if model.version != SELECTION_FORMAT_VERSION {
            return Err(Error::input(format!("unsupported selection model version {}", model.version)));
        }
        let n = model.pca.n_components();
        if model.selection.selected.iter().any(|&i| i >= n) {
            return Err(Error::input("selection model refers to a missing component"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
