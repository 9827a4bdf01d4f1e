use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Principal axes of a centred data matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// One orthonormal row per component, `n_components x M`, row-major.
    pub components: Vec<Vec<f64>>,
    /// Sample variance along each component, non-increasing.
    pub variances: Vec<f64>,
    /// Components asked for; more than `components.len()` when the data
    /// were rank deficient.
    pub requested: usize,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.components.len() < self.requested
    }

    fn component_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.components.len(), self.mean.len(), |i, j| self.components[i][j])
    }
}

/// Fits `n_components` principal axes to the rows of `x` via the SVD of
/// the centred matrix.
///
/// Directions with negligible singular values are dropped, so the model
/// may hold fewer components than requested. Each axis is signed so that
/// its largest-magnitude loading is positive.
pub fn pca_fit(x: &DMatrix<f64>, n_components: usize) -> Result<PcaModel> {
    let (n, m) = x.shape();
    if n < 2 {
        return Err(Error::analysis(format!("PCA needs at least 2 rows, got {n}")));
    }
    let max = (n - 1).min(m);
    if n_components > max {
        return Err(Error::analysis(format!(
            "{n_components} components requested but at most {max} exist for {n}x{m} data"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("PCA input contains non-finite values"));
    }
    let mean: DVector<f64> = x.row_mean().transpose();
    let mut centred = x.clone();
    for mut row in centred.row_iter_mut() {
        row -= mean.transpose();
    }
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let tol = s_max * (n.max(m) as f64) * f64::EPSILON;

    let mut components = Vec::with_capacity(n_components);
    let mut variances = Vec::with_capacity(n_components);
    for &k in order.iter().take(n_components) {
        if s[k] <= tol || s[k] == 0.0 {
            break;
        }
        let mut row: Vec<f64> = v_t.row(k).iter().copied().collect();
        let pivot = row
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(row);
        variances.push(s[k] * s[k] / (n - 1) as f64);
    }
    Ok(PcaModel {
        mean: mean.iter().copied().collect(),
        components,
        variances,
        requested: n_components,
    })
}

/// Projects the centred rows of `x` onto the model's components.
pub fn pca_transform(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.n_features() {
        return Err(Error::input(format!(
            "PCA expects {} features, got {}",
            model.n_features(),
            x.ncols()
        )));
    }
    let mut centred = x.clone();
    let mean = DVector::from_column_slice(&model.mean);
    for mut row in centred.row_iter_mut() {
        row -= mean.transpose();
    }
    Ok(centred * model.component_matrix().transpose())
}

/// Maps component scores back to feature space.
pub fn pca_inverse_transform(model: &PcaModel, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if z.ncols() != model.n_components() {
        return Err(Error::input("score matrix does not match the component count"));
    }
    let mut x = z * model.component_matrix();
    let mean = DVector::from_column_slice(&model.mean);
    for mut row in x.row_iter_mut() {
        row += mean.transpose();
    }
    Ok(x)
}
