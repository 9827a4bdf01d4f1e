use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::smo::{solve_dual, SolveStatus, SolverOptions};
use crate::error::{Error, Result};

pub const SVR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: Kernel,
}

/// Column means and scales used to standardize inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Sample standard deviation; 1 for constant columns.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let var = if x.nrows() > 1 {
                col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            mean.push(m);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Trained epsilon-SVR: `f(x) = sum_i coef_i K(sv_i, z(x)) + bias`, where
/// `z` standardizes `x` with the training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub version: u32,
    pub params: HyperParams,
    pub standardizer: Standardizer,
    /// Standardized support vectors.
    pub support_vectors: Vec<Vec<f64>>,
    /// Dual weights `alpha - alpha*`, each in `[-C, C]`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub status: SolveStatus,
}

fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Trains an epsilon-SVR on the rows of `x`.
pub fn svr_train(x: &DMatrix<f64>, y: &[f64], params: HyperParams) -> Result<SvrModel> {
    svr_train_with(x, y, params, SolverOptions::default())
}

pub fn svr_train_with(x: &DMatrix<f64>, y: &[f64], params: HyperParams, opts: SolverOptions) -> Result<SvrModel> {
    let l = y.len();
    if x.nrows() != l {
        return Err(Error::input(format!("{} rows but {l} targets", x.nrows())));
    }
    if l < 2 {
        return Err(Error::input(format!("SVR needs at least 2 samples, got {l}")));
    }
    if !(params.c > 0.0 && params.c.is_finite()) || !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
        return Err(Error::input(format!("invalid SVR parameters C = {}, epsilon = {}", params.c, params.epsilon)));
    }
    if let Kernel::Rbf { gamma } = params.kernel {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::input(format!("invalid RBF gamma {gamma}")));
        }
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::input("SVR inputs contain non-finite values"));
    }
    let standardizer = Standardizer::fit(x);
    if y.iter().all(|&v| v == y[0]) {
        return Ok(SvrModel {
            version: SVR_FORMAT_VERSION,
            params,
            standardizer,
            support_vectors: Vec::new(),
            coefficients: Vec::new(),
            bias: y[0],
            iterations: 0,
            kkt_gap: 0.0,
            status: SolveStatus::Converged,
        });
    }
    let z: Vec<Vec<f64>> = rows(x).iter().map(|r| standardizer.apply(r)).collect();
    let k = params.kernel.matrix(&z);
    let sol = solve_dual(&k, y, params.c, params.epsilon, opts);
    let (support_vectors, coefficients) = z
        .into_iter()
        .zip(sol.coef)
        .filter(|(_, c)| *c != 0.0)
        .unzip();
    Ok(SvrModel {
        version: SVR_FORMAT_VERSION,
        params,
        standardizer,
        support_vectors,
        coefficients,
        bias: sol.bias,
        iterations: sol.iterations,
        kkt_gap: sol.kkt_gap,
        status: sol.status,
    })
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.apply(x);
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.params.kernel.eval(sv, &z))
            .sum();
        s + self.bias
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Vec<f64> {
        x.row_iter()
            .map(|r| self.predict(&r.iter().copied().collect::<Vec<_>>()))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: SvrModel = serde_json::from_str(text)?;
        if m.version != SVR_FORMAT_VERSION {
            return Err(Error::input(format!("unsupported SVR model version {}", m.version)));
        }
        if m.support_vectors.len() != m.coefficients.len() {
            return Err(Error::input("SVR model has mismatched supports and coefficients"));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
