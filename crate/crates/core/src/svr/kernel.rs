use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

impl Kernel {
    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::Rbf { .. } => KernelKind::Rbf,
            Kernel::Linear => KernelKind::Linear,
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }

    /// Gram matrix of the rows.
    pub fn matrix(&self, rows: &[Vec<f64>]) -> DMatrix<f64> {
        let n = rows.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j {
                    match self {
                        Kernel::Rbf { .. } => 1.0,
                        Kernel::Linear => self.eval(&rows[i], &rows[i]),
                    }
                } else {
                    self.eval(&rows[i], &rows[j])
                };
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kernel::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
            Kernel::Linear => f.write_str("linear"),
        }
    }
}
