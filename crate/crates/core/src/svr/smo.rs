//! Sequential minimal optimization for the epsilon-SVR dual.
//!
//! The dual is written over `2l` variables `beta = (alpha, alpha*)` with
//! signs `s_t = +1` for the first half and `-1` for the second:
//!
//! ```text
//! min  1/2 beta' Q beta + p' beta
//! s.t. sum_t s_t beta_t = 0,  0 <= beta_t <= C
//! Q_tu = s_t s_u K(t mod l, u mod l)
//! p_t  = eps - y_t (first half),  eps + y_t (second half)
//! ```
//!
//! Pairs are chosen by maximal violation with second-order gain.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-3,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached before the tolerance.
    ConvergedWithWarning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// `alpha_i - alpha*_i` per sample.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub kkt_gap: f64,
    pub status: SolveStatus,
}

struct State<'a> {
    k: &'a DMatrix<f64>,
    l: usize,
    c: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
    p: Vec<f64>,
}

impl State<'_> {
    fn sign(&self, t: usize) -> f64 {
        if t < self.l {
            1.0
        } else {
            -1.0
        }
    }

    fn kern(&self, t: usize, u: usize) -> f64 {
        self.k[(t % self.l, u % self.l)]
    }

    fn q(&self, t: usize, u: usize) -> f64 {
        self.sign(t) * self.sign(u) * self.kern(t, u)
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.l {
            self.beta[t] < self.c
        } else {
            self.beta[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.l {
            self.beta[t] > 0.0
        } else {
            self.beta[t] < self.c
        }
    }

    /// Working pair and current violation; `None` when optimal within `tol`.
    fn select(&self, tol: f64) -> (Option<(usize, usize)>, f64) {
        let n = 2 * self.l;
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.sign(t) * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let v = self.sign(t) * self.grad[t];
            gmax2 = gmax2.max(v);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + v;
            if b > 0.0 {
                let mut a = self.kern(i, i) + self.kern(t, t) - 2.0 * self.kern(i, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        let gap = gmax + gmax2;
        if gap < tol || i == usize::MAX || j == usize::MAX {
            (None, gap.max(0.0))
        } else {
            (Some((i, j)), gap)
        }
    }

    fn update(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let mut quad = self.kern(i, i) + self.kern(j, j) - 2.0 * self.kern(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        let (gi, gj) = (self.grad[i], self.grad[j]);
        let (mut bi, mut bj) = (old_i, old_j);
        if self.sign(i) != self.sign(j) {
            let delta = (-gi - gj) / quad;
            let diff = bi - bj;
            bi += delta;
            bj += delta;
            if diff > 0.0 {
                if bj < 0.0 {
                    bj = 0.0;
                    bi = diff;
                }
            } else if bi < 0.0 {
                bi = 0.0;
                bj = -diff;
            }
            if diff > 0.0 {
                if bi > c {
                    bi = c;
                    bj = c - diff;
                }
            } else if bj > c {
                bj = c;
                bi = c + diff;
            }
        } else {
            let delta = (gi - gj) / quad;
            let sum = bi + bj;
            bi -= delta;
            bj += delta;
            if sum > c {
                if bi > c {
                    bi = c;
                    bj = sum - c;
                }
            } else if bj < 0.0 {
                bj = 0.0;
                bi = sum;
            }
            if sum > c {
                if bj > c {
                    bj = c;
                    bi = sum - c;
                }
            } else if bi < 0.0 {
                bi = 0.0;
                bj = sum;
            }
        }
        self.beta[i] = bi;
        self.beta[j] = bj;
        let (di, dj) = (bi - old_i, bj - old_j);
        for t in 0..2 * self.l {
            self.grad[t] += self.q(t, i) * di + self.q(t, j) * dj;
        }
    }

    fn objective(&self) -> f64 {
        0.5 * self
            .beta
            .iter()
            .zip(self.grad.iter().zip(&self.p))
            .map(|(b, (g, p))| b * (g + p))
            .sum::<f64>()
    }

    /// Offset from free variables, or the midpoint of the feasible interval
    /// when none are free.
    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum, mut free) = (0.0, 0usize);
        for t in 0..2 * self.l {
            let yg = self.sign(t) * self.grad[t];
            let s = self.sign(t);
            if self.beta[t] >= self.c {
                if s < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.beta[t] <= 0.0 {
                if s > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

/// Solves the epsilon-SVR dual for a precomputed kernel matrix.
pub fn solve_dual(k: &DMatrix<f64>, y: &[f64], c: f64, epsilon: f64, opts: SolverOptions) -> DualSolution {
    let l = y.len();
    debug_assert_eq!(k.nrows(), l);
    let p: Vec<f64> = y.iter().map(|v| epsilon - v).chain(y.iter().map(|v| epsilon + v)).collect();
    let mut st = State {
        k,
        l,
        c,
        beta: vec![0.0; 2 * l],
        grad: p.clone(),
        p,
    };
    let mut iterations = 0;
    let (status, gap) = loop {
        let (pair, gap) = st.select(opts.tol);
        let Some((i, j)) = pair else {
            break (SolveStatus::Converged, gap);
        };
        if iterations >= opts.max_iter {
            break (SolveStatus::ConvergedWithWarning, gap);
        }
        st.update(i, j);
        iterations += 1;
    };
    let coef = (0..l).map(|i| st.beta[i] - st.beta[i + l]).collect();
    DualSolution {
        coef,
        bias: -st.rho(),
        objective: st.objective(),
        iterations,
        kkt_gap: gap,
        status,
    }
}

/// Value of the dual objective at coefficients `coef` (the split into
/// `alpha`, `alpha*` with `alpha * alpha* = 0`).
pub fn dual_objective(k: &DMatrix<f64>, y: &[f64], epsilon: f64, coef: &[f64]) -> f64 {
    let l = y.len();
    let mut quad = 0.0;
    for i in 0..l {
        for j in 0..l {
            quad += coef[i] * coef[j] * k[(i, j)];
        }
    }
    let lin: f64 = coef.iter().zip(y).map(|(b, v)| epsilon * b.abs() - v * b).sum();
    0.5 * quad + lin
}
