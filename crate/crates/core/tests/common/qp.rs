use nalgebra::{DMatrix, SymmetricEigen};

/// Euclidean projection onto {sum s_t b_t = 0, 0 <= b <= c} by bisection
/// on the multiplier of the equality constraint.
pub fn project(v: &[f64], s: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> (Vec<f64>, f64) {
        let b: Vec<f64> = v.iter().zip(s).map(|(x, si)| (x - lam * si).clamp(0.0, c)).collect();
        let g = b.iter().zip(s).map(|(x, si)| x * si).sum();
        (b, g)
    };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // g decreases in lambda
        if at(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi)).0
}

/// Accelerated projected gradient on the 2l-variable dual; returns the
/// optimal objective.
pub fn qp_oracle(k: &DMatrix<f64>, y: &[f64], c: f64, eps: f64) -> f64 {
    let l = y.len();
    let s: Vec<f64> = (0..2 * l).map(|t| if t < l { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..2 * l).map(|t| if t < l { eps - y[t] } else { eps + y[t - l] }).collect();
    let q = |t: usize, u: usize| s[t] * s[u] * k[(t % l, u % l)];
    let obj = |b: &[f64]| {
        let mut v = 0.0;
        for t in 0..2 * l {
            for u in 0..2 * l {
                v += 0.5 * b[t] * b[u] * q(t, u);
            }
            v += p[t] * b[t];
        }
        v
    };
    let lmax = SymmetricEigen::new(k.clone()).eigenvalues.max();
    let step = 1.0 / (2.0 * lmax);
    let mut x = vec![0.0; 2 * l];
    let mut yv = x.clone();
    let mut t_acc = 1.0f64;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..2 * l)
            .map(|t| (0..2 * l).map(|u| q(t, u) * yv[u]).sum::<f64>() + p[t])
            .collect();
        let cand: Vec<f64> = yv.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        let nx = project(&cand, &s, c);
        let nt = (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt()) / 2.0;
        yv = nx.iter().zip(&x).map(|(a, b)| a + (t_acc - 1.0) / nt * (a - b)).collect();
        x = nx;
        t_acc = nt;
    }
    obj(&x)
}
