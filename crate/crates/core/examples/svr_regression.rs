//! Epsilon-SVR: dual solve, grid search and leave-one-out evaluation on a
//! noisy nonlinear function.

use nalgebra::DMatrix;
use profileiq::analysis::{rmse, spearman};
use profileiq::svr::{grid_search, svr_train, GridSpec, HyperParams, Kernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> profileiq::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 60;
    let x = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-2.0f64..2.0));
    let y: Vec<f64> = (0..n)
        .map(|i| (1.5 * x[(i, 0)]).sin() + 0.5 * x[(i, 1)] + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let grid = GridSpec::default().points(x.ncols());
    let search = grid_search(&x, &y, &grid, 5, 0)?;
    println!("grid of {} points, best {:?}", grid.len(), search.best);
    if let Some(e) = search.best_rmse {
        println!("cross-validated RMSE {e:.4}");
    }

    let model = svr_train(&x, &y, search.best)?;
    let fit = model.predict_rows(&x);
    println!("{} support vectors, training RMSE {:.4}", model.coefficients.len(), rmse(&fit, &y)?);

    let mut loo = Vec::with_capacity(n);
    for i in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let xt = x.select_rows(&keep);
        let yt: Vec<f64> = keep.iter().map(|&j| y[j]).collect();
        let m = svr_train(&xt, &yt, search.best)?;
        loo.push(m.predict(x.row(i).transpose().as_slice()));
    }
    let s = spearman(&loo, &y)?;
    println!("leave-one-out: rho {:.3} (p {:.1e}), RMSE {:.4}", s.rho, s.p, rmse(&loo, &y)?);

    let linear = svr_train(&x, &y, HyperParams { c: 10.0, epsilon: 0.1, kernel: Kernel::Linear })?;
    println!("linear kernel training RMSE {:.4}", rmse(&linear.predict_rows(&x), &y)?);
    Ok(())
}
