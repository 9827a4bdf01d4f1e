//! PCA followed by F-test selection for a PI-style and an MI-style target.
//!
//! Two of 40 latent directions carry the target; the rest are noise. The
//! example shows which principal components each selector keeps.

use nalgebra::DMatrix;
use profileiq::pipeline::{
    f_test_regression, mi_category, pca_fit, pca_transform, select_features_mi, select_features_pi,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> profileiq::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 80;
    let latent = DMatrix::from_fn(n, 40, |_, j| {
        let scale = if j < 2 { 3.0 } else { 1.0 };
        scale * rng.sample::<f64, _>(StandardNormal)
    });
    let mixing = DMatrix::from_fn(40, 200, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = &latent * mixing;
    let mi: Vec<f64> = (0..n)
        .map(|i| 105.0 + 4.0 * latent[(i, 0)] - 3.0 * latent[(i, 1)] + 6.0 * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let pca = pca_fit(&x, n / 2)?;
    let z = pca_transform(&pca, &x)?;
    let shown: Vec<String> = pca.variances.iter().take(5).map(|v| format!("{v:.1}")).collect();
    println!("{} components, leading variances {}", pca.n_components(), shown.join(", "));

    println!("component  F regression  p");
    for j in 0..8 {
        let t = f_test_regression(z.column(j).as_slice(), &mi)?;
        println!("{j:>9}  {:>12.2}  {:.1e}", t.f, t.p);
    }

    let pi = select_features_pi(&z, &mi, 6)?;
    println!("PI selection (F regression): {:?}", pi.selected);

    let labels: Vec<_> = mi.iter().map(|&s| mi_category(s)).collect();
    let sel = select_features_mi(&z, &mi, &labels, 6)?;
    println!("MI selection (intersection): {:?} fallback {}", sel.selected, sel.fallback);
    for c in [mi_category(85.0), mi_category(100.0), mi_category(125.0)] {
        println!("  band {:<22} {:?}", c.label(), c.bounds());
    }
    Ok(())
}
