use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{f_survival, is_constant, pearson};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub f: f64,
    pub p: f64,
}

impl FTest {
    const NULL: FTest = FTest { f: 0.0, p: 1.0 };
}

/// Univariate regression F-test, `F = r^2 (n - 2) / (1 - r^2)` on
/// `(1, n - 2)` degrees of freedom. A constant feature gives `F = 0, p = 1`.
pub fn f_test_regression(feature: &[f64], target: &[f64]) -> Result<FTest> {
    let n = feature.len();
    if target.len() != n {
        return Err(Error::input("feature and target differ in length"));
    }
    if n < 3 {
        return Err(Error::input(format!("F-test needs at least 3 samples, got {n}")));
    }
    if is_constant(target) {
        return Err(Error::analysis("F-test target has a single distinct value"));
    }
    let Some(r) = pearson(feature, target) else {
        return Ok(FTest::NULL);
    };
    let r2 = r * r;
    let df = (n - 2) as f64;
    if r2 >= 1.0 {
        return Ok(FTest { f: f64::INFINITY, p: 0.0 });
    }
    let f = r2 * df / (1.0 - r2);
    Ok(FTest { f, p: f_survival(f, 1.0, df) })
}

/// One-way ANOVA F-test of `feature` across the category `labels`.
pub fn f_test_anova<L: Ord + Copy>(feature: &[f64], labels: &[L]) -> Result<FTest> {
    let n = feature.len();
    if labels.len() != n {
        return Err(Error::input("feature and labels differ in length"));
    }
    let mut cats: Vec<L> = labels.to_vec();
    cats.sort();
    cats.dedup();
    let k = cats.len();
    if k < 2 {
        return Err(Error::analysis("ANOVA needs at least 2 non-empty categories"));
    }
    if n <= k {
        return Err(Error::analysis(format!("ANOVA with {k} categories needs more than {k} samples")));
    }
    if is_constant(feature) {
        return Ok(FTest::NULL);
    }
    let grand = feature.iter().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for c in &cats {
        let g: Vec<f64> = feature.iter().zip(labels).filter(|(_, l)| *l == c).map(|(&x, _)| x).collect();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let (d1, d2) = ((k - 1) as f64, (n - k) as f64);
    if ssw <= 0.0 {
        return Ok(if ssb > 0.0 { FTest { f: f64::INFINITY, p: 0.0 } } else { FTest::NULL });
    }
    let f = (ssb / d1) / (ssw / d2);
    Ok(FTest { f, p: f_survival(f, d1, d2) })
}

/// Column order by ascending p, then descending F, then ascending index.
pub fn rank_by_significance(tests: &[FTest]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..tests.len()).collect();
    idx.sort_by(|&a, &b| {
        tests[a]
            .p
            .total_cmp(&tests[b].p)
            .then(tests[b].f.total_cmp(&tests[a].f))
            .then(a.cmp(&b))
    });
    idx
}
