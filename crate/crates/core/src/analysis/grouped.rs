use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{spearman, Spearman};
use crate::error::{Error, Result};
use crate::stats::{is_constant, t_two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "unknown")]
    Unknown,
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "M" | "m" | "male" => Ok(Gender::Male),
            "F" | "f" | "female" => Ok(Gender::Female),
            "" | "unknown" | "U" | "u" => Ok(Gender::Unknown),
            other => Err(Error::input(format!("unrecognized gender `{other}`"))),
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "M",
            Gender::Female => "F",
            Gender::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<Coefficient>,
    pub residual_df: usize,
    pub r_squared: f64,
}

impl OlsFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Least squares of `y` on an intercept plus the named regressors, with
/// two-sided t-tests on each coefficient.
pub fn ols(y: &[f64], regressors: &[(&str, &[f64])]) -> Result<OlsFit> {
    let n = y.len();
    let p = regressors.len() + 1;
    if n <= p {
        return Err(Error::analysis(format!("regression with {p} coefficients needs more than {p} rows, got {n}")));
    }
    for (name, x) in regressors {
        if x.len() != n {
            return Err(Error::input(format!("regressor {name} has {} rows, expected {n}", x.len())));
        }
        if is_constant(x) {
            return Err(Error::analysis(format!("singular design: {name} is constant")));
        }
    }
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { regressors[j - 1].1[i] });
    let yv = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-10 {
        return Err(Error::analysis("singular design: regressors are collinear"));
    }
    let beta = svd
        .solve(&yv, 0.0)
        .map_err(|e| Error::analysis(format!("least squares failed: {e}")))?;
    let resid = &yv - &design * &beta;
    let rss = resid.norm_squared();
    let df = n - p;
    let sigma2 = rss / df as f64;
    let xtx_inv = (design.transpose() * &design)
        .try_inverse()
        .ok_or_else(|| Error::analysis("singular design"))?;
    let ybar = yv.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let coefficients = (0..p)
        .map(|j| {
            let se = (sigma2 * xtx_inv[(j, j)]).sqrt();
            let t = if se > 0.0 { beta[j] / se } else { f64::INFINITY.copysign(beta[j]) };
            Coefficient {
                name: if j == 0 { "intercept".into() } else { regressors[j - 1].0.into() },
                estimate: beta[j],
                std_error: se,
                t,
                p: if beta[j] == 0.0 && se == 0.0 { 1.0 } else { t_two_sided(t, df as f64) },
            }
        })
        .collect();
    Ok(OlsFit {
        coefficients,
        residual_df: df,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGroupRegression {
    pub user_group: String,
    pub n: usize,
    pub fit: OlsFit,
}

/// One row of the PI/MI correlation table: a rater group against the user
/// groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterGroupRow {
    pub rater_group: String,
    pub male_users: Option<Spearman>,
    pub female_users: Option<Spearman>,
    pub together: Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedAnalysis {
    pub regressions: Vec<UserGroupRegression>,
    pub correlations: Vec<RaterGroupRow>,
}

/// Groups with fewer members than this are left out of per-gender rows.
pub const MIN_GROUP_SIZE: usize = 4;

fn select(xs: &[f64], mask: &[bool]) -> Vec<f64> {
    xs.iter().zip(mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect()
}

/// MI ~ intercept + PI + age per user gender and overall, plus Spearman
/// correlations between PI and MI. `rater_splits` holds PI scores computed
/// from rater subsets (for example male and female raters), each aligned
/// with `mi`.
pub fn grouped_pi_mi_analysis(
    mi: &[f64],
    pi: &[f64],
    gender: &[Gender],
    age: &[f64],
    rater_splits: &[(String, Vec<f64>)],
) -> Result<GroupedAnalysis> {
    let n = mi.len();
    if pi.len() != n || gender.len() != n || age.len() != n {
        return Err(Error::input("grouped analysis inputs differ in length"));
    }
    for (name, s) in rater_splits {
        if s.len() != n {
            return Err(Error::input(format!("rater split `{name}` has {} scores, expected {n}", s.len())));
        }
    }
    let masks = [
        ("male users", gender.iter().map(|&g| g == Gender::Male).collect::<Vec<_>>()),
        ("female users", gender.iter().map(|&g| g == Gender::Female).collect()),
        ("together", vec![true; n]),
    ];

    let mut regressions = Vec::new();
    for (label, mask) in &masks {
        let count = mask.iter().filter(|&&m| m).count();
        let together = *label == "together";
        if !together && count < MIN_GROUP_SIZE {
            continue;
        }
        let (y, x1, x2) = (select(mi, mask), select(pi, mask), select(age, mask));
        let fit = ols(&y, &[("pi", &x1), ("age", &x2)]);
        let fit = match fit {
            Ok(f) => f,
            Err(e) if together => return Err(e),
            Err(Error::Analysis(_)) => continue,
            Err(e) => return Err(e),
        };
        regressions.push(UserGroupRegression {
            user_group: label.to_string(),
            n: count,
            fit,
        });
    }

    let row = |name: &str, scores: &[f64]| -> Result<RaterGroupRow> {
        let per = |mask: &[bool]| -> Result<Option<Spearman>> {
            if mask.iter().filter(|&&m| m).count() < MIN_GROUP_SIZE {
                return Ok(None);
            }
            spearman(&select(scores, mask), &select(mi, mask)).map(Some)
        };
        Ok(RaterGroupRow {
            rater_group: name.to_string(),
            male_users: per(&masks[0].1)?,
            female_users: per(&masks[1].1)?,
            together: spearman(scores, mi)?,
        })
    };
    let mut correlations = Vec::new();
    for (name, scores) in rater_splits {
        correlations.push(row(name, scores)?);
    }
    correlations.push(row("together", pi)?);
    Ok(GroupedAnalysis {
        regressions,
        correlations,
    })
}
