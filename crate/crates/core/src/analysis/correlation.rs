use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{spearman, Spearman};
use crate::error::{Error, Result};
use crate::imagefeat::{feature_schema, FeatureGroup, FEATURE_DIM};

pub const SIGNIFICANCE: f64 = 0.05;

/// A block of feature columns reported together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationGroup {
    pub name: String,
    pub columns: Range<usize>,
    pub local: bool,
}

impl CorrelationGroup {
    /// The global block plus the four local descriptor families.
    pub fn standard() -> Vec<CorrelationGroup> {
        let global_end = FeatureGroup::BodyFace.range().end;
        let mut out = vec![CorrelationGroup {
            name: "colour, composition, body&face, texture".into(),
            columns: 0..global_end,
            local: false,
        }];
        let local = [
            (FeatureGroup::LocalColour, "local colour histogram"),
            (FeatureGroup::LocalLbp, "local LBP"),
            (FeatureGroup::LocalGist, "local GIST"),
            (FeatureGroup::LocalSift, "local SIFT"),
        ];
        out.extend(local.into_iter().map(|(g, name)| CorrelationGroup {
            name: name.into(),
            columns: g.range(),
            local: true,
        }));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetCorrelation {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
    pub significant: bool,
}

impl From<Spearman> for TargetCorrelation {
    fn from(s: Spearman) -> Self {
        TargetCorrelation {
            rho: s.rho,
            p: s.p,
            n: s.n,
            significant: s.p < SIGNIFICANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub index: usize,
    pub name: String,
    pub mi: Option<TargetCorrelation>,
    pub pi: Option<TargetCorrelation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetGroupStats {
    pub significant_ratio: f64,
    /// Mean of significant positive correlations (local groups only).
    pub mean_significant_positive: Option<f64>,
    pub mean_significant_negative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRatio {
    pub name: String,
    pub len: usize,
    pub mi: Option<TargetGroupStats>,
    pub pi: Option<TargetGroupStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelationTable {
    pub alpha: f64,
    pub features: Vec<FeatureCorrelation>,
    pub groups: Vec<GroupRatio>,
}

impl FeatureCorrelationTable {
    /// Per-feature rows as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,name,mi_rho,mi_p,mi_significant,pi_rho,pi_p,pi_significant\n");
        let cell = |c: &Option<TargetCorrelation>| match c {
            Some(c) => format!("{},{},{}", c.rho, c.p, u8::from(c.significant)),
            None => ",,".to_string(),
        };
        for f in &self.features {
            out.push_str(&format!("{},{},{},{}\n", f.index, f.name, cell(&f.mi), cell(&f.pi)));
        }
        out
    }
}

/// Rows restricted to `rows` for the given column range.
#[derive(Debug, Clone)]
pub struct RowSubset {
    pub columns: Range<usize>,
    pub rows: Vec<bool>,
}

/// Spearman correlation of every column against MI and/or PI, with group
/// significance ratios.
///
/// Body & face columns are correlated over face-bearing images only (rows
/// whose `face_count` feature is positive).
pub fn feature_correlation_table(
    features: &DMatrix<f64>,
    mi: Option<&[f64]>,
    pi: Option<&[f64]>,
) -> Result<FeatureCorrelationTable> {
    if features.ncols() != FEATURE_DIM {
        return Err(Error::input(format!(
            "feature matrix has {} columns, expected {FEATURE_DIM}",
            features.ncols()
        )));
    }
    let face_col = FeatureGroup::BodyFace.range().start + 3;
    let has_face: Vec<bool> = features.column(face_col).iter().map(|&c| c > 0.0).collect();
    let names: Vec<String> = feature_schema().iter().map(|l| l.name.clone()).collect();
    correlation_table(
        features,
        &names,
        mi,
        pi,
        &CorrelationGroup::standard(),
        Some(&RowSubset {
            columns: FeatureGroup::BodyFace.range(),
            rows: has_face,
        }),
    )
}

/// General form of [`feature_correlation_table`] over arbitrary column
/// groups.
pub fn correlation_table(
    features: &DMatrix<f64>,
    names: &[String],
    mi: Option<&[f64]>,
    pi: Option<&[f64]>,
    groups: &[CorrelationGroup],
    subset: Option<&RowSubset>,
) -> Result<FeatureCorrelationTable> {
    let n = features.nrows();
    for (label, t) in [("MI", mi), ("PI", pi)] {
        if let Some(t) = t {
            if t.len() != n {
                return Err(Error::input(format!(
                    "{label} has {} scores for {n} feature rows",
                    t.len()
                )));
            }
        }
    }
    if names.len() != features.ncols() {
        return Err(Error::input("feature names do not match the column count"));
    }
    let subset_targets = |t: &[f64], rows: &[bool]| -> Vec<f64> {
        t.iter().zip(rows).filter(|(_, &k)| k).map(|(&v, _)| v).collect()
    };
    let sub_mi = subset.zip(mi).map(|(s, t)| subset_targets(t, &s.rows));
    let sub_pi = subset.zip(pi).map(|(s, t)| subset_targets(t, &s.rows));

    let per_feature: Vec<Result<FeatureCorrelation>> = (0..features.ncols())
        .into_par_iter()
        .map(|j| {
            let col = features.column(j);
            let col = col.as_slice();
            let restricted = subset.filter(|s| s.columns.contains(&j));
            let corr = |target: Option<&[f64]>, sub: &Option<Vec<f64>>| -> Result<Option<TargetCorrelation>> {
                let Some(target) = target else { return Ok(None) };
                match restricted {
                    Some(s) => {
                        let xs = subset_targets(col, &s.rows);
                        let ys = sub.as_deref().expect("subset targets exist");
                        if xs.len() < 3 {
                            return Ok(Some(Spearman { rho: 0.0, p: 1.0, n: xs.len() }.into()));
                        }
                        Ok(Some(spearman(&xs, ys)?.into()))
                    }
                    None => Ok(Some(spearman(col, target)?.into())),
                }
            };
            Ok(FeatureCorrelation {
                index: j,
                name: names[j].clone(),
                mi: corr(mi, &sub_mi)?,
                pi: corr(pi, &sub_pi)?,
            })
        })
        .collect();
    let features_out = per_feature.into_iter().collect::<Result<Vec<_>>>()?;

    let group_stats = |g: &CorrelationGroup, pick: fn(&FeatureCorrelation) -> Option<TargetCorrelation>| {
        let cs: Vec<TargetCorrelation> = features_out[g.columns.clone()].iter().filter_map(pick).collect();
        if cs.is_empty() {
            return None;
        }
        let sig: Vec<f64> = cs.iter().filter(|c| c.significant).map(|c| c.rho).collect();
        let mean_of = |keep: fn(f64) -> bool| {
            let v: Vec<f64> = sig.iter().copied().filter(|&r| keep(r)).collect();
            (g.local && !v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        Some(TargetGroupStats {
            significant_ratio: sig.len() as f64 / cs.len() as f64,
            mean_significant_positive: mean_of(|r| r > 0.0),
            mean_significant_negative: mean_of(|r| r < 0.0),
        })
    };
    let groups_out = groups
        .iter()
        .map(|g| GroupRatio {
            name: g.name.clone(),
            len: g.columns.len(),
            mi: group_stats(g, |f| f.mi),
            pi: group_stats(g, |f| f.pi),
        })
        .collect();
    Ok(FeatureCorrelationTable {
        alpha: SIGNIFICANCE,
        features: features_out,
        groups: groups_out,
    })
}
