use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    mean_baseline_loo, nrmse_from, random_baseline_loo, rmse, spearman, GroupRatio, MeanBaseline,
    RandomBaseline, Spearman,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Mi,
    Pi,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Mi => "MI",
            TargetKind::Pi => "PI",
        }
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mi" => Ok(TargetKind::Mi),
            "pi" => Ok(TargetKind::Pi),
            other => Err(Error::input(format!("unknown target `{other}` (expected mi or pi)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBaselines {
    pub random: RandomBaseline,
    pub mean: MeanBaseline,
}

/// Out-of-sample predictions for one target with correlation, error and
/// baseline comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub target: TargetKind,
    pub seed: u64,
    pub image_ids: Vec<String>,
    pub actual: Vec<f64>,
    pub predictions: Vec<f64>,
    pub spearman: Spearman,
    pub rmse: f64,
    pub nrmse: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub baselines: ReportBaselines,
    /// PI against MI, when the target is MI and PI scores are known.
    pub human: Option<Spearman>,
    pub shuffled_target: bool,
    pub failed_folds: Vec<String>,
    pub warnings: Vec<String>,
    pub group_ratios: Option<Vec<GroupRatio>>,
}

impl EvaluationReport {
    /// Scores `predictions` against `actual`. The baselines use the same
    /// leave-one-out protocol as the predictions.
    pub fn new(
        target: TargetKind,
        seed: u64,
        image_ids: Vec<String>,
        actual: Vec<f64>,
        predictions: Vec<f64>,
        baseline_runs: usize,
    ) -> Result<Self> {
        if image_ids.len() != actual.len() || predictions.len() != actual.len() {
            return Err(Error::input("report inputs differ in length"));
        }
        let s = spearman(&predictions, &actual)?;
        let e = rmse(&predictions, &actual)?;
        let nrmse = nrmse_from(e, &actual)?;
        let y_min = actual.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = actual.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let baselines = ReportBaselines {
            random: random_baseline_loo(&actual, baseline_runs, seed)?,
            mean: mean_baseline_loo(&actual)?,
        };
        Ok(EvaluationReport {
            target,
            seed,
            image_ids,
            actual,
            predictions,
            spearman: s,
            rmse: e,
            nrmse,
            y_min,
            y_max,
            baselines,
            human: None,
            shuffled_target: false,
            failed_folds: Vec::new(),
            warnings: Vec::new(),
            group_ratios: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Text tables: estimation results, then significance ratios when
    /// present.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let n = self.actual.len();
        let _ = writeln!(s, "Estimation results: {} (n = {n}, seed = {})", self.target.as_str(), self.seed);
        if self.shuffled_target {
            let _ = writeln!(s, "target shuffled (control run)");
        }
        let _ = writeln!(s, "actual range: [{:.4}, {:.4}]", self.y_min, self.y_max);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<10} {:>12} {:>12} {:>10} {:>8}", "", "Spearman rho", "p", "RMSE", "NRMSE");
        if let Some(h) = &self.human {
            let _ = writeln!(s, "{:<10} {:>12.4} {:>12.3e} {:>10} {:>8}", "Human", h.rho, h.p, "--", "--");
        }
        let _ = writeln!(
            s,
            "{:<10} {:>12.4} {:>12.3e} {:>10.4} {:>8.4}",
            "Computer", self.spearman.rho, self.spearman.p, self.rmse, self.nrmse
        );
        let r = &self.baselines.random;
        let _ = writeln!(
            s,
            "{:<10} {:>12.4} {:>12} {:>10.4} {:>8}",
            "Random",
            r.mean_rho,
            "--",
            r.mean_rmse,
            opt(r.nrmse)
        );
        let m = &self.baselines.mean;
        let _ = writeln!(s, "{:<10} {:>12} {:>12} {:>10.4} {:>8}", "Mean", "--", "--", m.rmse, opt(m.nrmse));
        let _ = writeln!(s, "(random baseline: mean of {} seeded runs)", r.runs);
        if !self.failed_folds.is_empty() {
            let _ = writeln!(s, "\nfailed folds: {}", self.failed_folds.join(", "));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        if let Some(groups) = &self.group_ratios {
            let _ = writeln!(s);
            s.push_str(&group_ratio_text(groups));
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "--".to_string(), |v| format!("{v:.4}"))
}

/// Significance-ratio table with one row per feature group.
pub fn group_ratio_text(groups: &[GroupRatio]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Ratios of significantly correlated features (p < 0.05)");
    let _ = writeln!(
        s,
        "{:<42} {:>5} {:>8} {:>8} {:>9} {:>9} {:>9} {:>9}",
        "feature group", "len", "MI", "PI", "MI +rho", "MI -rho", "PI +rho", "PI -rho"
    );
    let pct = |g: &Option<super::correlation::TargetGroupStats>| {
        g.as_ref()
            .map_or_else(|| "--".to_string(), |g| format!("{:.1}%", 100.0 * g.significant_ratio))
    };
    let mean = |g: &Option<super::correlation::TargetGroupStats>, pos: bool| {
        let v = g.as_ref().and_then(|g| {
            if pos {
                g.mean_significant_positive
            } else {
                g.mean_significant_negative
            }
        });
        opt(v)
    };
    for g in groups {
        let _ = writeln!(
            s,
            "{:<42} {:>5} {:>8} {:>8} {:>9} {:>9} {:>9} {:>9}",
            g.name,
            g.len,
            pct(&g.mi),
            pct(&g.pi),
            mean(&g.mi, true),
            mean(&g.mi, false),
            mean(&g.pi, true),
            mean(&g.pi, false)
        );
    }
    s
}
