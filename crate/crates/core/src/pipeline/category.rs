use std::fmt;

use serde::{Deserialize, Serialize};

/// Psychometric IQ bands with half-open boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiCategory {
    VerySuperior,
    Superior,
    HighAverage,
    Average,
    LowAverage,
    Borderline,
    Low,
}

impl MiCategory {
    pub const ALL: [MiCategory; 7] = [
        MiCategory::VerySuperior,
        MiCategory::Superior,
        MiCategory::HighAverage,
        MiCategory::Average,
        MiCategory::LowAverage,
        MiCategory::Borderline,
        MiCategory::Low,
    ];

    /// 1-based band number, 1 = very superior.
    pub fn rank(self) -> usize {
        self as usize + 1
    }

    pub fn label(self) -> &'static str {
        match self {
            MiCategory::VerySuperior => "very superior",
            MiCategory::Superior => "superior",
            MiCategory::HighAverage => "high average",
            MiCategory::Average => "average",
            MiCategory::LowAverage => "low average",
            MiCategory::Borderline => "borderline",
            MiCategory::Low => "low",
        }
    }

    /// `[lower, upper)` in IQ points.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            MiCategory::VerySuperior => (130.0, f64::INFINITY),
            MiCategory::Superior => (120.0, 130.0),
            MiCategory::HighAverage => (110.0, 120.0),
            MiCategory::Average => (90.0, 110.0),
            MiCategory::LowAverage => (80.0, 90.0),
            MiCategory::Borderline => (70.0, 80.0),
            MiCategory::Low => (f64::NEG_INFINITY, 70.0),
        }
    }
}

impl fmt::Display for MiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.rank(), self.label())
    }
}

/// Band of a finite IQ score. NaN maps to [`MiCategory::Low`].
pub fn mi_category(score: f64) -> MiCategory {
    MiCategory::ALL
        .into_iter()
        .find(|c| score >= c.bounds().0)
        .unwrap_or(MiCategory::Low)
}
