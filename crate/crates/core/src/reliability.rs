//! Rater normalization, one-way random-effects ICC and perceived-score
//! aggregation.
//!
//! The ICC is computed on per-rater z-scores, the same scores that feed the
//! median PI aggregation.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{median, quantile_sorted};

pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub rater_id: String,
    pub image_id: String,
    pub raw_score: u8,
}

/// Validated rating records with optional per-rater z-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    records: Vec<Rating>,
    normalized: Option<Vec<f64>>,
}

impl RatingsTable {
    pub fn new(records: Vec<Rating>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            if !(MIN_SCORE..=MAX_SCORE).contains(&r.raw_score) {
                return Err(Error::input(format!(
                    "record {i}: score {} outside {MIN_SCORE}..={MAX_SCORE}",
                    r.raw_score
                )));
            }
            if !seen.insert((r.rater_id.as_str(), r.image_id.as_str())) {
                return Err(Error::input(format!(
                    "rater {} rated image {} more than once",
                    r.rater_id, r.image_id
                )));
            }
        }
        if records.is_empty() {
            return Err(Error::input("ratings table is empty"));
        }
        Ok(RatingsTable {
            records,
            normalized: None,
        })
    }

    /// Reads `rater_id,image_id,score` CSV; extra columns are ignored.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::input(format!("ratings header: {e}")))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::input(format!("ratings CSV lacks a `{name}` column")))
        };
        let (rc, ic, sc) = (col("rater_id")?, col("image_id")?, col("score")?);
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::input(format!("ratings line {line}: {e}")))?;
            let field = |c: usize| row.get(c).unwrap_or("");
            let score: u8 = field(sc).parse().map_err(|_| {
                Error::input(format!("ratings line {line}: score `{}` is not an integer", field(sc)))
            })?;
            if !(MIN_SCORE..=MAX_SCORE).contains(&score) {
                return Err(Error::input(format!(
                    "ratings line {line}: score {score} outside {MIN_SCORE}..={MAX_SCORE}"
                )));
            }
            if field(rc).is_empty() || field(ic).is_empty() {
                return Err(Error::input(format!("ratings line {line}: empty id")));
            }
            records.push(Rating {
                rater_id: field(rc).to_string(),
                image_id: field(ic).to_string(),
                raw_score: score,
            });
        }
        Self::new(records)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn records(&self) -> &[Rating] {
        &self.records
    }

    /// Per-record z-scores, aligned with [`records`](Self::records), once
    /// [`znormalize_raters`] has run.
    pub fn normalized(&self) -> Option<&[f64]> {
        self.normalized.as_deref()
    }

    /// Image ids in order of first appearance.
    pub fn image_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .map(|r| r.image_id.as_str())
            .filter(|id| seen.insert(*id))
            .collect()
    }

    pub fn ratings_per_image(&self) -> Vec<(String, usize)> {
        self.group_by_image(&vec![0.0; self.records.len()])
            .into_iter()
            .map(|(id, v)| (id, v.len()))
            .collect()
    }

    fn scores_or_normalize(&self) -> Vec<f64> {
        match &self.normalized {
            Some(z) => z.clone(),
            None => normalized_scores(&self.records),
        }
    }

    fn group_by_image(&self, scores: &[f64]) -> Vec<(String, Vec<f64>)> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
        for (r, &s) in self.records.iter().zip(scores) {
            let slot = *index.entry(r.image_id.as_str()).or_insert_with(|| {
                groups.push((r.image_id.clone(), Vec::new()));
                groups.len() - 1
            });
            groups[slot].1.push(s);
        }
        groups
    }

    /// Normalized scores grouped by image, in first-appearance order.
    pub fn normalized_by_image(&self) -> Vec<(String, Vec<f64>)> {
        self.group_by_image(&self.scores_or_normalize())
    }

    /// Keeps only ratings from the given raters; normalization is redone on
    /// the subset when requested later.
    pub fn filter_raters(&self, keep: impl Fn(&str) -> bool) -> Result<RatingsTable> {
        let records = self.records.iter().filter(|r| keep(&r.rater_id)).cloned().collect();
        RatingsTable::new(records)
    }
}

/// Z-score of `values` with the sample standard deviation; all zeros when
/// the std is 0 or there is a single value.
pub fn zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 || values.iter().all(|&v| v == values[0]) {
        return vec![0.0; n];
    }
    let m = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    values.iter().map(|v| (v - m) / sd).collect()
}

fn normalized_scores(records: &[Rating]) -> Vec<f64> {
    let mut by_rater: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_rater.entry(r.rater_id.as_str()).or_default().push(i);
    }
    let mut out = vec![0.0; records.len()];
    for idx in by_rater.values() {
        let raw: Vec<f64> = idx.iter().map(|&i| f64::from(records[i].raw_score)).collect();
        for (&i, z) in idx.iter().zip(zscore(&raw)) {
            out[i] = z;
        }
    }
    out
}

/// Attaches per-rater z-scores (sample std) to the table.
pub fn znormalize_raters(table: &RatingsTable) -> RatingsTable {
    RatingsTable {
        records: table.records.clone(),
        normalized: Some(normalized_scores(&table.records)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IccBand {
    Poor,
    Fair,
    Good,
    Excellent,
}

impl IccBand {
    pub fn as_str(self) -> &'static str {
        match self {
            IccBand::Poor => "poor",
            IccBand::Fair => "fair",
            IccBand::Good => "good",
            IccBand::Excellent => "excellent",
        }
    }
}

pub fn classify_icc(value: f64) -> IccBand {
    if value < 0.4 {
        IccBand::Poor
    } else if value < 0.6 {
        IccBand::Fair
    } else if value < 0.75 {
        IccBand::Good
    } else {
        IccBand::Excellent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub sigma_r2: f64,
    /// Between-image component before clamping at zero.
    pub sigma_r2_unclamped: f64,
    pub sigma_e2: f64,
    pub k_eff: f64,
    pub n0: f64,
    pub grand_mean: f64,
    pub msb: f64,
    pub msw: f64,
    pub n_images: usize,
    pub n_ratings: usize,
    pub icc: f64,
    pub band: IccBand,
}

/// One-way random-effects ICC of the average rating from per-image score
/// groups.
pub fn icc_from_groups(groups: &[Vec<f64>]) -> Result<IccResult> {
    let i = groups.len();
    if i < 2 {
        return Err(Error::analysis(format!("ICC needs at least 2 images, got {i}")));
    }
    if let Some(pos) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::analysis(format!(
            "ICC needs at least 2 ratings per image; image #{pos} has {}",
            groups[pos].len()
        )));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let nf = n as f64;
    let grand_mean = groups.iter().flatten().sum::<f64>() / nf;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    let mut sum_k2 = 0.0;
    for g in groups {
        let k = g.len() as f64;
        let m = g.iter().sum::<f64>() / k;
        ssb += k * (m - grand_mean).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
        sum_k2 += k * k;
    }
    let msb = ssb / (i - 1) as f64;
    let msw = ssw / (n - i) as f64;
    let n0 = (nf - sum_k2 / nf) / (i - 1) as f64;
    let sigma_r2_unclamped = (msb - msw) / n0;
    let sigma_r2 = sigma_r2_unclamped.max(0.0);
    let sigma_e2 = msw;
    let k_eff = nf / i as f64;
    let denom = sigma_r2 + sigma_e2 / k_eff;
    if denom <= 0.0 {
        return Err(Error::analysis("ICC undefined: all scores are identical"));
    }
    let icc = sigma_r2 / denom;
    Ok(IccResult {
        sigma_r2,
        sigma_r2_unclamped,
        sigma_e2,
        k_eff,
        n0,
        grand_mean,
        msb,
        msw,
        n_images: i,
        n_ratings: n,
        icc,
        band: classify_icc(icc),
    })
}

/// ICC on the table's normalized scores.
pub fn icc_one_way(table: &RatingsTable) -> Result<IccResult> {
    let groups: Vec<Vec<f64>> = table.normalized_by_image().into_iter().map(|(_, g)| g).collect();
    icc_from_groups(&groups)
}

/// Median normalized score per image, in first-appearance order.
pub fn aggregate_pi(table: &RatingsTable) -> Vec<(String, f64)> {
    table
        .normalized_by_image()
        .into_iter()
        .map(|(id, g)| (id, median(&g)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Most extreme observations inside the 1.5 IQR fences.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    /// Observations beyond the fences, ascending.
    pub extremes: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::analysis("box statistics of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25);
    let q3 = quantile_sorted(&v, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = v.iter().copied().filter(|x| (lo..=hi).contains(x));
    let lower_whisker = inside.clone().fold(f64::INFINITY, f64::min);
    let upper_whisker = inside.fold(f64::NEG_INFINITY, f64::max);
    Ok(BoxStats {
        n: v.len(),
        median: quantile_sorted(&v, 0.5),
        q1,
        q3,
        lower_whisker,
        upper_whisker,
        extremes: v.iter().copied().filter(|x| !(lo..=hi).contains(x)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub image_id: String,
    #[serde(flatten)]
    pub stats: BoxStats,
}

/// Box-plot summary of each image's normalized ratings.
pub fn rating_summary(table: &RatingsTable) -> Vec<RatingSummary> {
    table
        .normalized_by_image()
        .into_iter()
        .map(|(image_id, g)| RatingSummary {
            image_id,
            stats: box_stats(&g).expect("every image has a rating"),
        })
        .collect()
}
