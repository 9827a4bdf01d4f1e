use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    feature_correlation_table, group_ratio_text, grouped_pi_mi_analysis, spearman, EvaluationReport,
    FeatureCorrelationTable, Gender, GroupedAnalysis, TargetKind,
};
use crate::error::{Error, Result};
use crate::imagefeat::{Extractor, FaceBodyAnnotation, ImageMatrix, DEFAULT_WORKING_SIZE, FEATURE_DIM};
use crate::io::{FeatureSet, Manifest, RunConfig};
use crate::pipeline::SelectionModel;
use crate::reliability::{
    aggregate_pi, icc_one_way, rating_summary, znormalize_raters, IccResult, RatingsTable,
};
use crate::svr::{loocv, FoldOutcome, SolveStatus};
use crate::synth::generate;

/// Ratings per image below which `icc` warns.
pub const MIN_RATINGS_PER_IMAGE: usize = 24;

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractFailure {
    pub image_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOutcome {
    pub features: FeatureSet,
    pub failures: Vec<ExtractFailure>,
    /// Images whose annotation carries a smile degree, which is not part
    /// of the feature vector.
    pub smile_annotated: Vec<String>,
}

#[derive(Serialize)]
struct ExtractReport<'a> {
    seed: u64,
    working_size: usize,
    images: usize,
    extracted: usize,
    failures: &'a [ExtractFailure],
    notes: Vec<String>,
}

fn extract_one(extractor: &Extractor, path: &Path, ann: Option<&Path>) -> Result<(Vec<f64>, bool)> {
    let img = ImageMatrix::load(path)?;
    let ann = match ann {
        Some(p) => FaceBodyAnnotation::load(p)?,
        None => FaceBodyAnnotation::default(),
    };
    let smile = ann.faces.iter().any(|f| f.smile_degree.is_some());
    Ok((extractor.extract(&img, &ann)?.into_values(), smile))
}

/// Extracts every manifest image in parallel. Rows keep manifest order;
/// images that fail to load or extract are reported instead.
pub fn extract_features(manifest: &Manifest, cfg: &RunConfig) -> Result<ExtractOutcome> {
    let owned;
    let extractor = if cfg.working_size == DEFAULT_WORKING_SIZE {
        Extractor::shared()
    } else {
        owned = Extractor::new(cfg.working_size)?;
        &owned
    };
    let results: Vec<Result<(Vec<f64>, bool)>> = manifest
        .rows
        .par_iter()
        .map(|r| extract_one(extractor, &r.image_path, r.annotation_path.as_deref()))
        .collect();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut failures = Vec::new();
    let mut smile_annotated = Vec::new();
    for (row, res) in manifest.rows.iter().zip(results) {
        match res {
            Ok((v, smile)) => {
                ids.push(row.image_id.clone());
                values.extend(v);
                if smile {
                    smile_annotated.push(row.image_id.clone());
                }
            }
            Err(e) => failures.push(ExtractFailure {
                image_id: row.image_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    let matrix = DMatrix::from_row_slice(ids.len(), FEATURE_DIM, &values);
    Ok(ExtractOutcome {
        features: FeatureSet::new(ids, matrix)?,
        failures,
        smile_annotated,
    })
}

/// Report notes for annotation content that the descriptor leaves out.
pub fn extract_notes(outcome: &ExtractOutcome) -> Vec<String> {
    let n = outcome.smile_annotated.len();
    if n == 0 {
        return Vec::new();
    }
    vec![format!("{n} images carry a smile_degree annotation; it is recorded but not part of the feature vector")]
}

/// `extract`: features for every manifest image, written to `out` as
/// `features.bin`, `features.csv`, `features_index.csv` and
/// `extract_report.json`.
pub fn cmd_extract(manifest: &Manifest, cfg: &RunConfig, out: &Path) -> Result<ExtractOutcome> {
    let outcome = extract_features(manifest, cfg)?;
    outcome.features.save(out)?;
    let report = ExtractReport {
        seed: cfg.seed,
        working_size: cfg.working_size,
        images: manifest.rows.len(),
        extracted: outcome.features.image_ids.len(),
        failures: &outcome.failures,
        notes: extract_notes(&outcome),
    };
    write(&out.join("extract_report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IccReport {
    pub seed: u64,
    pub icc: IccResult,
    pub min_ratings_per_image: usize,
    pub max_ratings_per_image: usize,
    pub warnings: Vec<String>,
}

impl IccReport {
    pub fn to_text(&self) -> String {
        let r = &self.icc;
        let mut s = String::new();
        let _ = writeln!(s, "One-way random-effects ICC on z-normalized ratings");
        let _ = writeln!(s, "images            {}", r.n_images);
        let _ = writeln!(s, "ratings           {}", r.n_ratings);
        let _ = writeln!(
            s,
            "ratings per image {} to {} (mean {:.2})",
            self.min_ratings_per_image, self.max_ratings_per_image, r.k_eff
        );
        let _ = writeln!(s, "MSB               {:.6}", r.msb);
        let _ = writeln!(s, "MSW               {:.6}", r.msw);
        let _ = writeln!(s, "sigma_r^2         {:.6}", r.sigma_r2);
        let _ = writeln!(s, "sigma_e^2         {:.6}", r.sigma_e2);
        let _ = writeln!(s, "ICC               {:.4} ({})", r.icc, r.band.as_str());
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IccOutcome {
    pub report: IccReport,
    pub pi_scores: Vec<(String, f64)>,
    /// The input manifest with `pi_score` filled in, when one was given.
    pub manifest: Option<Manifest>,
}

/// `icc`: reliability and perceived-intelligence scores from a ratings
/// table. Writes `icc_report.json`, `icc_report.txt`, `pi_scores.csv`,
/// `rating_summary.csv` and, with a manifest, `manifest_with_pi.csv`.
pub fn cmd_icc(table: &RatingsTable, manifest: Option<&Manifest>, seed: u64, out: &Path) -> Result<IccOutcome> {
    if let Some(m) = manifest {
        let known: HashSet<&str> = m.ids().into_iter().collect();
        if let Some(r) = table.records().iter().find(|r| !known.contains(r.image_id.as_str())) {
            return Err(Error::input(format!(
                "ratings reference image_id `{}` which is not in the manifest",
                r.image_id
            )));
        }
    }
    let table = znormalize_raters(table);
    let icc = icc_one_way(&table)?;
    let counts = table.ratings_per_image();
    let mut warnings: Vec<String> = counts
        .iter()
        .filter(|(_, c)| *c < MIN_RATINGS_PER_IMAGE)
        .map(|(id, c)| format!("image {id} has {c} ratings (fewer than {MIN_RATINGS_PER_IMAGE})"))
        .collect();
    let pi_scores = aggregate_pi(&table);
    let merged = manifest.map(|m| {
        let pi: HashMap<&str, f64> = pi_scores.iter().map(|(id, v)| (id.as_str(), *v)).collect();
        let mut m = m.clone();
        for row in &mut m.rows {
            row.pi_score = pi.get(row.image_id.as_str()).copied();
            if row.pi_score.is_none() {
                warnings.push(format!("image {} has no ratings", row.image_id));
            }
        }
        m
    });
    let report = IccReport {
        seed,
        icc,
        min_ratings_per_image: counts.iter().map(|c| c.1).min().unwrap_or(0),
        max_ratings_per_image: counts.iter().map(|c| c.1).max().unwrap_or(0),
        warnings,
    };

    ensure_dir(out)?;
    write(&out.join("icc_report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    write(&out.join("icc_report.txt"), report.to_text())?;
    let mut csv = String::from("image_id,pi_score\n");
    for (id, v) in &pi_scores {
        let _ = writeln!(csv, "{id},{v}");
    }
    write(&out.join("pi_scores.csv"), csv)?;
    let mut csv = String::from("image_id,n,median,q1,q3,lower_whisker,upper_whisker,extremes\n");
    for r in rating_summary(&table) {
        let b = &r.stats;
        let extremes: Vec<String> = b.extremes.iter().map(f64::to_string).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.image_id,
            b.n,
            b.median,
            b.q1,
            b.q3,
            b.lower_whisker,
            b.upper_whisker,
            extremes.join(";")
        );
    }
    write(&out.join("rating_summary.csv"), csv)?;
    if let Some(m) = &merged {
        m.save(&out.join("manifest_with_pi.csv"))?;
    }
    Ok(IccOutcome {
        report,
        pi_scores,
        manifest: merged,
    })
}

/// Target scores aligned with the feature rows.
pub fn target_scores(features: &FeatureSet, manifest: &Manifest, target: TargetKind) -> Result<Vec<f64>> {
    let mut missing = Vec::new();
    let mut scores = Vec::with_capacity(features.image_ids.len());
    for id in &features.image_ids {
        let row = manifest
            .get(id)
            .ok_or_else(|| Error::input(format!("feature row `{id}` is not in the manifest")))?;
        let v = match target {
            TargetKind::Mi => row.mi_score,
            TargetKind::Pi => row.pi_score,
        };
        match v {
            Some(v) => scores.push(v),
            None => missing.push(id.as_str()),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).copied().collect();
        return Err(Error::input(format!(
            "{} rows lack a {} score (first: {})",
            missing.len(),
            target.as_str(),
            shown.join(", ")
        )));
    }
    Ok(scores)
}

/// `select`: fits PCA and F-test selection on every row and writes
/// `selection_<target>.json`.
pub fn cmd_select(features: &FeatureSet, manifest: &Manifest, cfg: &RunConfig, out: &Path) -> Result<SelectionModel> {
    let y = target_scores(features, manifest, cfg.target)?;
    let n = y.len();
    if n < 3 {
        return Err(Error::input(format!("selection needs at least 3 rows, got {n}")));
    }
    let model = SelectionModel::fit(&features.matrix, &y, cfg.target, cfg.k_rule.k(n))?;
    ensure_dir(out)?;
    let name = format!("selection_{}.json", cfg.target.as_str().to_lowercase());
    model.save(&out.join(name))?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutcome {
    pub report: EvaluationReport,
    pub folds: Vec<FoldOutcome>,
    pub correlations: Option<FeatureCorrelationTable>,
}

impl EvaluateOutcome {
    pub fn has_failures(&self) -> bool {
        !self.report.failed_folds.is_empty()
    }
}

/// Seeded permutation used by the shuffled-target control.
pub fn shuffled(values: &[f64], seed: u64) -> Vec<f64> {
    let mut v = values.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5348_5546_4c45));
    v
}

/// Leave-one-out evaluation of one target without writing files.
pub fn evaluate(features: &FeatureSet, manifest: &Manifest, cfg: &RunConfig) -> Result<EvaluateOutcome> {
    let mut y = target_scores(features, manifest, cfg.target)?;
    if y.len() < 3 {
        return Err(Error::input(format!("evaluation needs at least 3 rows, got {}", y.len())));
    }
    if cfg.shuffle_target {
        y = shuffled(&y, cfg.seed);
    }
    let result = loocv(&features.matrix, &y, &cfg.eval_config())?;

    let ok: Vec<usize> = (0..y.len()).filter(|&i| result.predictions[i].is_some()).collect();
    if ok.len() < 3 {
        return Err(Error::analysis(format!(
            "only {} of {} folds produced a prediction",
            ok.len(),
            y.len()
        )));
    }
    let mut report = EvaluationReport::new(
        cfg.target,
        cfg.seed,
        ok.iter().map(|&i| features.image_ids[i].clone()).collect(),
        ok.iter().map(|&i| y[i]).collect(),
        ok.iter().map(|&i| result.predictions[i].expect("filtered")).collect(),
        cfg.baseline_runs,
    )?;
    report.shuffled_target = cfg.shuffle_target;
    report.failed_folds = result
        .failed()
        .iter()
        .map(|f| {
            format!(
                "{}: {}",
                features.image_ids[f.held_out],
                f.error.as_deref().unwrap_or("unknown")
            )
        })
        .collect();
    let capped = result
        .folds
        .iter()
        .filter(|f| f.status == Some(SolveStatus::ConvergedWithWarning))
        .count();
    if capped > 0 {
        report
            .warnings
            .push(format!("{capped} folds stopped at the solver iteration cap"));
    }
    let fallback = result.folds.iter().filter(|f| f.selection_fallback).count();
    if fallback > 0 {
        report
            .warnings
            .push(format!("{fallback} folds used the score-only selection fallback"));
    }
    if cfg.target == TargetKind::Mi && !cfg.shuffle_target {
        if let Ok(pi) = target_scores(features, manifest, TargetKind::Pi) {
            report.human = Some(spearman(&pi, &y)?);
        }
    }

    let correlations = if features.matrix.ncols() == FEATURE_DIM {
        let (mi, pi) = match cfg.target {
            TargetKind::Mi => (Some(y.as_slice()), None),
            TargetKind::Pi => (None, Some(y.as_slice())),
        };
        let table = feature_correlation_table(&features.matrix, mi, pi)?;
        report.group_ratios = Some(table.groups.clone());
        Some(table)
    } else {
        report
            .warnings
            .push(format!("feature width {} is not the full descriptor; correlation table skipped", features.matrix.ncols()));
        None
    };
    Ok(EvaluateOutcome {
        report,
        folds: result.folds,
        correlations,
    })
}

/// `evaluate`: leave-one-out SVR with baselines. Writes
/// `evaluation_<t>.json`, `evaluation_<t>.txt`, `predictions_<t>.csv`,
/// `folds_<t>.json` and `feature_correlations_<t>.csv`.
pub fn cmd_evaluate(features: &FeatureSet, manifest: &Manifest, cfg: &RunConfig, out: &Path) -> Result<EvaluateOutcome> {
    let outcome = evaluate(features, manifest, cfg)?;
    let t = cfg.target.as_str().to_lowercase();
    let r = &outcome.report;
    ensure_dir(out)?;
    write(&out.join(format!("evaluation_{t}.json")), r.to_json()?)?;
    write(&out.join(format!("evaluation_{t}.txt")), r.to_text())?;
    let mut csv = String::from("image_id,actual,predicted\n");
    for ((id, a), p) in r.image_ids.iter().zip(&r.actual).zip(&r.predictions) {
        let _ = writeln!(csv, "{id},{a},{p}");
    }
    write(&out.join(format!("predictions_{t}.csv")), csv)?;
    write(
        &out.join(format!("folds_{t}.json")),
        serde_json::to_string_pretty(&outcome.folds)? + "\n",
    )?;
    if let Some(table) = &outcome.correlations {
        write(&out.join(format!("feature_correlations_{t}.csv")), table.to_csv())?;
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeOutcome {
    pub correlations: Option<FeatureCorrelationTable>,
    pub grouped: Option<GroupedAnalysis>,
    pub warnings: Vec<String>,
}

/// Reads rater-subset PI scores: CSV `image_id,group,pi_score`.
pub fn load_pi_splits(path: &Path) -> Result<Vec<(String, HashMap<String, f64>)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut groups: Vec<(String, HashMap<String, f64>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::input(format!("{}: line {line}: {e}", path.display())))?;
        let (id, group, score) = match (rec.get(0), rec.get(1), rec.get(2)) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::input(format!("{}: line {line}: expected image_id,group,pi_score", path.display()))),
        };
        let v: f64 = score
            .parse()
            .map_err(|_| Error::input(format!("{}: line {line}: `{score}` is not a number", path.display())))?;
        let slot = match groups.iter().position(|(g, _)| g == group) {
            Some(s) => s,
            None => {
                groups.push((group.to_string(), HashMap::new()));
                groups.len() - 1
            }
        };
        groups[slot].1.insert(id.to_string(), v);
    }
    Ok(groups)
}

impl AnalyzeOutcome {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(t) = &self.correlations {
            s.push_str(&group_ratio_text(&t.groups));
            s.push('\n');
        }
        if let Some(g) = &self.grouped {
            let _ = writeln!(s, "MI ~ intercept + PI + age");
            let _ = writeln!(s, "{:<14} {:>4} {:>10} {:>10} {:>10} {:>10} {:>8}", "users", "n", "PI coef", "PI p", "age coef", "age p", "R^2");
            for r in &g.regressions {
                let c = |name: &str| r.fit.coefficient(name).map(|c| (c.estimate, c.p)).unwrap_or((f64::NAN, f64::NAN));
                let (pi, pp) = c("pi");
                let (age, ap) = c("age");
                let _ = writeln!(
                    s,
                    "{:<14} {:>4} {:>10.4} {:>10.3e} {:>10.4} {:>10.3e} {:>8.4}",
                    r.user_group, r.n, pi, pp, age, ap, r.fit.r_squared
                );
            }
            let _ = writeln!(s, "\nSpearman rho between PI and MI");
            let _ = writeln!(s, "{:<14} {:>16} {:>16} {:>16}", "raters", "male users", "female users", "together");
            let cell = |sp: Option<&crate::analysis::Spearman>| {
                sp.map_or_else(|| "--".to_string(), |sp| format!("{:.4} (p={:.3})", sp.rho, sp.p))
            };
            for row in &g.correlations {
                let _ = writeln!(
                    s,
                    "{:<14} {:>16} {:>16} {:>16}",
                    row.rater_group,
                    cell(row.male_users.as_ref()),
                    cell(row.female_users.as_ref()),
                    cell(Some(&row.together))
                );
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

/// `analyze`: per-feature correlation table against MI and PI, and the
/// grouped PI/MI regression. Writes `feature_correlations.csv`,
/// `analysis.json` and `analysis.txt`.
pub fn cmd_analyze(
    features: Option<&FeatureSet>,
    manifest: &Manifest,
    pi_splits: &[(String, HashMap<String, f64>)],
    out: &Path,
) -> Result<AnalyzeOutcome> {
    let mut warnings = Vec::new();
    let correlations = match features {
        Some(f) => {
            let mi = target_scores(f, manifest, TargetKind::Mi);
            let pi = target_scores(f, manifest, TargetKind::Pi);
            for (label, r) in [("MI", &mi), ("PI", &pi)] {
                if let Err(e) = r {
                    warnings.push(format!("{label} correlations skipped: {e}"));
                }
            }
            if mi.is_err() && pi.is_err() {
                None
            } else {
                Some(feature_correlation_table(&f.matrix, mi.as_deref().ok(), pi.as_deref().ok())?)
            }
        }
        None => None,
    };

    let rows: Vec<_> = manifest
        .rows
        .iter()
        .filter(|r| r.mi_score.is_some() && r.pi_score.is_some() && r.age.is_some())
        .collect();
    let grouped = if rows.len() >= 4 {
        let mi: Vec<f64> = rows.iter().map(|r| r.mi_score.expect("filtered")).collect();
        let pi: Vec<f64> = rows.iter().map(|r| r.pi_score.expect("filtered")).collect();
        let age: Vec<f64> = rows.iter().map(|r| r.age.expect("filtered")).collect();
        let gender: Vec<Gender> = rows.iter().map(|r| r.gender).collect();
        let mut splits = Vec::new();
        for (name, scores) in pi_splits {
            let v: Option<Vec<f64>> = rows.iter().map(|r| scores.get(&r.image_id).copied()).collect();
            match v {
                Some(v) => splits.push((name.clone(), v)),
                None => warnings.push(format!("rater group `{name}` lacks scores for some images; skipped")),
            }
        }
        Some(grouped_pi_mi_analysis(&mi, &pi, &gender, &age, &splits)?)
    } else {
        warnings.push(format!(
            "grouped analysis skipped: {} images have MI, PI and age (need 4)",
            rows.len()
        ));
        None
    };
    if correlations.is_none() && grouped.is_none() {
        return Err(Error::input(format!("nothing to analyze: {}", warnings.join("; "))));
    }
    let outcome = AnalyzeOutcome {
        correlations,
        grouped,
        warnings,
    };
    ensure_dir(out)?;
    if let Some(t) = &outcome.correlations {
        write(&out.join("feature_correlations.csv"), t.to_csv())?;
    }
    write(&out.join("analysis.json"), serde_json::to_string_pretty(&outcome)? + "\n")?;
    write(&out.join("analysis.txt"), outcome.to_text())?;
    Ok(outcome)
}

/// `synth`: renders a seeded synthetic corpus into `out`: `images/*.png`,
/// `annotations/*.json`, `manifest.csv`, `ratings.csv` and `truth.csv`
/// (planted brightness and MI per image).
pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let sc = cfg.synth_config();
    let corpus = generate(&sc)?;
    ensure_dir(out)?;
    let out = &fs::canonicalize(out).map_err(|e| Error::io(out, e))?;
    let (img_dir, ann_dir) = (out.join("images"), out.join("annotations"));
    ensure_dir(&img_dir)?;
    ensure_dir(&ann_dir)?;
    let mut rows = Vec::new();
    let mut truth = String::from("image_id,brightness,mi_score\n");
    for s in &corpus.images {
        let img_path = img_dir.join(format!("{}.png", s.id));
        s.image
            .to_rgb8()
            .save(&img_path)
            .map_err(|e| Error::input(format!("{}: {e}", img_path.display())))?;
        let ann_path = ann_dir.join(format!("{}.json", s.id));
        write(&ann_path, serde_json::to_string_pretty(&s.annotation)? + "\n")?;
        let _ = writeln!(truth, "{},{},{}", s.id, s.brightness, s.mi_score);
        rows.push(crate::io::ManifestRow {
            image_id: s.id.clone(),
            image_path: img_path,
            gender: s.gender,
            age: Some(s.age),
            mi_score: Some(s.mi_score),
            annotation_path: Some(ann_path),
            pi_score: None,
        });
    }
    let manifest = Manifest::new(rows)?;
    manifest.save(&out.join("manifest.csv"))?;
    let mut ratings = String::from("rater_id,image_id,score\n");
    for r in &corpus.ratings {
        let _ = writeln!(ratings, "{},{},{}", r.rater_id, r.image_id, r.raw_score);
    }
    write(&out.join("ratings.csv"), ratings)?;
    write(&out.join("truth.csv"), truth)?;
    write(&out.join("synth_config.json"), serde_json::to_string_pretty(&sc)? + "\n")?;
    Ok(manifest)
}
