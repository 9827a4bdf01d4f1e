//! Dataset manifest: one row per profile image with demographics and
//! optional scores.
//!
//! CSV columns: `image_id,image_path,gender,age,mi_score,annotation_path,pi_score`.
//! Only the first two are required; empty cells mean "absent". Relative
//! paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::Gender;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub image_id: String,
    pub image_path: PathBuf,
    pub gender: Gender,
    pub age: Option<f64>,
    pub mi_score: Option<f64>,
    pub annotation_path: Option<PathBuf>,
    pub pi_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

const COLUMNS: [&str; 7] = [
    "image_id",
    "image_path",
    "gender",
    "age",
    "mi_score",
    "annotation_path",
    "pi_score",
];

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        let m = Manifest { rows };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.rows {
            if r.image_id.is_empty() {
                return Err(Error::input("manifest row with empty image_id"));
            }
            if !seen.insert(r.image_id.as_str()) {
                return Err(Error::input(format!("duplicate image_id `{}`", r.image_id)));
            }
            if let Some(a) = r.age {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::input(format!("image `{}`: age must be positive", r.image_id)));
                }
            }
            for (name, v) in [("mi_score", r.mi_score), ("pi_score", r.pi_score)] {
                if v.is_some_and(|v| !v.is_finite()) {
                    return Err(Error::input(format!("image `{}`: {name} is not finite", r.image_id)));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let base = fs::canonicalize(parent).unwrap_or_else(|_| parent.to_path_buf());
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses manifest CSV text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::input(e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (id_col, path_col) = match (col("image_id"), col("image_path")) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::input("manifest needs image_id and image_path columns")),
        };
        let [gender_col, age_col, mi_col, ann_col, pi_col] =
            ["gender", "age", "mi_score", "annotation_path", "pi_score"].map(col);
        let resolve = |p: &str| {
            let p = Path::new(p);
            if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
        };

        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::input(format!("line {line}: {e}")))?;
            let cell = |c: Option<usize>| c.and_then(|c| rec.get(c)).filter(|s| !s.is_empty());
            let number = |c: Option<usize>, name: &str| -> Result<Option<f64>> {
                cell(c)
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| Error::input(format!("line {line}: {name} `{s}` is not a number")))
                    })
                    .transpose()
            };
            let image_id = cell(Some(id_col))
                .ok_or_else(|| Error::input(format!("line {line}: missing image_id")))?
                .to_string();
            let image_path = cell(Some(path_col))
                .map(resolve)
                .ok_or_else(|| Error::input(format!("line {line}: missing image_path")))?;
            let gender = match cell(gender_col) {
                Some(g) => g
                    .parse()
                    .map_err(|_| Error::input(format!("line {line}: gender `{g}` is not M, F or unknown")))?,
                None => Gender::Unknown,
            };
            rows.push(ManifestRow {
                image_id,
                image_path,
                gender,
                age: number(age_col, "age")?,
                mi_score: number(mi_col, "mi_score")?,
                annotation_path: cell(ann_col).map(resolve),
                pi_score: number(pi_col, "pi_score")?,
            });
        }
        Manifest::new(rows)
    }

    /// CSV text with every column. Paths inside `base` are written relative
    /// to it.
    pub fn to_csv(&self, base: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(COLUMNS).expect("in-memory write");
        for r in &self.rows {
            wtr.write_record([
                r.image_id.clone(),
                rel(&r.image_path),
                r.gender.to_string(),
                opt(r.age),
                opt(r.mi_score),
                r.annotation_path.as_deref().map(rel).unwrap_or_default(),
                opt(r.pi_score),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let base = fs::canonicalize(parent).unwrap_or_else(|_| parent.to_path_buf());
        fs::write(path, self.to_csv(&base)).map_err(|e| Error::io(path, e))
    }

    pub fn get(&self, image_id: &str) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.image_id == image_id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.image_id.as_str()).collect()
    }
}
