//! Feature matrices on disk: a little-endian binary cache, a CSV copy and a
//! row index naming the image behind each row.
//!
//! Binary layout: `b"PIQF"`, `u32` version, `u64` rows, `u64` columns, then
//! `rows * columns` `f64` values in row-major order.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::imagefeat::feature_schema;

pub const CACHE_MAGIC: [u8; 4] = *b"PIQF";
pub const CACHE_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

pub const CACHE_FILE: &str = "features.bin";
pub const CSV_FILE: &str = "features.csv";
pub const INDEX_FILE: &str = "features_index.csv";

pub fn encode_matrix(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.len());
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER_LEN || bytes[..4] != CACHE_MAGIC {
        return Err(Error::input("not a feature cache (bad magic)"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != CACHE_VERSION {
        return Err(Error::input(format!(
            "feature cache version {version}, expected {CACHE_VERSION}"
        )));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
    let want = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::input("feature cache dimensions overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != want {
        return Err(Error::input(format!(
            "feature cache holds {} bytes of values, expected {want} for {rows}x{cols}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    Ok(DMatrix::from_row_iterator(rows, cols, values))
}

/// Feature rows with the image each row came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub image_ids: Vec<String>,
    pub matrix: DMatrix<f64>,
}

impl FeatureSet {
    pub fn new(image_ids: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        if image_ids.len() != matrix.nrows() {
            return Err(Error::input(format!(
                "{} image ids for {} feature rows",
                image_ids.len(),
                matrix.nrows()
            )));
        }
        Ok(FeatureSet { image_ids, matrix })
    }

    /// Writes the binary cache, the CSV copy and the row index into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let bin = dir.join(CACHE_FILE);
        fs::write(&bin, encode_matrix(&self.matrix)).map_err(|e| Error::io(&bin, e))?;
        let csv_path = dir.join(CSV_FILE);
        fs::write(&csv_path, self.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
        let index = dir.join(INDEX_FILE);
        let mut text = String::from("row,image_id\n");
        for (i, id) in self.image_ids.iter().enumerate() {
            text.push_str(&format!("{i},{}\n", csv_field(id)));
        }
        fs::write(&index, text).map_err(|e| Error::io(&index, e))
    }

    /// Reads the binary cache and row index from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let bin = dir.join(CACHE_FILE);
        let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        let matrix = decode_matrix(&bytes).map_err(|e| prefix(&bin, e))?;
        let index = dir.join(INDEX_FILE);
        let file = fs::File::open(&index).map_err(|e| Error::io(&index, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let mut ids = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::input(format!("{}: {e}", index.display())))?;
            let row: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::input(format!("{}: line {}: bad row number", index.display(), i + 2))
            })?;
            if row != i {
                return Err(Error::input(format!(
                    "{}: line {}: rows out of order",
                    index.display(),
                    i + 2
                )));
            }
            ids.push(rec.get(1).unwrap_or_default().to_string());
        }
        FeatureSet::new(ids, matrix).map_err(|e| prefix(dir, e))
    }

    /// CSV with an `image_id` column followed by one column per feature.
    pub fn to_csv(&self) -> Result<String> {
        let names = column_names(self.matrix.ncols());
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once("image_id").chain(names.iter().map(String::as_str));
        wtr.write_record(header).map_err(csv_err)?;
        for (i, id) in self.image_ids.iter().enumerate() {
            let row: Vec<String> = std::iter::once(id.clone())
                .chain(self.matrix.row(i).iter().map(|v| v.to_string()))
                .collect();
            wtr.write_record(&row).map_err(csv_err)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let cols = rdr.headers().map_err(csv_err)?.len().saturating_sub(1);
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::input(format!("line {line}: {e}")))?;
            ids.push(rec[0].to_string());
            for field in rec.iter().skip(1) {
                values.push(field.parse::<f64>().map_err(|_| {
                    Error::input(format!("line {line}: `{field}` is not a number"))
                })?);
            }
        }
        let matrix = DMatrix::from_row_slice(ids.len(), cols, &values);
        FeatureSet::new(ids, matrix)
    }

    pub fn row_of(&self, image_id: &str) -> Option<usize> {
        self.image_ids.iter().position(|id| id == image_id)
    }
}

/// Schema names when the width matches the full descriptor, `f0..` otherwise.
fn column_names(cols: usize) -> Vec<String> {
    let schema = feature_schema();
    if cols == schema.len() {
        schema.iter().map(|l| l.name.clone()).collect()
    } else {
        (0..cols).map(|j| format!("f{j}")).collect()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::input(e.to_string())
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    }
}
