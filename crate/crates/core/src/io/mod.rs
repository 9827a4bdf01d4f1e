//! Files the command-line workflow reads and writes.

mod cache;
mod config;
mod manifest;

pub use cache::{decode_matrix, encode_matrix, FeatureSet, CACHE_FILE, CACHE_MAGIC, CACHE_VERSION, CSV_FILE, INDEX_FILE};
pub use config::RunConfig;
pub use manifest::{Manifest, ManifestRow};
