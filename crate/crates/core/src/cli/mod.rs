//! The `profileiq` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 analysis error, 3 partial failure
//! under `--strict`.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::*;

use crate::analysis::TargetKind;
use crate::error::{Error, Result};
use crate::io::{FeatureSet, Manifest, RunConfig};
use crate::reliability::RatingsTable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "profileiq", version, about = "Profile-image intelligence estimation pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Dataset manifest CSV.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Ratings CSV (`rater_id,image_id,score`).
    #[arg(long, global = true)]
    pub ratings: Option<PathBuf>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory holding `features.bin` (defaults to the output directory).
    #[arg(long, global = true)]
    pub features: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exit with code 3 when any image or fold fails.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, value_parser = parse_target)]
    pub target: Option<TargetKind>,
    /// Permute the target before evaluation (leakage control).
    #[arg(long, global = true)]
    pub shuffle_target: bool,
    /// Rater-subset PI scores for `analyze` (`image_id,group,pi_score`).
    #[arg(long, global = true)]
    pub pi_splits: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Extract the 4111-dimensional descriptor for every manifest image.
    Extract,
    /// Rater reliability and perceived-intelligence scores.
    Icc,
    /// Fit PCA and F-test feature selection on all rows.
    Select,
    /// Leave-one-out SVR evaluation with baselines.
    Evaluate,
    /// Feature correlation tables and grouped PI/MI regression.
    Analyze,
    /// Render a synthetic corpus with planted scores.
    Synth,
}

fn parse_target(s: &str) -> std::result::Result<TargetKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Cli {
    /// Config file (if any) with command-line overrides applied, validated.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.target {
            cfg.target = t;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.strict |= self.strict;
        cfg.shuffle_target |= self.shuffle_target;
        cfg.validate()?;
        Ok(cfg)
    }

    fn manifest(&self) -> Result<Manifest> {
        let path = self
            .manifest
            .as_deref()
            .ok_or_else(|| Error::input("--manifest is required"))?;
        Manifest::load(path)
    }

    fn feature_dir<'a>(&'a self, cfg: &'a RunConfig) -> &'a Path {
        self.features.as_deref().unwrap_or(&cfg.out)
    }

    /// Manifest with PI merged in from `--ratings` when the target needs it
    /// and the manifest lacks it.
    fn manifest_with_pi(&self, cfg: &RunConfig) -> Result<Manifest> {
        let manifest = self.manifest()?;
        let has_pi = manifest.rows.iter().all(|r| r.pi_score.is_some());
        match (&self.ratings, has_pi) {
            (Some(path), false) => {
                let table = RatingsTable::load(path)?;
                let dir = cfg.out.join("icc");
                Ok(cmd_icc(&table, Some(&manifest), cfg.seed, &dir)?
                    .manifest
                    .expect("manifest was supplied"))
            }
            _ => Ok(manifest),
        }
    }
}

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() { 1 } else { EXIT_OK }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = cli.run_config()?;
    let out = cfg.out.clone();
    match cli.command {
        Command::Extract => {
            let manifest = cli.manifest()?;
            let o = cmd_extract(&manifest, &cfg, &out)?;
            println!(
                "extracted {} of {} images into {}",
                o.features.image_ids.len(),
                manifest.rows.len(),
                out.display()
            );
            for f in &o.failures {
                eprintln!("warning: {}: {}", f.image_id, f.error);
            }
            for note in extract_notes(&o) {
                println!("note: {note}");
            }
            Ok(partial(cfg.strict, !o.failures.is_empty()))
        }
        Command::Icc => {
            let path = cli
                .ratings
                .as_deref()
                .ok_or_else(|| Error::input("--ratings is required"))?;
            let table = RatingsTable::load(path)?;
            let manifest = match &cli.manifest {
                Some(p) => Some(Manifest::load(p)?),
                None => None,
            };
            let o = cmd_icc(&table, manifest.as_ref(), cfg.seed, &out)?;
            print!("{}", o.report.to_text());
            Ok(EXIT_OK)
        }
        Command::Select => {
            let manifest = cli.manifest_with_pi(&cfg)?;
            let features = FeatureSet::load(cli.feature_dir(&cfg))?;
            let m = cmd_select(&features, &manifest, &cfg, &out)?;
            println!(
                "selected {} of {} components for {}",
                m.selection.selected.len(),
                m.pca.n_components(),
                cfg.target.as_str()
            );
            Ok(EXIT_OK)
        }
        Command::Evaluate => {
            let manifest = cli.manifest_with_pi(&cfg)?;
            let features = FeatureSet::load(cli.feature_dir(&cfg))?;
            let o = cmd_evaluate(&features, &manifest, &cfg, &out)?;
            print!("{}", o.report.to_text());
            Ok(partial(cfg.strict, o.has_failures()))
        }
        Command::Analyze => {
            let manifest = cli.manifest_with_pi(&cfg)?;
            let dir = cli.feature_dir(&cfg);
            let features = if dir.join(crate::io::CACHE_FILE).exists() {
                Some(FeatureSet::load(dir)?)
            } else {
                None
            };
            let splits = match &cli.pi_splits {
                Some(p) => load_pi_splits(p)?,
                None => Vec::new(),
            };
            let o = cmd_analyze(features.as_ref(), &manifest, &splits, &out)?;
            print!("{}", o.to_text());
            Ok(EXIT_OK)
        }
        Command::Synth => {
            let m = cmd_synth(&cfg, &out)?;
            println!("wrote {} synthetic images to {}", m.rows.len(), out.display());
            Ok(EXIT_OK)
        }
    }
}

fn partial(strict: bool, failed: bool) -> i32 {
    if strict && failed { EXIT_PARTIAL } else { EXIT_OK }
}
