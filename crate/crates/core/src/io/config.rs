//! Run configuration as flat `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `seed` | unsigned integer | `0` |
//! | `target` | `mi` or `pi` | `mi` |
//! | `working_size` | pixels, multiple of 32, at least 64 | `256` |
//! | `block_grid` | blocks per side (only `4`) | `4` |
//! | `k_rule` | `half` or a fixed count | `half` |
//! | `kernel` | `rbf` or `linear` | `rbf` |
//! | `svr_c` | comma-separated list | `0.1,1,10,100` |
//! | `svr_epsilon` | comma-separated list | `0.01,0.1,1` |
//! | `svr_gamma_factors` | comma-separated multiples of `1/d` | `0.25,1,4` |
//! | `inner_folds` | integer at least 2 | `5` |
//! | `baseline_runs` | integer at least 1 | `10` |
//! | `strict` | `true` or `false` | `false` |
//! | `shuffle_target` | `true` or `false` | `false` |
//! | `out` | output directory | `out` |
//! | `synth_images` | synthetic corpus size | `20` |
//! | `synth_size` | synthetic image side in pixels | `160` |
//! | `synth_snr` | signal to noise amplitude ratio | `4` |
//! | `synth_raters` | ratings per synthetic image | `24` |
//! | `synth_jitter` | layout perturbation | `0.05` |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::TargetKind;
use crate::error::{Error, Result};
use crate::imagefeat::{Extractor, DEFAULT_WORKING_SIZE};
use crate::svr::{EvalConfig, GridSpec, KRule, KernelKind};
use crate::synth::SynthConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub target: TargetKind,
    pub working_size: usize,
    pub block_grid: usize,
    pub k_rule: KRule,
    pub grid: GridSpec,
    pub inner_folds: usize,
    pub baseline_runs: usize,
    pub strict: bool,
    pub shuffle_target: bool,
    pub out: PathBuf,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            target: TargetKind::Mi,
            working_size: DEFAULT_WORKING_SIZE,
            block_grid: 4,
            k_rule: KRule::HalfTraining,
            grid: GridSpec::default(),
            inner_folds: 5,
            baseline_runs: 10,
            strict: false,
            shuffle_target: false,
            out: PathBuf::from("out"),
            synth: SynthConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::input(format!("{key}: cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::input(format!("{key}: expected true or false, got `{value}`"))),
    }
}

fn list_text(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::input(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::input(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            cfg.set(key, value.trim())
                .map_err(|e| Error::input(format!("line {}: {}", i + 1, strip(e))))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::input(format!("{}: {}", path.display(), strip(e))))
    }

    /// Sets one key; used by the parser and for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "target" => self.target = value.parse()?,
            "working_size" => self.working_size = parse(key, value)?,
            "block_grid" => self.block_grid = parse(key, value)?,
            "k_rule" => {
                self.k_rule = match value {
                    "half" => KRule::HalfTraining,
                    v => KRule::Fixed(parse(key, v)?),
                }
            }
            "kernel" => {
                self.grid.kernel = match value {
                    "rbf" => KernelKind::Rbf,
                    "linear" => KernelKind::Linear,
                    v => return Err(Error::input(format!("kernel: expected rbf or linear, got `{v}`"))),
                }
            }
            "svr_c" => self.grid.c = parse_list(key, value)?,
            "svr_epsilon" => self.grid.epsilon = parse_list(key, value)?,
            "svr_gamma_factors" => self.grid.gamma_factors = parse_list(key, value)?,
            "inner_folds" => self.inner_folds = parse(key, value)?,
            "baseline_runs" => self.baseline_runs = parse(key, value)?,
            "strict" => self.strict = parse_bool(key, value)?,
            "shuffle_target" => self.shuffle_target = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "synth_images" => self.synth.n_images = parse(key, value)?,
            "synth_size" => {
                let side: usize = parse(key, value)?;
                self.synth.width = side;
                self.synth.height = side;
            }
            "synth_snr" => self.synth.snr = parse(key, value)?,
            "synth_raters" => self.synth.raters_per_image = parse(key, value)?,
            "synth_jitter" => self.synth.layout_jitter = parse(key, value)?,
            other => return Err(Error::input(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Extractor::new(self.working_size)?;
        if self.block_grid != 4 {
            return Err(Error::input(format!("block_grid {} unsupported (only 4)", self.block_grid)));
        }
        self.grid.validate()?;
        if self.inner_folds < 2 {
            return Err(Error::input("inner_folds must be at least 2"));
        }
        if self.baseline_runs == 0 {
            return Err(Error::input("baseline_runs must be at least 1"));
        }
        if let KRule::Fixed(0) = self.k_rule {
            return Err(Error::input("k_rule must select at least one component"));
        }
        let s = &self.synth;
        if s.n_images == 0 || s.width < 32 || s.raters_per_image == 0 {
            return Err(Error::input("synthetic corpus needs images, raters and a side of at least 32"));
        }
        if !(s.snr > 0.0 && s.snr.is_finite()) || !(s.layout_jitter >= 0.0 && s.layout_jitter.is_finite()) {
            return Err(Error::input("synth_snr must be positive and synth_jitter non-negative"));
        }
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            target: self.target,
            k_rule: self.k_rule,
            grid: self.grid.clone(),
            inner_folds: self.inner_folds,
            seed: self.seed,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            ..self.synth.clone()
        }
    }

    /// Canonical text form; parsing it yields the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let k = match self.k_rule {
            KRule::HalfTraining => "half".to_string(),
            KRule::Fixed(k) => k.to_string(),
        };
        let kernel = match self.grid.kernel {
            KernelKind::Rbf => "rbf",
            KernelKind::Linear => "linear",
        };
        let pairs = [
            ("seed", self.seed.to_string()),
            ("target", self.target.as_str().to_lowercase()),
            ("working_size", self.working_size.to_string()),
            ("block_grid", self.block_grid.to_string()),
            ("k_rule", k),
            ("kernel", kernel.to_string()),
            ("svr_c", list_text(&self.grid.c)),
            ("svr_epsilon", list_text(&self.grid.epsilon)),
            ("svr_gamma_factors", list_text(&self.grid.gamma_factors)),
            ("inner_folds", self.inner_folds.to_string()),
            ("baseline_runs", self.baseline_runs.to_string()),
            ("strict", self.strict.to_string()),
            ("shuffle_target", self.shuffle_target.to_string()),
            ("out", self.out.display().to_string()),
            ("synth_images", self.synth.n_images.to_string()),
            ("synth_size", self.synth.width.to_string()),
            ("synth_snr", self.synth.snr.to_string()),
            ("synth_raters", self.synth.raters_per_image.to_string()),
            ("synth_jitter", self.synth.layout_jitter.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Input(m) => m,
        other => other.to_string(),
    }
}
