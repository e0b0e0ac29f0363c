//! Run configuration: seed, sample count, dimensions, tolerance overrides
//! and output directory. Flags override the config file, which overrides
//! `QTRADE_SEED`, which overrides the defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qtrade_core::Tolerances;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const MIN_SAMPLES: usize = 1_000;
pub const DIM_RANGE: std::ops::RangeInclusive<usize> = 2..=8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub d: Vec<usize>,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            d: vec![2, 3, 4],
            tolerances: Tolerances::default(),
            out_dir: PathBuf::from("."),
        }
    }
}

/// Config file contents. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    samples: Option<usize>,
    d: Option<Vec<usize>>,
    tolerances: Option<Tolerances>,
    out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            bail!("samples must be at least {MIN_SAMPLES}, got {}", self.samples);
        }
        if self.d.is_empty() {
            bail!("dimension list is empty");
        }
        if let Some(d) = self.d.iter().find(|d| !DIM_RANGE.contains(d)) {
            bail!("dimension {d} outside [2, 8]");
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("herm", t.herm),
            ("tr", t.tr),
            ("psd", t.psd),
            ("eig", t.eig),
            ("opt", t.opt),
            ("region", t.region),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                bail!("tolerance {name} must be a non-negative number");
            }
        }
        Ok(())
    }
}

/// Seed from `QTRADE_SEED`, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var("QTRADE_SEED") {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("QTRADE_SEED={s:?} is not a u64"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("QTRADE_SEED: {e}"),
    }
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub d: Option<Vec<usize>>,
    pub out_dir: Option<PathBuf>,
}

pub fn resolve(config: Option<&Path>, flags: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(seed) = env_seed()? {
        cfg.seed = seed;
    }
    if let Some(path) = config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: FileConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.seed = file.seed.unwrap_or(cfg.seed);
        cfg.samples = file.samples.unwrap_or(cfg.samples);
        cfg.d = file.d.unwrap_or(cfg.d);
        cfg.tolerances = file.tolerances.unwrap_or(cfg.tolerances);
        cfg.out_dir = file.out_dir.unwrap_or(cfg.out_dir);
    }
    cfg.seed = flags.seed.unwrap_or(cfg.seed);
    cfg.samples = flags.samples.unwrap_or(cfg.samples);
    if let Some(d) = &flags.d {
        cfg.d = d.clone();
    }
    if let Some(dir) = &flags.out_dir {
        cfg.out_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}
