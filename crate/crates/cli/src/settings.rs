//! Config and seed resolution shared by the subcommands.
//!
//! Precedence, highest first: command-line flags, `RADSIM_SEED`, the config
//! file, the preset.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use radsim_core::{Exec, RadarConfig};

pub const SEED_ENV: &str = "RADSIM_SEED";

#[derive(Debug, Clone, Args)]
pub struct RadarArgs {
    /// Radar preset: desk-small or raddet-ti.
    #[arg(long, default_value = "desk-small")]
    pub preset: String,
    /// TOML radar config; replaces the preset entirely.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl RadarArgs {
    pub fn resolve(&self, seed_flag: Option<u64>) -> Result<RadarConfig> {
        let mut cfg = match &self.config {
            Some(path) => RadarConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
            None => RadarConfig::from_preset_name(&self.preset)?,
        };
        if let Some(seed) = env_seed()? {
            cfg.rng_seed = seed;
        }
        if let Some(seed) = seed_flag {
            cfg.rng_seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        _ => Ok(None),
    }
}

pub fn exec(parallel: bool) -> Exec {
    if parallel {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

pub fn write_json<T: serde::Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
