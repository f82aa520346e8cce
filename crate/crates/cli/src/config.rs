//! Optional TOML configuration. Every field is a default that the
//! matching flag overrides.
//!
//! ```toml
//! R = 3
//! bisect_tol = 1e-9
//! horizon = 19
//! seed = 7
//! instances = ["e1.mmlp"]
//! output_dir = "out"
//!
//! [sweep]
//! count = 100
//! agents = 20
//! delta_i = 3
//! delta_k = 3
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "R")]
    pub period: Option<usize>,
    pub bisect_tol: Option<f64>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub count: usize,
    pub agents: usize,
    pub delta_i: usize,
    pub delta_k: usize,
    pub normalized: bool,
    pub tree: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            count: 0,
            agents: 16,
            delta_i: 3,
            delta_k: 3,
            normalized: false,
            tree: false,
        }
    }
}

impl Config {
    /// Reads the file; relative instance paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Config =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in config
            .instances
            .iter_mut()
            .chain(config.output_dir.iter_mut())
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(missing) = config.instances.iter().find(|p| !p.exists()) {
            bail!(
                "instance {} listed in the config does not exist",
                missing.display()
            );
        }
        Ok(config)
    }
}
