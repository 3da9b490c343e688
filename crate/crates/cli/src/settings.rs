//! Option merging: a TOML config file supplies defaults, flags override it,
//! and each command validates the result in one pass.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use lmlds::gaussian_lds::{CovarianceMode, EmOptions};
use lmlds::tensor_core::TransformKind;

use crate::CliError;

/// Every option any command understands. Config files use the same keys in
/// snake_case.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub data: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub transform: Option<String>,
    pub mode: Option<String>,
    pub latent_dim: Option<usize>,
    pub param_budget: Option<u64>,
    pub train_len: Option<usize>,
    pub test_len: Option<usize>,
    pub horizon: Option<usize>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub overwrite: bool,
    pub variants: Option<Vec<String>>,
    pub sizes: Option<Vec<String>>,
    pub worker_sweep: Option<Vec<usize>>,
    pub rows: Option<usize>,
    pub tubes: Option<usize>,
    pub length: Option<usize>,
    pub rho: Option<f64>,
    pub noise_scale: Option<f64>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $(if $src.$field.is_some() { $dst.$field = $src.$field.clone(); })+
    };
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// TOML file with defaults for any option; flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

impl ConfigArg {
    pub fn load(&self) -> Result<Settings, CliError> {
        match &self.config {
            None => Ok(Settings::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(vec![format!("cannot read config {}: {e}", path.display())]))?;
                toml::from_str(&text).map_err(|e| CliError::Config(vec![format!("config {}: {e}", path.display())]))
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    /// Long-format data file (epoch,row,tube,value)
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Dataset manifest (TOML with rows, tubes, length, name)
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

impl DatasetArgs {
    pub fn apply(&self, s: &mut Settings) {
        overlay!(s, self, data, manifest);
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Transform along the third mode: dft, dct, dwt, dwt:LEVELS or identity
    #[arg(long)]
    pub transform: Option<String>,
    /// Noise covariance structure: diagonal or full
    #[arg(long)]
    pub mode: Option<String>,
    /// EM iteration cap
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative log-likelihood tolerance; 0 runs every iteration
    #[arg(long)]
    pub tol: Option<f64>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for slice training (default: available parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
}

impl FitArgs {
    pub fn apply(&self, s: &mut Settings) {
        overlay!(s, self, transform, mode, max_iters, tol, seed, workers);
    }
}

#[derive(Debug, Clone, Args)]
pub struct SizeArgs {
    /// Latent width J of each slice system
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// Parameter budget; picks the largest J that fits
    #[arg(long)]
    pub param_budget: Option<u64>,
}

impl SizeArgs {
    pub fn apply(&self, s: &mut Settings) {
        overlay!(s, self, latent_dim, param_budget);
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Replace existing output files
    #[arg(long)]
    pub overwrite: bool,
}

impl OutArgs {
    pub fn apply(&self, s: &mut Settings) {
        overlay!(s, self, out);
        s.overwrite |= self.overwrite;
    }
}

/// Collects validation failures so they are reported together.
#[derive(Default)]
pub struct Problems(Vec<String>);

impl Problems {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn require<T: Clone>(&mut self, value: &Option<T>, flag: &str) -> Option<T> {
        if value.is_none() {
            self.push(format!("--{flag} is required"));
        }
        value.clone()
    }

    pub fn parse<T: std::str::FromStr>(&mut self, raw: Option<&str>, default: T, flag: &str) -> T
    where
        T::Err: std::fmt::Display,
    {
        match raw.map(str::parse::<T>) {
            None => default,
            Some(Ok(v)) => v,
            Some(Err(e)) => {
                self.push(format!("--{flag}: {e}"));
                default
            }
        }
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(self.0))
        }
    }
}

impl Settings {
    pub fn transform(&self, p: &mut Problems) -> TransformKind {
        p.parse(self.transform.as_deref(), TransformKind::Dft, "transform")
    }

    pub fn em(&self, p: &mut Problems) -> EmOptions {
        let defaults = EmOptions::default();
        let mode: CovarianceMode = p.parse(self.mode.as_deref(), defaults.mode, "mode");
        let max_iters = self.max_iters.unwrap_or(defaults.max_iters);
        if max_iters == 0 {
            p.push("--max-iters must be at least 1");
        }
        let tol = self.tol.unwrap_or(defaults.tol);
        if !(tol >= 0.0 && tol.is_finite()) {
            p.push("--tol must be finite and non-negative");
        }
        if self.workers == Some(0) {
            p.push("--workers must be at least 1");
        }
        EmOptions { max_iters, tol, mode }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Output path, required.
    pub fn out(&self, p: &mut Problems) -> PathBuf {
        p.require(&self.out, "out").unwrap_or_default()
    }

    /// Both dataset paths, or a problem for each missing one.
    pub fn dataset(&self, p: &mut Problems) -> Option<(PathBuf, PathBuf)> {
        let manifest = p.require(&self.manifest, "manifest");
        let data = p.require(&self.data, "data");
        Some((manifest?, data?))
    }
}

/// `<path minus extension>.<suffix>`, for companion outputs.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}
