pub mod benchmark;
pub mod evaluate;
pub mod params;
pub mod predict;
pub mod synth;
pub mod train;

use std::path::Path;

use serde::Serialize;

use lmlds::data_io::{read_manifest, Manifest};
use lmlds::lmlds::{latent_dim_for_budget, param_count, ModelFamily};

use crate::settings::{Problems, Settings};
use crate::CliError;

/// Pretty JSON with a trailing newline, refusing to clobber unless asked.
pub fn write_json<T: Serialize>(path: &Path, value: &T, overwrite: bool) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(lmlds::Error::from)?;
    text.push('\n');
    write_text(path, &text, overwrite)
}

pub fn write_text(path: &Path, text: &str, overwrite: bool) -> Result<(), CliError> {
    if !overwrite && path.exists() {
        return Err(lmlds::Error::WouldOverwrite(path.display().to_string()).into());
    }
    std::fs::write(path, text).map_err(lmlds::Error::from)?;
    Ok(())
}

pub fn manifest(path: Option<&Path>) -> Result<Option<Manifest>, CliError> {
    Ok(match path {
        Some(p) => Some(read_manifest(p)?),
        None => None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub tubes: usize,
    pub length: usize,
}

impl From<&Manifest> for DatasetInfo {
    fn from(m: &Manifest) -> Self {
        DatasetInfo {
            name: m.name.clone(),
            rows: m.rows,
            tubes: m.tubes,
            length: m.length,
        }
    }
}

/// Slice latent width from `--latent-dim` or `--param-budget` (exactly one).
pub fn slice_latent(s: &Settings, rows: usize, tubes: usize, p: &mut Problems) -> usize {
    match (s.latent_dim, s.param_budget) {
        (Some(_), Some(_)) => {
            p.push("give either --latent-dim or --param-budget, not both");
            1
        }
        (None, None) => {
            p.push("one of --latent-dim or --param-budget is required");
            1
        }
        (Some(j), None) => {
            if j == 0 || j > rows {
                p.push(format!("--latent-dim must lie in 1..={rows} for {rows} rows"));
            }
            j
        }
        (None, Some(b)) => match latent_dim_for_budget(ModelFamily::LMlds, rows as u64, tubes as u64, b) {
            Ok(j) if j as usize <= rows => j as usize,
            Ok(j) => {
                p.push(format!("--param-budget {b} allows J = {j}, more than the {rows} rows"));
                rows
            }
            Err(e) => {
                p.push(format!("--param-budget: {e}"));
                1
            }
        },
    }
}

pub fn lmlds_count(rows: usize, latent: usize, tubes: usize) -> u64 {
    param_count(ModelFamily::LMlds, rows as u64, latent as u64, tubes as u64)
}

pub fn seconds(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64()
}
