use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use lmlds::data_io::{load_series, save_model};
use lmlds::lmlds::{train, TrainOptions};

use super::{lmlds_count, manifest, seconds, slice_latent, write_json, DatasetInfo};
use crate::settings::{sibling, ConfigArg, DatasetArgs, FitArgs, OutArgs, Problems, SizeArgs};
use crate::CliError;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    fit: FitArgs,
    #[command(flatten)]
    size: SizeArgs,
    /// Epochs used for training (default: the whole series)
    #[arg(long)]
    train_len: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

/// Resolved settings, echoed into the training log.
#[derive(Debug, Serialize)]
struct TrainConfig {
    data: PathBuf,
    manifest: PathBuf,
    transform: String,
    mode: String,
    latent_dim: usize,
    param_budget: Option<u64>,
    train_len: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
    out: PathBuf,
}

#[derive(Serialize)]
struct SliceLog {
    slice: usize,
    iterations: usize,
    log_likelihood: Vec<f64>,
}

#[derive(Serialize)]
struct Runtime {
    workers: Option<usize>,
    train_secs: f64,
}

#[derive(Serialize)]
struct TrainLog<'a> {
    command: &'static str,
    config: &'a TrainConfig,
    dataset: DatasetInfo,
    param_count: u64,
    slices: Vec<SliceLog>,
    runtime: Runtime,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let mut s = args.config.load()?;
    args.dataset.apply(&mut s);
    args.fit.apply(&mut s);
    args.size.apply(&mut s);
    args.out.apply(&mut s);
    if args.train_len.is_some() {
        s.train_len = args.train_len;
    }

    let mut p = Problems::default();
    let kind = s.transform(&mut p);
    let em = s.em(&mut p);
    let out = s.out(&mut p);
    let paths = s.dataset(&mut p);
    let manifest = manifest(paths.as_ref().map(|(m, _)| m.as_path()))?;
    let (mut latent, mut train_len) = (1, 0);
    if let Some(m) = &manifest {
        latent = slice_latent(&s, m.rows, m.tubes, &mut p);
        train_len = s.train_len.unwrap_or(m.length);
        if train_len < 2 || train_len > m.length {
            p.push(format!(
                "--train-len must lie in 2..={} (series length), got {train_len}",
                m.length
            ));
        }
        if let Err(e) = kind.check_len(m.tubes) {
            p.push(format!("--transform: {e}"));
        }
    }
    p.finish()?;
    let (manifest_path, data_path) = paths.expect("validated");
    let manifest = manifest.expect("validated");

    let config = TrainConfig {
        data: data_path.clone(),
        manifest: manifest_path.clone(),
        transform: kind.to_string(),
        mode: em.mode.to_string(),
        latent_dim: latent,
        param_budget: s.param_budget,
        train_len,
        max_iters: em.max_iters,
        tol: em.tol,
        seed: s.seed(),
        out: out.clone(),
    };
    let log_path = sibling(&out, "log.json");
    for path in [&out, &log_path] {
        if !s.overwrite && path.exists() {
            return Err(lmlds::Error::WouldOverwrite(path.display().to_string()).into());
        }
    }

    let series = load_series(&manifest_path, &data_path)?.head(train_len)?;
    let opts = TrainOptions {
        em,
        workers: s.workers,
        ..TrainOptions::default()
    };
    let start = Instant::now();
    let fitted = train(&series, latent, kind, s.seed(), &opts)?;
    let train_secs = seconds(start);
    log::info!("trained {} slices in {train_secs:.3}s", series.tubes());

    save_model(&fitted.model, &out, s.overwrite)?;
    let log = TrainLog {
        command: "train",
        config: &config,
        dataset: DatasetInfo::from(&manifest),
        param_count: lmlds_count(series.rows(), latent, series.tubes()),
        slices: fitted
            .traces
            .into_iter()
            .zip(fitted.iterations)
            .enumerate()
            .map(|(k, (trace, iterations))| SliceLog {
                slice: k + 1,
                iterations,
                log_likelihood: trace,
            })
            .collect(),
        runtime: Runtime {
            workers: s.workers,
            train_secs,
        },
    };
    write_json(&log_path, &log, s.overwrite)
}
