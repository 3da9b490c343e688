use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use lmlds::data_io::{generate_synthetic, SyntheticSpec};
use lmlds::lmlds::{
    fit_baseline_lds, latent_dim_for_budget, param_count, train, vectorized_lds_param_count, ModelDims, ModelFamily,
    TrainOptions,
};
use lmlds::tensor_core::TransformKind;

use super::evaluate::{parse_variants, Variant};
use super::{seconds, write_json, write_text};
use crate::settings::{sibling, ConfigArg, FitArgs, OutArgs, Problems};
use crate::CliError;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    config: ConfigArg,
    /// Comma-separated problem sizes as ROWSxTUBES, e.g. 5x6,10x10
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<String>>,
    /// Latent width J of each slice system
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Length of each synthetic training series
    #[arg(long)]
    train_len: Option<usize>,
    /// Comma-separated variants: dft, dct, dwt, identity, baseline
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    /// Comma-separated worker counts to time each variant with
    #[arg(long, value_delimiter = ',')]
    worker_sweep: Option<Vec<usize>>,
    #[command(flatten)]
    fit: FitArgs,
    /// Report path; the CSV goes next to it with a .csv extension
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Serialize)]
struct BenchmarkConfig {
    sizes: Vec<String>,
    latent_dim: usize,
    train_len: usize,
    variants: Vec<String>,
    worker_sweep: Vec<usize>,
    mode: String,
    max_iters: usize,
    tol: f64,
    seed: u64,
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Entry {
    rows: usize,
    tubes: usize,
    variant: String,
    latent_dim: usize,
    param_count: u64,
    workers: usize,
    status: &'static str,
    error: Option<String>,
    em_iterations: usize,
    wall_secs: f64,
}

#[derive(Debug, Serialize)]
struct BenchmarkReport<'a> {
    command: &'static str,
    config: &'a BenchmarkConfig,
    seed: u64,
    available_parallelism: usize,
    entries: Vec<Entry>,
}

fn parse_size(raw: &str) -> Option<(usize, usize)> {
    let (i, k) = raw.trim().split_once(['x', 'X'])?;
    let (i, k) = (i.parse().ok()?, k.parse().ok()?);
    (i > 0 && k > 0).then_some((i, k))
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let mut s = args.config.load()?;
    args.fit.apply(&mut s);
    args.out.apply(&mut s);
    if args.sizes.is_some() {
        s.sizes = args.sizes.clone();
    }
    if args.latent_dim.is_some() {
        s.latent_dim = args.latent_dim;
    }
    if args.train_len.is_some() {
        s.train_len = args.train_len;
    }
    if args.variants.is_some() {
        s.variants = args.variants.clone();
    }
    if args.worker_sweep.is_some() {
        s.worker_sweep = args.worker_sweep.clone();
    }

    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut p = Problems::default();
    let em = s.em(&mut p);
    let out = s.out(&mut p);
    let variants = parse_variants(s.variants.as_deref(), &mut p);
    let raw_sizes = p.require(&s.sizes, "sizes").unwrap_or_default();
    let mut sizes = Vec::new();
    for raw in &raw_sizes {
        match parse_size(raw) {
            Some(size) => sizes.push(size),
            None => p.push(format!("--sizes: cannot read {raw:?} as ROWSxTUBES")),
        }
    }
    let latent = s.latent_dim.unwrap_or(2);
    if let Some(&(i, _)) = sizes.iter().find(|(i, _)| latent == 0 || latent > *i) {
        p.push(format!("--latent-dim {latent} must lie in 1..={i} for every size"));
    }
    let train_len = s.train_len.unwrap_or(200);
    if train_len < 2 {
        p.push("--train-len must be at least 2");
    }
    let sweep = s.worker_sweep.clone().unwrap_or_else(|| {
        let mut v = vec![1, available];
        v.dedup();
        v
    });
    if sweep.is_empty() || sweep.contains(&0) {
        p.push("--worker-sweep needs positive worker counts");
    }
    p.finish()?;

    let config = BenchmarkConfig {
        sizes: raw_sizes,
        latent_dim: latent,
        train_len,
        variants: variants.iter().map(Variant::to_string).collect(),
        worker_sweep: sweep.clone(),
        mode: em.mode.to_string(),
        max_iters: em.max_iters,
        tol: em.tol,
        seed: s.seed(),
        out: out.clone(),
    };
    let csv_path = sibling(&out, "csv");
    for path in [&out, &csv_path] {
        if !s.overwrite && path.exists() {
            return Err(lmlds::Error::WouldOverwrite(path.display().to_string()).into());
        }
    }

    let mut entries = Vec::new();
    for &(rows, tubes) in &sizes {
        let spec = SyntheticSpec::new(
            ModelDims::new(rows, latent, tubes),
            TransformKind::Dft,
            s.seed(),
            train_len,
        );
        let series = match generate_synthetic(&spec) {
            Ok((series, _)) => series,
            Err(e) => {
                log::warn!("size {rows}x{tubes}: cannot generate data: {e}");
                entries.push(Entry {
                    rows,
                    tubes,
                    variant: "data".into(),
                    latent_dim: latent,
                    param_count: 0,
                    workers: 0,
                    status: "failed",
                    error: Some(e.to_string()),
                    em_iterations: 0,
                    wall_secs: 0.0,
                });
                continue;
            }
        };
        let lmlds_count = param_count(ModelFamily::LMlds, rows as u64, latent as u64, tubes as u64);
        for &v in &variants {
            // The baseline is a single system; worker count does not apply.
            let counts: &[usize] = if v == Variant::Baseline { &[1] } else { &sweep };
            for &workers in counts {
                let start = Instant::now();
                let result = match v {
                    Variant::Transform(kind) => {
                        let opts = TrainOptions {
                            em,
                            workers: Some(workers),
                            ..TrainOptions::default()
                        };
                        train(&series, latent, kind, s.seed(), &opts)
                            .map(|o| (latent, lmlds_count, o.iterations.iter().sum()))
                    }
                    Variant::Baseline => {
                        latent_dim_for_budget(ModelFamily::Lds, rows as u64, tubes as u64, lmlds_count).and_then(|d| {
                            let fit = fit_baseline_lds(&series, d as usize, s.seed(), &em)?;
                            Ok((
                                d as usize,
                                vectorized_lds_param_count((rows * tubes) as u64, d),
                                fit.iterations,
                            ))
                        })
                    }
                };
                let wall_secs = seconds(start);
                let entry = match result {
                    Ok((latent_dim, param_count, em_iterations)) => Entry {
                        rows,
                        tubes,
                        variant: v.to_string(),
                        latent_dim,
                        param_count,
                        workers,
                        status: "ok",
                        error: None,
                        em_iterations,
                        wall_secs,
                    },
                    Err(e) => Entry {
                        rows,
                        tubes,
                        variant: v.to_string(),
                        latent_dim: latent,
                        param_count: 0,
                        workers,
                        status: "failed",
                        error: Some(e.to_string()),
                        em_iterations: 0,
                        wall_secs,
                    },
                };
                log::info!("{rows}x{tubes} {v} workers={workers}: {:.3}s", entry.wall_secs);
                entries.push(entry);
            }
        }
    }

    let mut csv = String::from("rows,tubes,variant,workers,status,em_iterations,wall_secs\n");
    for e in &entries {
        writeln!(
            csv,
            "{},{},{},{},{},{},{:e}",
            e.rows, e.tubes, e.variant, e.workers, e.status, e.em_iterations, e.wall_secs
        )
        .expect("string write");
    }
    let report = BenchmarkReport {
        command: "benchmark",
        config: &config,
        seed: s.seed(),
        available_parallelism: available,
        entries,
    };
    write_json(&out, &report, s.overwrite)?;
    write_text(&csv_path, &csv, s.overwrite)
}
