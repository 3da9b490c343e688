use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use lmlds::data_io::{load_series, relative_error, SplitSpec, TensorSeries};
use lmlds::gaussian_lds::EmOptions;
use lmlds::lmlds::{
    fit_baseline_lds, latent_dim_for_budget, param_count, predict, train, vectorized_lds_param_count, ModelFamily,
    TrainOptions,
};
use lmlds::tensor_core::TransformKind;

use super::{manifest, seconds, slice_latent, write_json, write_text, DatasetInfo};
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
    /// Training epochs at the start of the series
    #[arg(long)]
    train_len: Option<usize>,
    /// Test epochs following the training span (default: the rest)
    #[arg(long)]
    test_len: Option<usize>,
    /// Comma-separated variants: dft, dct, dwt, identity, baseline
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    /// Report path; the CSV goes next to it with a .csv extension
    #[command(flatten)]
    out: OutArgs,
}

/// A model to evaluate: an L-MLDS under some transform, or the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Transform(TransformKind),
    Baseline,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "baseline" {
            return Ok(Variant::Baseline);
        }
        s.parse()
            .map(Variant::Transform)
            .map_err(|_| format!("unknown variant {s:?} (expected dft, dct, dwt, identity or baseline)"))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Transform(k) => write!(f, "{k}"),
            Variant::Baseline => f.write_str("baseline"),
        }
    }
}

pub const DEFAULT_VARIANTS: [&str; 4] = ["dft", "dct", "dwt", "baseline"];

pub fn parse_variants(raw: Option<&[String]>, p: &mut Problems) -> Vec<Variant> {
    let raw: Vec<String> = match raw {
        Some(v) => v.to_vec(),
        None => DEFAULT_VARIANTS.iter().map(|s| s.to_string()).collect(),
    };
    if raw.is_empty() {
        p.push("--variants must name at least one variant");
    }
    let mut out = Vec::new();
    for r in &raw {
        match r.parse::<Variant>() {
            Ok(v) if out.contains(&v) => p.push(format!("--variants lists {v} twice")),
            Ok(v) => out.push(v),
            Err(e) => p.push(format!("--variants: {e}")),
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct EvaluateConfig {
    data: PathBuf,
    manifest: PathBuf,
    train_len: usize,
    test_len: usize,
    variants: Vec<String>,
    latent_dim: Option<usize>,
    param_budget: Option<u64>,
    mode: String,
    max_iters: usize,
    tol: f64,
    seed: u64,
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct EpochError {
    epoch: usize,
    horizon: usize,
    relative_error: f64,
}

#[derive(Debug, Serialize)]
struct VariantReport {
    variant: String,
    family: ModelFamily,
    latent_dim: usize,
    param_count: u64,
    status: &'static str,
    error: Option<String>,
    em_iterations: Vec<usize>,
    mean_relative_error: Option<f64>,
    errors: Vec<EpochError>,
}

#[derive(Debug, Serialize)]
struct Budget {
    param_budget: u64,
    /// Kronecker-factorized model count at the same `J`, for reference.
    mlds_reference: u64,
}

#[derive(Debug, Serialize)]
struct Runtime {
    workers: Option<usize>,
    train_secs: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
struct EvalReport<'a> {
    command: &'static str,
    config: &'a EvaluateConfig,
    seed: u64,
    dataset: DatasetInfo,
    budget: Budget,
    variants: Vec<VariantReport>,
    runtime: Runtime,
}

struct Fitted {
    latent_dim: usize,
    param_count: u64,
    em_iterations: Vec<usize>,
    forecast: Vec<DMatrix<f64>>,
}

struct Job<'a> {
    train: &'a TensorSeries,
    horizon: usize,
    latent: usize,
    budget: u64,
    seed: u64,
    em: EmOptions,
    workers: Option<usize>,
}

fn fit_variant(v: Variant, job: &Job) -> Result<Fitted, lmlds::Error> {
    let (rows, tubes) = (job.train.rows(), job.train.tubes());
    match v {
        Variant::Transform(kind) => {
            let opts = TrainOptions {
                em: job.em,
                workers: job.workers,
                ..TrainOptions::default()
            };
            let out = train(job.train, job.latent, kind, job.seed, &opts)?;
            let prediction = predict(&out.model, job.horizon)?;
            Ok(Fitted {
                latent_dim: job.latent,
                param_count: param_count(ModelFamily::LMlds, rows as u64, job.latent as u64, tubes as u64),
                em_iterations: out.iterations,
                forecast: prediction.epochs,
            })
        }
        Variant::Baseline => {
            let d = latent_dim_for_budget(ModelFamily::Lds, rows as u64, tubes as u64, job.budget)? as usize;
            let fit = fit_baseline_lds(job.train, d, job.seed, &job.em)?;
            Ok(Fitted {
                latent_dim: d,
                param_count: vectorized_lds_param_count((rows * tubes) as u64, d as u64),
                em_iterations: vec![fit.iterations],
                forecast: fit.forecast(job.horizon)?,
            })
        }
    }
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
    if args.test_len.is_some() {
        s.test_len = args.test_len;
    }
    if args.variants.is_some() {
        s.variants = args.variants.clone();
    }

    let mut p = Problems::default();
    let em = s.em(&mut p);
    let variants = parse_variants(s.variants.as_deref(), &mut p);
    let out = s.out(&mut p);
    let train_len = p.require(&s.train_len, "train-len").unwrap_or(0);
    let paths = s.dataset(&mut p);
    let manifest = manifest(paths.as_ref().map(|(m, _)| m.as_path()))?;
    let (mut latent, mut test_len) = (1, 0);
    if let Some(m) = &manifest {
        latent = slice_latent(&s, m.rows, m.tubes, &mut p);
        test_len = s.test_len.unwrap_or(m.length.saturating_sub(train_len));
        let split = SplitSpec {
            n_train: train_len,
            n_test: test_len,
        };
        if let Err(e) = split.validate(m.length) {
            p.push(format!("split: {e}"));
        }
    }
    p.finish()?;
    let (manifest_path, data_path) = paths.expect("validated");
    let manifest = manifest.expect("validated");
    let (rows, tubes) = (manifest.rows, manifest.tubes);
    let budget = s
        .param_budget
        .unwrap_or_else(|| param_count(ModelFamily::LMlds, rows as u64, latent as u64, tubes as u64));

    let config = EvaluateConfig {
        data: data_path.clone(),
        manifest: manifest_path.clone(),
        train_len,
        test_len,
        variants: variants.iter().map(Variant::to_string).collect(),
        latent_dim: s.latent_dim,
        param_budget: s.param_budget,
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

    let series = load_series(&manifest_path, &data_path)?;
    let (train_series, test) = SplitSpec {
        n_train: train_len,
        n_test: test_len,
    }
    .apply(&series)?;
    let job = Job {
        train: &train_series,
        horizon: test_len,
        latent,
        budget,
        seed: s.seed(),
        em,
        workers: s.workers,
    };

    let mut reports = Vec::new();
    let mut train_secs = BTreeMap::new();
    let mut csv = String::from("variant,epoch,horizon,relative_error\n");
    for &v in &variants {
        let start = Instant::now();
        let fitted = fit_variant(v, &job).and_then(|f| {
            let errs = f
                .forecast
                .iter()
                .zip(&test)
                .map(|(pred, actual)| relative_error(pred, actual))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((f, errs))
        });
        train_secs.insert(v.to_string(), seconds(start));
        let family = match v {
            Variant::Baseline => ModelFamily::Lds,
            Variant::Transform(_) => ModelFamily::LMlds,
        };
        let report = match fitted {
            Ok((f, errs)) => {
                let errors: Vec<EpochError> = errs
                    .iter()
                    .enumerate()
                    .map(|(h, &e)| EpochError {
                        epoch: train_len + h + 1,
                        horizon: h + 1,
                        relative_error: e,
                    })
                    .collect();
                for e in &errors {
                    writeln!(csv, "{v},{},{},{:e}", e.epoch, e.horizon, e.relative_error).expect("string write");
                }
                VariantReport {
                    variant: v.to_string(),
                    family,
                    latent_dim: f.latent_dim,
                    param_count: f.param_count,
                    status: "ok",
                    error: None,
                    em_iterations: f.em_iterations,
                    mean_relative_error: Some(errs.iter().sum::<f64>() / errs.len() as f64),
                    errors,
                }
            }
            Err(e) => {
                log::warn!("variant {v} failed: {e}");
                VariantReport {
                    variant: v.to_string(),
                    family,
                    latent_dim: 0,
                    param_count: 0,
                    status: "failed",
                    error: Some(e.to_string()),
                    em_iterations: Vec::new(),
                    mean_relative_error: None,
                    errors: Vec::new(),
                }
            }
        };
        reports.push(report);
    }

    let all_failed = reports.iter().all(|r| r.status == "failed");
    let report = EvalReport {
        command: "evaluate",
        config: &config,
        seed: s.seed(),
        dataset: DatasetInfo::from(&manifest),
        budget: Budget {
            param_budget: budget,
            mlds_reference: param_count(ModelFamily::Mlds, rows as u64, latent as u64, tubes as u64),
        },
        variants: reports,
        runtime: Runtime {
            workers: s.workers,
            train_secs,
        },
    };
    write_json(&out, &report, s.overwrite)?;
    write_text(&csv_path, &csv, s.overwrite)?;
    if all_failed {
        return Err(CliError::AllFailed(format!(
            "every variant failed; see {}",
            out.display()
        )));
    }
    Ok(())
}
