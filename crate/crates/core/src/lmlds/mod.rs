//! Transform-domain multilinear dynamical systems.
//!
//! Observations `Y_n` are `I x K` matrices, read as `I x 1 x K` tensors.
//! After transforming every mode-3 tube, frontal slice `k` of each
//! observation is a length-`I` vector, and the `K` slice sequences are
//! modelled by independent [`SliceLdsParams`] systems. Training fits those
//! systems in parallel; prediction forecasts each one and maps the stacked
//! result back with the inverse transform.

mod accounting;
mod baseline;

pub use accounting::{latent_dim_for_budget, param_count, vectorized_lds_param_count, ModelFamily};
pub use baseline::{fit_baseline_lds, BaselineModel};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_io::TensorSeries;
use crate::error::{Error, Result};
use crate::gaussian_lds::{em_fit, forecast, CovarianceMode, EmFit, EmOptions, SliceLdsParams};
use crate::tensor_core::{CMatrix, CVector, Tensor3, TransformKind, TubeTransform};

/// Residue above which a reconstruction counts as failed.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-6;
/// Residue above which a reconstruction is logged as suspicious.
pub const IMAG_RESIDUE_WARN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Observation rows `I`.
    pub rows: usize,
    /// Latent width per slice `J`.
    pub latent: usize,
    /// Tube length `K`.
    pub tubes: usize,
}

impl ModelDims {
    pub fn new(rows: usize, latent: usize, tubes: usize) -> Self {
        ModelDims { rows, latent, tubes }
    }

    fn validate(&self, kind: TransformKind) -> Result<()> {
        if self.rows == 0 || self.latent == 0 || self.tubes == 0 {
            return Err(Error::InvalidArgument(format!("dimensions must be positive: {self:?}")));
        }
        if self.latent > self.rows {
            return Err(Error::InvalidArgument(format!(
                "latent width {} exceeds observation rows {}",
                self.latent, self.rows
            )));
        }
        kind.check_len(self.tubes)
    }
}

/// A trained (or freshly initialized) forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct LmldsModel {
    pub kind: TransformKind,
    pub dims: ModelDims,
    pub mode: CovarianceMode,
    pub seed: u64,
    pub n_train: usize,
    /// Transform-domain parameters, one per frontal slice.
    pub slices: Vec<SliceLdsParams>,
    /// Smoothed latent mean at the last training epoch, per slice.
    pub last_latents: Vec<CVector>,
}

impl LmldsModel {
    /// Entries held in the operators and covariances of all slices. Matches
    /// [`param_count`] for [`ModelFamily::LMlds`].
    pub fn stored_param_count(&self) -> usize {
        self.slices
            .iter()
            .map(SliceLdsParams::operator_and_covariance_entries)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate(self.kind)?;
        if self.slices.len() != self.dims.tubes || self.last_latents.len() != self.dims.tubes {
            return Err(Error::Dimension(format!(
                "model declares {} slices but stores {} parameter sets and {} latent means",
                self.dims.tubes,
                self.slices.len(),
                self.last_latents.len()
            )));
        }
        for (k, (p, m)) in self.slices.iter().zip(&self.last_latents).enumerate() {
            p.validate().map_err(|e| Error::Slice {
                slice: k + 1,
                source: Box::new(e),
            })?;
            if p.obs_dim() != self.dims.rows || p.latent_dim() != self.dims.latent || m.len() != self.dims.latent {
                return Err(Error::Dimension(format!(
                    "slice {} does not match dims {:?}",
                    k + 1,
                    self.dims
                )));
            }
        }
        Ok(())
    }
}

/// Per-slice seed: SplitMix64 of `master + (k + 1) * 0x9E3779B97F4A7C15`.
pub fn slice_seed(master: u64, k: usize) -> u64 {
    let mut z = master.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn left_singular_basis(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let g = DMatrix::<f64>::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    let u = g.svd(true, false).u.expect("left singular vectors requested");
    CMatrix::from_fn(rows, cols, |i, j| Complex64::new(u[(i, j)], 0.0))
}

/// Initial parameters for one slice system: standard-normal mean, identity
/// covariances, and transition/projection columns taken from the left
/// singular vectors of Gaussian matrices. `complex` selects circular complex
/// draws for the mean.
pub fn init_slice(rows: usize, latent: usize, seed: u64, complex: bool) -> SliceLdsParams {
    assert!(latent >= 1 && latent <= rows, "need 1 <= latent <= rows");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = CVector::from_fn(latent, |_, _| {
        if complex {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        } else {
            Complex64::new(StandardNormal.sample(&mut rng), 0.0)
        }
    });
    let a = left_singular_basis(&mut rng, latent, latent);
    let c = left_singular_basis(&mut rng, rows, latent);
    SliceLdsParams {
        u0,
        q0: CMatrix::identity(latent, latent),
        a,
        q: CMatrix::identity(latent, latent),
        c,
        r: CMatrix::identity(rows, rows),
    }
}

/// Slices that must be fitted; the rest are conjugates of a partner.
fn mirror_source(kind: TransformKind, k: usize, tubes: usize) -> Option<usize> {
    kind.conjugate_partner(k, tubes).filter(|&p| p < k)
}

pub fn init_model(dims: ModelDims, kind: TransformKind, mode: CovarianceMode, seed: u64) -> Result<LmldsModel> {
    dims.validate(kind)?;
    let mut slices: Vec<SliceLdsParams> = Vec::with_capacity(dims.tubes);
    for k in 0..dims.tubes {
        let p = match mirror_source(kind, k, dims.tubes) {
            Some(src) => slices[src].conj(),
            None => init_slice(
                dims.rows,
                dims.latent,
                slice_seed(seed, k),
                !kind.slice_is_real(k, dims.tubes),
            ),
        };
        slices.push(p);
    }
    let last_latents = slices.iter().map(|p| p.u0.clone()).collect();
    Ok(LmldsModel {
        kind,
        dims,
        mode,
        seed,
        n_train: 0,
        slices,
        last_latents,
    })
}

/// Transforms each observation and splits it into `K` slice sequences:
/// `result[k][n]` is frontal slice `k` of `L(Y_n)`.
pub fn slice_sequences(observations: &[DMatrix<f64>], kind: TransformKind) -> Result<Vec<Vec<CVector>>> {
    let first = observations
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
    let plan = TubeTransform::new(kind, first.ncols())?;
    let mut out = vec![Vec::with_capacity(observations.len()); first.ncols()];
    for y in observations {
        let t = plan.forward_tensor(&Tensor3::from_observation(y));
        for (k, seq) in out.iter_mut().enumerate() {
            seq.push(CVector::from_column_slice(t.slice(k).as_slice()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub em: EmOptions,
    /// Worker threads for slice fits; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Under DFT, fit only one slice of each conjugate pair and mirror the
    /// other.
    pub mirror_conjugates: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            em: EmOptions::default(),
            workers: None,
            mirror_conjugates: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: LmldsModel,
    /// Log-likelihood trace per slice; mirrored slices repeat their partner's.
    pub traces: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
}

pub(crate) fn worker_count(requested: Option<usize>) -> usize {
    requested
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `jobs` on a pool of `workers` threads, keeping results in job order
/// and reporting the failure with the lowest index.
pub(crate) fn run_indexed<T: Send>(
    workers: usize,
    jobs: Vec<usize>,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<(usize, T)>> {
    let run = || -> Vec<(usize, Result<T>)> { jobs.par_iter().map(|&k| (k, f(k))).collect() };
    let results = if workers <= 1 {
        jobs.iter().map(|&k| (k, f(k))).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(run)
    };
    results
        .into_iter()
        .map(|(k, r)| {
            r.map(|v| (k, v)).map_err(|e| Error::Slice {
                slice: k + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Fits a model to every epoch of `series`.
pub fn train(
    series: &TensorSeries,
    latent: usize,
    kind: TransformKind,
    seed: u64,
    opts: &TrainOptions,
) -> Result<TrainOutput> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("training needs at least two epochs".into()));
    }
    let dims = ModelDims::new(series.rows(), latent, series.tubes());
    let init = init_model(dims, kind, opts.em.mode, seed)?;
    let sequences = slice_sequences(series.observations(), kind)?;

    let mirrored = |k: usize| {
        if opts.mirror_conjugates {
            mirror_source(kind, k, dims.tubes)
        } else {
            None
        }
    };
    let jobs: Vec<usize> = (0..dims.tubes).filter(|&k| mirrored(k).is_none()).collect();
    let fits = run_indexed(worker_count(opts.workers), jobs, |k| {
        em_fit(&init.slices[k], &sequences[k], &opts.em)
    })?;

    let mut by_slice: Vec<Option<EmFit>> = vec![None; dims.tubes];
    for (k, fit) in fits {
        by_slice[k] = Some(fit);
    }
    let mut slices: Vec<SliceLdsParams> = Vec::with_capacity(dims.tubes);
    let mut last_latents: Vec<CVector> = Vec::with_capacity(dims.tubes);
    let mut traces: Vec<Vec<f64>> = Vec::with_capacity(dims.tubes);
    let mut iterations = Vec::with_capacity(dims.tubes);
    for k in 0..dims.tubes {
        match mirrored(k) {
            Some(src) => {
                slices.push(slices[src].conj());
                last_latents.push(last_latents[src].conjugate());
                traces.push(traces[src].clone());
                iterations.push(iterations[src]);
            }
            None => {
                let fit = by_slice[k].take().expect("every unmirrored slice is fitted");
                last_latents.push(fit.posterior.last_mean().clone());
                slices.push(fit.params);
                traces.push(fit.trace);
                iterations.push(fit.iterations);
            }
        }
    }

    Ok(TrainOutput {
        model: LmldsModel {
            kind,
            dims,
            mode: opts.em.mode,
            seed,
            n_train: series.len(),
            slices,
            last_latents,
        },
        traces,
        iterations,
    })
}

#[derive(Debug, Clone)]
pub struct Prediction {
    /// Predicted `I x K` observations for horizons `1..=H`.
    pub epochs: Vec<DMatrix<f64>>,
    /// Largest imaginary part discarded during reconstruction.
    pub max_imag_residue: f64,
}

/// Forecasts `horizon` epochs past the end of training.
pub fn predict(model: &LmldsModel, horizon: usize) -> Result<Prediction> {
    predict_from(model, &model.last_latents, horizon)
}

/// Forecasts from explicit per-slice latent means.
pub fn predict_from(model: &LmldsModel, last_latents: &[CVector], horizon: usize) -> Result<Prediction> {
    if last_latents.len() != model.dims.tubes {
        return Err(Error::Dimension(format!(
            "{} latent means for {} slices",
            last_latents.len(),
            model.dims.tubes
        )));
    }
    let per_slice = model
        .slices
        .iter()
        .zip(last_latents)
        .map(|(p, m)| forecast(p, m, horizon))
        .collect::<Result<Vec<_>>>()?;
    let plan = TubeTransform::new(model.kind, model.dims.tubes)?;

    let mut epochs = Vec::with_capacity(horizon);
    let mut max_imag_residue = 0.0f64;
    for h in 0..horizon {
        let mut t = Tensor3::zeros(model.dims.rows, 1, model.dims.tubes);
        for (k, f) in per_slice.iter().enumerate() {
            t.set_slice(k, &CMatrix::from_column_slice(model.dims.rows, 1, f[h].as_slice()));
        }
        let y = plan.inverse_tensor(&t);
        let residue = y.max_imag();
        if residue > IMAG_RESIDUE_LIMIT {
            return Err(Error::Reconstruction {
                residue,
                limit: IMAG_RESIDUE_LIMIT,
            });
        }
        if residue > IMAG_RESIDUE_WARN {
            log::warn!("horizon {}: imaginary residue {residue:e} discarded", h + 1);
        }
        max_imag_residue = max_imag_residue.max(residue);
        epochs.push(y.real_observation()?);
    }
    Ok(Prediction {
        epochs,
        max_imag_residue,
    })
}
