use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{init_slice, slice_seed};
use crate::data_io::TensorSeries;
use crate::error::{Error, Result};
use crate::gaussian_lds::{em_fit, forecast, EmOptions, SliceLdsParams};
use crate::tensor_core::CVector;

/// A single LDS over observations flattened to length `I*K` vectors
/// (column-major, i.e. `Vec` of the `I x 1 x K` tensor).
#[derive(Debug, Clone)]
pub struct BaselineModel {
    pub rows: usize,
    pub tubes: usize,
    pub params: SliceLdsParams,
    pub last_latent: CVector,
    pub n_train: usize,
    pub trace: Vec<f64>,
    pub iterations: usize,
}

impl BaselineModel {
    pub fn latent_dim(&self) -> usize {
        self.params.latent_dim()
    }

    pub fn forecast(&self, horizon: usize) -> Result<Vec<DMatrix<f64>>> {
        Ok(forecast(&self.params, &self.last_latent, horizon)?
            .into_iter()
            .map(|v| DMatrix::from_fn(self.rows, self.tubes, |i, k| v[i + self.rows * k].re))
            .collect())
    }
}

pub(crate) fn flatten(y: &DMatrix<f64>) -> CVector {
    CVector::from_iterator(y.len(), y.iter().map(|&v| Complex64::new(v, 0.0)))
}

/// Vectorized LDS baseline. Initialization matches a slice of the
/// multilinear model: the same recipe, seeded with the slice-0 seed.
pub fn fit_baseline_lds(series: &TensorSeries, latent: usize, seed: u64, em: &EmOptions) -> Result<BaselineModel> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("training needs at least two epochs".into()));
    }
    let obs_dim = series.rows() * series.tubes();
    if latent == 0 || latent > obs_dim {
        return Err(Error::InvalidArgument(format!(
            "baseline latent dimension {latent} must lie in 1..={obs_dim}"
        )));
    }
    let obs: Vec<CVector> = series.observations().iter().map(flatten).collect();
    let init = init_slice(obs_dim, latent, slice_seed(seed, 0), false);
    let fit = em_fit(&init, &obs, em)?;
    Ok(BaselineModel {
        rows: series.rows(),
        tubes: series.tubes(),
        last_latent: fit.posterior.last_mean().clone(),
        params: fit.params,
        n_train: series.len(),
        trace: fit.trace,
        iterations: fit.iterations,
    })
}
