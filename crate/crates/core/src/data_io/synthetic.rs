use serde::{Deserialize, Serialize};

use super::TensorSeries;
use crate::error::{Error, Result};
use crate::gaussian_lds::{sample_trajectory, spectral_radius, CovarianceMode, Trajectory};
use crate::lmlds::{init_model, slice_seed, LmldsModel, ModelDims};
use crate::tensor_core::{CMatrix, Tensor3, TransformKind, TubeTransform};

/// Recipe for a synthetic series drawn from a random ground-truth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dims: ModelDims,
    pub kind: TransformKind,
    pub seed: u64,
    pub n_steps: usize,
    /// Spectral radius given to every transform-domain transition.
    pub rho: f64,
    /// Multiplier on all ground-truth covariances; 0 gives a noiseless orbit.
    pub noise_scale: f64,
}

impl SyntheticSpec {
    pub fn new(dims: ModelDims, kind: TransformKind, seed: u64, n_steps: usize) -> Self {
        SyntheticSpec {
            dims,
            kind,
            seed,
            n_steps,
            rho: 0.9,
            noise_scale: 1.0,
        }
    }
}

const SAMPLE_SALT: u64 = 0x5EED_0F_DA7A;

/// Imaginary residue tolerated, and discarded, in synthetic observations.
pub const SYNTHETIC_IMAG_LIMIT: f64 = 1e-9;

/// Samples a series together with the model that generated it. The model's
/// `last_latents` hold the true final latent states.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(TensorSeries, LmldsModel)> {
    if !(spec.rho > 0.0 && spec.rho < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must lie in (0, 1), got {}",
            spec.rho
        )));
    }
    if spec.n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    if !(spec.noise_scale >= 0.0 && spec.noise_scale.is_finite()) {
        return Err(Error::InvalidArgument(
            "noise_scale must be finite and non-negative".into(),
        ));
    }
    let dims = spec.dims;
    let mut truth = init_model(dims, spec.kind, CovarianceMode::Full, spec.seed)?;

    let mut trajectories = Vec::with_capacity(dims.tubes);
    for k in 0..dims.tubes {
        let mirror = spec.kind.conjugate_partner(k, dims.tubes).filter(|&p| p < k);
        if let Some(src) = mirror {
            truth.slices[k] = truth.slices[src].conj();
            let t: &Trajectory = &trajectories[src];
            let mirrored = Trajectory {
                latents: t.latents.iter().map(|x| x.conjugate()).collect(),
                observations: t.observations.iter().map(|y| y.conjugate()).collect(),
            };
            trajectories.push(mirrored);
            continue;
        }
        let p = &mut truth.slices[k];
        let radius = spectral_radius(&p.a);
        if radius > 0.0 {
            p.a.scale_mut(spec.rho / radius);
        }
        for cov in [&mut p.q0, &mut p.q, &mut p.r] {
            cov.scale_mut(spec.noise_scale);
        }
        trajectories.push(sample_trajectory(
            p,
            spec.n_steps,
            slice_seed(spec.seed ^ SAMPLE_SALT, k),
        ));
    }

    let plan = TubeTransform::new(spec.kind, dims.tubes)?;
    let mut observations = Vec::with_capacity(spec.n_steps);
    for n in 0..spec.n_steps {
        let mut t = Tensor3::zeros(dims.rows, 1, dims.tubes);
        for (k, traj) in trajectories.iter().enumerate() {
            t.set_slice(
                k,
                &CMatrix::from_column_slice(dims.rows, 1, traj.observations[n].as_slice()),
            );
        }
        let y = plan.inverse_tensor(&t);
        let residue = y.max_imag();
        if residue > SYNTHETIC_IMAG_LIMIT {
            return Err(Error::Reconstruction {
                residue,
                limit: SYNTHETIC_IMAG_LIMIT,
            });
        }
        observations.push(y.real_observation()?);
    }

    truth.last_latents = trajectories
        .iter()
        .map(|t| t.latents.last().expect("n_steps > 0").clone())
        .collect();
    truth.n_train = spec.n_steps;
    let name = format!("synthetic-{}-seed{}", spec.kind, spec.seed);
    Ok((TensorSeries::new(name, observations)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::CVector;

    #[test]
    fn same_seed_same_series() {
        let spec = SyntheticSpec::new(ModelDims::new(3, 2, 4), TransformKind::Dft, 7, 30);
        let (a, _) = generate_synthetic(&spec).unwrap();
        let (b, _) = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_synthetic(&SyntheticSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_series_follows_orbit() {
        for kind in [TransformKind::Dft, TransformKind::Dct, TransformKind::Identity] {
            let spec = SyntheticSpec {
                noise_scale: 0.0,
                ..SyntheticSpec::new(ModelDims::new(4, 2, 6), kind, 3, 12)
            };
            let (series, truth) = generate_synthetic(&spec).unwrap();
            let plan = TubeTransform::new(kind, 6).unwrap();
            // y_n = L^{-1}(c a^{n-1} u0) slice by slice.
            let mut states: Vec<CVector> = truth.slices.iter().map(|p| p.u0.clone()).collect();
            for (n, y) in series.observations().iter().enumerate() {
                if n > 0 {
                    for (x, p) in states.iter_mut().zip(&truth.slices) {
                        *x = &p.a * &*x;
                    }
                }
                let mut t = Tensor3::zeros(4, 1, 6);
                for (k, (x, p)) in states.iter().zip(&truth.slices).enumerate() {
                    t.set_slice(k, &CMatrix::from_column_slice(4, 1, (&p.c * x).as_slice()));
                }
                let expect = plan.inverse_tensor(&t).real_observation().unwrap();
                assert!((y - expect).norm() < 1e-10, "{kind} epoch {n}");
            }
        }
    }

    #[test]
    fn transitions_have_requested_radius() {
        let spec = SyntheticSpec::new(ModelDims::new(5, 2, 6), TransformKind::Dft, 1, 10);
        let (_, truth) = generate_synthetic(&spec).unwrap();
        for p in &truth.slices {
            assert!((spectral_radius(&p.a) - 0.9).abs() < 1e-10);
        }
    }

    #[test]
    fn stable_series_stay_bounded() {
        for seed in 0..5 {
            let spec = SyntheticSpec::new(ModelDims::new(5, 2, 6), TransformKind::Dft, seed, 300);
            let (series, _) = generate_synthetic(&spec).unwrap();
            let max = series
                .observations()
                .iter()
                .flat_map(|y| y.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max.is_finite() && max < 1e3, "seed {seed}: {max}");
        }
    }

    #[test]
    fn bad_rho_rejected() {
        let spec = SyntheticSpec {
            rho: 1.0,
            ..SyntheticSpec::new(ModelDims::new(2, 1, 2), TransformKind::Dft, 0, 5)
        };
        assert!(generate_synthetic(&spec).is_err());
    }
}
