use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::psd_factor;
use super::SliceLdsParams;
use crate::tensor_core::{CMatrix, CVector};

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub latents: Vec<CVector>,
    pub observations: Vec<CVector>,
}

/// Ancestral sampling of `n_steps` latents and observations.
///
/// Noise is circularly-symmetric complex normal (real and imaginary parts
/// each with variance 1/2) unless every parameter is real, in which case
/// real Gaussian noise is drawn so the trajectory stays real.
pub fn sample_trajectory(params: &SliceLdsParams, n_steps: usize, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = params.is_real();
    let mut draw = |len: usize| -> CVector {
        CVector::from_fn(len, |_, _| {
            if real {
                Complex64::new(StandardNormal.sample(&mut rng), 0.0)
            } else {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        })
    };

    let l0: CMatrix = psd_factor(&params.q0);
    let lq = psd_factor(&params.q);
    let lr = psd_factor(&params.r);
    let (j, i) = (params.latent_dim(), params.obs_dim());

    let mut latents = Vec::with_capacity(n_steps);
    let mut observations = Vec::with_capacity(n_steps);
    let mut x = &params.u0 + &l0 * draw(j);
    for n in 0..n_steps {
        if n > 0 {
            x = &params.a * &x + &lq * draw(j);
        }
        observations.push(&params.c * &x + &lr * draw(i));
        latents.push(x.clone());
    }
    Trajectory { latents, observations }
}
