//! Posterior of all latents by conditioning the explicit joint Gaussian.
//!
//! This shares no code with the filter or smoother and is meant for small
//! problems only; tests use it to cross-check the recursive inference.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::{hermitian_part, spectral_radius};
use super::SliceLdsParams;
use crate::error::{Error, Result};
use crate::tensor_core::{CMatrix, CVector};

/// Largest stacked latent size the oracle accepts.
pub const MAX_STACKED_LATENT: usize = 64;

#[derive(Debug, Clone)]
pub struct ExactPosterior {
    pub means: Vec<CVector>,
    pub covs: Vec<CMatrix>,
    /// `cross_covs[n] = Cov(x_{n+1}, x_n | y)`, zero-based.
    pub cross_covs: Vec<CMatrix>,
}

/// Conditions the joint law of `(x_1..x_N, y_1..y_N)` on the observations.
pub fn exact_posterior_bruteforce(params: &SliceLdsParams, obs: &[CVector]) -> Result<ExactPosterior> {
    let n = obs.len();
    let j = params.latent_dim();
    let i = params.obs_dim();
    if n == 0 || n * j > MAX_STACKED_LATENT {
        return Err(Error::InvalidArgument(format!(
            "oracle needs 1 <= N*J <= {MAX_STACKED_LATENT}, got {}",
            n * j
        )));
    }

    // Prior mean and covariance of the stacked latent vector.
    let mut means = vec![params.u0.clone()];
    let mut marg = vec![params.q0.clone()];
    for k in 1..n {
        means.push(&params.a * &means[k - 1]);
        marg.push(&params.a * &marg[k - 1] * params.a.adjoint() + &params.q);
    }
    let mut sx = CMatrix::zeros(n * j, n * j);
    for col in 0..n {
        // Cov(x_row, x_col) = a^(row-col) P_col for row >= col.
        let mut block = marg[col].clone();
        for row in col..n {
            if row > col {
                block = &params.a * &block;
            }
            sx.view_mut((row * j, col * j), (j, j)).copy_from(&block);
            sx.view_mut((col * j, row * j), (j, j)).copy_from(&block.adjoint());
        }
    }
    let mut mx = CVector::zeros(n * j);
    for (k, m) in means.iter().enumerate() {
        mx.rows_mut(k * j, j).copy_from(m);
    }

    let mut h = CMatrix::zeros(n * i, n * j);
    let mut rbig = CMatrix::zeros(n * i, n * i);
    let mut y = CVector::zeros(n * i);
    for k in 0..n {
        h.view_mut((k * i, k * j), (i, j)).copy_from(&params.c);
        rbig.view_mut((k * i, k * i), (i, i)).copy_from(&params.r);
        y.rows_mut(k * i, i).copy_from(&obs[k]);
    }

    let sxy = &sx * h.adjoint();
    let syy = &h * &sx * h.adjoint() + rbig;
    let lu = syy.lu();
    let gain_t = lu
        .solve(&sxy.adjoint())
        .ok_or_else(|| Error::numerical(0, "joint observation covariance is singular"))?;
    let post_mean = &mx + gain_t.adjoint() * (y - &h * &mx);
    let post_cov = &sx - gain_t.adjoint() * sxy.adjoint();

    Ok(ExactPosterior {
        means: (0..n).map(|k| post_mean.rows(k * j, j).into_owned()).collect(),
        covs: (0..n)
            .map(|k| post_cov.view((k * j, k * j), (j, j)).into_owned())
            .collect(),
        cross_covs: (1..n)
            .map(|k| post_cov.view((k * j, (k - 1) * j), (j, j)).into_owned())
            .collect(),
    })
}

/// A random well-conditioned complex system for cross-checks: Gaussian
/// operators with the transition scaled to spectral radius 0.9 and
/// covariances `B B^H + 0.1 I`.
pub fn random_system(obs: usize, latent: usize, seed: u64) -> SliceLdsParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mat = |r: usize, c: usize| -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
    };
    let mut a = mat(latent, latent);
    let radius = spectral_radius(&a);
    if radius > 0.0 {
        a.scale_mut(0.9 / radius);
    }
    let c = mat(obs, latent);
    let u0 = mat(latent, 1).column(0).into_owned();
    let mut cov = |n: usize| {
        let b = mat(n, n);
        hermitian_part(&(&b * b.adjoint() + CMatrix::identity(n, n) * Complex64::new(0.1, 0.0)))
    };
    SliceLdsParams {
        u0,
        q0: cov(latent),
        a,
        q: cov(latent),
        c,
        r: cov(obs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn params(a: f64) -> SliceLdsParams {
        SliceLdsParams {
            u0: CVector::from_vec(vec![c(0.5)]),
            q0: CMatrix::from_element(1, 1, c(2.0)),
            a: CMatrix::from_element(1, 1, c(a)),
            q: CMatrix::from_element(1, 1, c(1.0)),
            c: CMatrix::from_element(1, 1, c(1.0)),
            r: CMatrix::from_element(1, 1, c(0.5)),
        }
    }

    #[test]
    fn single_step_matches_information_form() {
        let p = params(0.9);
        let y = CVector::from_vec(vec![c(1.2)]);
        let post = exact_posterior_bruteforce(&p, std::slice::from_ref(&y)).unwrap();
        // Sigma = (1/q0 + 1/r)^-1, mean = Sigma (y/r + u0/q0)
        let sigma = 1.0 / (1.0 / 2.0 + 1.0 / 0.5);
        let mean = sigma * (1.2 / 0.5 + 0.5 / 2.0);
        assert!((post.covs[0][(0, 0)].re - sigma).abs() < 1e-14);
        assert!((post.means[0][0].re - mean).abs() < 1e-14);
    }

    #[test]
    fn decoupled_chain_depends_only_on_own_observation() {
        let mut p = params(0.0);
        p.u0 = CVector::from_vec(vec![c(0.0)]);
        p.q0 = CMatrix::from_element(1, 1, c(1.0));
        let obs: Vec<CVector> = [0.3, -1.0, 2.0]
            .iter()
            .map(|&v| CVector::from_vec(vec![c(v)]))
            .collect();
        let post = exact_posterior_bruteforce(&p, &obs).unwrap();
        for (k, y) in obs.iter().enumerate() {
            let solo = exact_posterior_bruteforce(&p, std::slice::from_ref(y)).unwrap();
            assert!((post.means[k][0] - solo.means[0][0]).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_oversized_problem() {
        let obs = vec![CVector::from_vec(vec![c(0.0)]); 65];
        assert!(exact_posterior_bruteforce(&params(0.5), &obs).is_err());
    }
}
