use std::f64::consts::PI;

use num_complex::Complex64;

use super::linalg::{cholesky, hermitian_part, log_det, solve_right};
use super::SliceLdsParams;
use crate::error::{Error, Result};
use crate::tensor_core::{CMatrix, CVector};

/// Forward-pass quantities. `predicted_*[n]` is the prior for step `n`
/// (zero-based) before seeing `y_n`; `filtered_*[n]` is the posterior after.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    pub predicted_means: Vec<CVector>,
    pub predicted_covs: Vec<CMatrix>,
    pub filtered_means: Vec<CVector>,
    pub filtered_covs: Vec<CMatrix>,
    pub log_likelihood: f64,
}

/// Posterior moments of every latent given the whole observation sequence.
///
/// `cross_covs[n]` is `Cov(x_{n+1}, x_n | y_1..y_N)` in zero-based indexing,
/// so it has `N - 1` entries.
#[derive(Debug, Clone)]
pub struct SmootherResult {
    pub filtered_means: Vec<CVector>,
    pub filtered_covs: Vec<CMatrix>,
    pub smoothed_means: Vec<CVector>,
    pub smoothed_covs: Vec<CMatrix>,
    pub cross_covs: Vec<CMatrix>,
    pub log_likelihood: f64,
}

impl SmootherResult {
    pub fn len(&self) -> usize {
        self.smoothed_means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smoothed_means.is_empty()
    }

    pub fn last_mean(&self) -> &CVector {
        self.smoothed_means.last().expect("smoother output is never empty")
    }
}

fn check_obs(params: &SliceLdsParams, obs: &[CVector]) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::InvalidArgument("at least one observation is required".into()));
    }
    if let Some((n, y)) = obs.iter().enumerate().find(|(_, y)| y.len() != params.obs_dim()) {
        return Err(Error::Dimension(format!(
            "observation {} has length {}, expected {}",
            n + 1,
            y.len(),
            params.obs_dim()
        )));
    }
    Ok(())
}

/// Kalman filter with the exact complex-Gaussian log-likelihood
/// `sum_n ln CN(y_n; c m_n, c P_n c^H + r)`.
pub fn kalman_filter(params: &SliceLdsParams, obs: &[CVector]) -> Result<FilterOutput> {
    check_obs(params, obs)?;
    let n_obs = obs.len();
    let dim_y = params.obs_dim() as f64;
    let eye = CMatrix::identity(params.latent_dim(), params.latent_dim());
    let c_h = params.c.adjoint();
    let a_h = params.a.adjoint();

    let mut out = FilterOutput {
        predicted_means: Vec::with_capacity(n_obs),
        predicted_covs: Vec::with_capacity(n_obs),
        filtered_means: Vec::with_capacity(n_obs),
        filtered_covs: Vec::with_capacity(n_obs),
        log_likelihood: 0.0,
    };

    let mut mean = params.u0.clone();
    let mut cov = hermitian_part(&params.q0);
    for (n, y) in obs.iter().enumerate() {
        if n > 0 {
            mean = &params.a * &mean;
            cov = hermitian_part(&(&params.a * &cov * &a_h + &params.q));
        }
        out.predicted_means.push(mean.clone());
        out.predicted_covs.push(cov.clone());

        let innovation = y - &params.c * &mean;
        let s = &params.c * &cov * &c_h + &params.r;
        let chol =
            cholesky(&s).ok_or_else(|| Error::numerical(n + 1, "innovation covariance is not positive definite"))?;

        // gain = P c^H S^{-1}
        let pch = &cov * &c_h;
        let gain = solve_right(&pch, &chol);
        let whitened = chol
            .l_dirty()
            .solve_lower_triangular(&innovation)
            .ok_or_else(|| Error::numerical(n + 1, "singular innovation factor"))?;
        let quad: f64 = whitened.iter().map(Complex64::norm_sqr).sum();
        out.log_likelihood += -dim_y * PI.ln() - log_det(&chol) - quad;

        mean = &mean + &gain * innovation;
        // Joseph form keeps the update Hermitian PSD.
        let ikc = &eye - &gain * &params.c;
        cov = hermitian_part(&(&ikc * &cov * ikc.adjoint() + &gain * &params.r * gain.adjoint()));

        if !out.log_likelihood.is_finite() || cov.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical(n + 1, "non-finite filter state"));
        }
        out.filtered_means.push(mean.clone());
        out.filtered_covs.push(cov.clone());
    }
    Ok(out)
}

/// Rauch-Tung-Striebel backward pass over a filter output.
pub fn rts_smoother(params: &SliceLdsParams, filtered: FilterOutput) -> Result<SmootherResult> {
    let n_obs = filtered.filtered_means.len();
    if n_obs == 0 {
        return Err(Error::InvalidArgument("empty filter output".into()));
    }
    let a_h = params.a.adjoint();
    let mut smoothed_means = filtered.filtered_means.clone();
    let mut smoothed_covs = filtered.filtered_covs.clone();
    let mut cross_covs = vec![CMatrix::zeros(0, 0); n_obs - 1];

    for n in (0..n_obs.saturating_sub(1)).rev() {
        let vf = &filtered.filtered_covs[n];
        let p_next = &filtered.predicted_covs[n + 1];
        let va_h = vf * &a_h;
        // smoother gain J_n = V_n a^H P_{n+1|n}^{-1}
        let gain = match cholesky(p_next) {
            Some(chol) => solve_right(&va_h, &chol),
            None => {
                let pinv = hermitian_part(p_next)
                    .pseudo_inverse(1e-14 * p_next.norm().max(f64::MIN_POSITIVE))
                    .map_err(|e| Error::numerical(n + 1, format!("smoother gain: {e}")))?;
                va_h * pinv
            }
        };
        let mean = &filtered.filtered_means[n] + &gain * (&smoothed_means[n + 1] - &filtered.predicted_means[n + 1]);
        let cov = hermitian_part(&(vf + &gain * (&smoothed_covs[n + 1] - p_next) * gain.adjoint()));
        cross_covs[n] = &smoothed_covs[n + 1] * gain.adjoint();
        smoothed_means[n] = mean;
        smoothed_covs[n] = cov;
    }

    Ok(SmootherResult {
        filtered_means: filtered.filtered_means,
        filtered_covs: filtered.filtered_covs,
        smoothed_means,
        smoothed_covs,
        cross_covs,
        log_likelihood: filtered.log_likelihood,
    })
}

/// Filter then smooth.
pub(crate) fn e_step(params: &SliceLdsParams, obs: &[CVector]) -> Result<SmootherResult> {
    rts_smoother(params, kalman_filter(params, obs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v))
    }

    #[test]
    fn noiseless_identity_tracks_observations() {
        let ys = [1.5, 1.5, 1.5, 1.5];
        let obs: Vec<CVector> = ys.iter().map(|&v| CVector::from_element(1, c(v))).collect();
        let p = SliceLdsParams {
            u0: CVector::from_element(1, c(ys[0])),
            q0: scalar(0.0),
            a: scalar(1.0),
            q: scalar(0.0),
            c: scalar(1.0),
            r: scalar(1e-12),
        };
        let f = kalman_filter(&p, &obs).unwrap();
        for (m, y) in f.filtered_means.iter().zip(ys) {
            assert!((m[0].re - y).abs() < 1e-6);
        }
    }

    #[test]
    fn single_step_is_gaussian_conditioning() {
        // Posterior of x given y with prior CN(u, Q): Sigma = (Q^-1 + C^H R^-1 C)^-1,
        // mean = Sigma (C^H R^-1 y + Q^-1 u).
        let p = SliceLdsParams {
            u0: CVector::from_vec(vec![Complex64::new(0.3, -0.2), c(1.0)]),
            q0: CMatrix::from_row_slice(
                2,
                2,
                &[c(2.0), Complex64::new(0.2, 0.1), Complex64::new(0.2, -0.1), c(1.0)],
            ),
            a: CMatrix::identity(2, 2),
            q: CMatrix::identity(2, 2),
            c: CMatrix::from_row_slice(
                3,
                2,
                &[c(1.0), c(0.5), Complex64::new(0.0, 1.0), c(-1.0), c(0.2), c(0.7)],
            ),
            r: CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5), c(1.0), c(2.0)])),
        };
        let y = CVector::from_vec(vec![c(1.0), Complex64::new(0.5, 0.5), c(-2.0)]);
        let f = kalman_filter(&p, std::slice::from_ref(&y)).unwrap();

        let q_inv = p.q0.clone().try_inverse().unwrap();
        let r_inv = p.r.clone().try_inverse().unwrap();
        let ch = p.c.adjoint();
        let sigma = (&q_inv + &ch * &r_inv * &p.c).try_inverse().unwrap();
        let mean = &sigma * (&ch * &r_inv * &y + &q_inv * &p.u0);
        assert!((&f.filtered_means[0] - mean).norm() < 1e-12);
        assert!((&f.filtered_covs[0] - sigma).norm() < 1e-12);
    }

    #[test]
    fn smoother_last_step_equals_filter() {
        let p = SliceLdsParams {
            u0: CVector::from_element(1, c(0.0)),
            q0: scalar(1.0),
            a: scalar(0.8),
            q: scalar(0.5),
            c: scalar(1.0),
            r: scalar(0.3),
        };
        let obs: Vec<CVector> = [0.1, -0.4, 0.9]
            .iter()
            .map(|&v| CVector::from_element(1, c(v)))
            .collect();
        let f = kalman_filter(&p, &obs).unwrap();
        let last = f.filtered_means[2].clone();
        let last_cov = f.filtered_covs[2].clone();
        let s = rts_smoother(&p, f).unwrap();
        assert_eq!(s.smoothed_means[2], last);
        assert_eq!(s.smoothed_covs[2], last_cov);
        assert_eq!(s.cross_covs.len(), 2);
    }

    #[test]
    fn noiseless_smoother_inverts_projection() {
        let c_mat = CMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(0.0), c(1.0)]);
        let a = CMatrix::from_row_slice(2, 2, &[c(0.9), c(0.1), c(-0.1), c(0.9)]);
        let x0 = CVector::from_vec(vec![c(1.0), c(-1.0)]);
        let mut x = x0.clone();
        let mut obs = Vec::new();
        for _ in 0..4 {
            obs.push(&c_mat * &x);
            x = &a * &x;
        }
        let p = SliceLdsParams {
            u0: x0,
            q0: CMatrix::identity(2, 2).scale(1e-9),
            a,
            q: CMatrix::zeros(2, 2),
            c: c_mat.clone(),
            r: CMatrix::identity(2, 2).scale(1e-12),
        };
        let s = e_step(&p, &obs).unwrap();
        let c_inv = c_mat.try_inverse().unwrap();
        for (m, y) in s.smoothed_means.iter().zip(&obs) {
            assert!((m - &c_inv * y).norm() < 1e-6);
        }
    }

    #[test]
    fn singular_innovation_reports_step() {
        let p = SliceLdsParams {
            u0: CVector::from_element(1, c(0.0)),
            q0: scalar(0.0),
            a: scalar(1.0),
            q: scalar(0.0),
            c: scalar(1.0),
            r: scalar(0.0),
        };
        let obs = vec![CVector::from_element(1, c(1.0))];
        match kalman_filter(&p, &obs) {
            Err(Error::Numerical { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected numerical failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_observation_length() {
        let p = SliceLdsParams {
            u0: CVector::from_element(1, c(0.0)),
            q0: scalar(1.0),
            a: scalar(1.0),
            q: scalar(1.0),
            c: scalar(1.0),
            r: scalar(1.0),
        };
        assert!(kalman_filter(&p, &[CVector::zeros(2)]).is_err());
        assert!(kalman_filter(&p, &[]).is_err());
    }
}
