use serde::{Deserialize, Serialize};

use super::filter::{e_step, SmootherResult};
use super::linalg::{cholesky, diagonal_covariance, hermitian_part, repair_covariance, solve_right};
use super::{CovarianceMode, SliceLdsParams, COVARIANCE_FLOOR};
use crate::error::{Error, Result};
use crate::tensor_core::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iters: usize,
    /// Stop once `ll_new - ll_old < tol * |ll_old|`. Zero disables the test
    /// and runs exactly `max_iters` iterations.
    pub tol: f64,
    pub mode: CovarianceMode,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iters: 100,
            tol: 1e-6,
            mode: CovarianceMode::Full,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub params: SliceLdsParams,
    /// `trace[i]` is the log-likelihood after `i` M-steps; `trace[0]` scores
    /// the initial parameters.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// E-step under the returned parameters.
    pub posterior: SmootherResult,
}

/// Expectation-maximization for one slice system.
pub fn em_fit(init: &SliceLdsParams, obs: &[CVector], opts: &EmOptions) -> Result<EmFit> {
    if opts.max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    init.validate()?;
    let wrap = |iteration: usize| {
        move |e: Error| Error::Em {
            iteration,
            source: Box::new(e),
        }
    };

    let mut params = init.clone();
    let mut posterior = e_step(&params, obs).map_err(wrap(0))?;
    let mut trace = vec![posterior.log_likelihood];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iters {
        params = m_step(&params, &posterior, obs, opts.mode).map_err(wrap(it))?;
        posterior = e_step(&params, obs).map_err(wrap(it))?;
        let (old, new) = (trace[trace.len() - 1], posterior.log_likelihood);
        trace.push(new);
        iterations = it;
        if opts.tol > 0.0 && new - old < opts.tol * old.abs() {
            converged = true;
            break;
        }
    }

    Ok(EmFit {
        params,
        trace,
        iterations,
        converged,
        posterior,
    })
}

fn finish_covariance(m: &CMatrix, mode: CovarianceMode) -> CMatrix {
    match mode {
        CovarianceMode::Diagonal => diagonal_covariance(m, COVARIANCE_FLOOR),
        CovarianceMode::Full => repair_covariance(m, COVARIANCE_FLOOR),
    }
}

/// Closed-form maximizer of the expected complete-data log-likelihood.
/// With a single observation the transition pair `(a, q)` is kept.
pub(crate) fn m_step(
    prev: &SliceLdsParams,
    post: &SmootherResult,
    obs: &[CVector],
    mode: CovarianceMode,
) -> Result<SliceLdsParams> {
    let n = obs.len();
    let j = prev.latent_dim();
    let i = prev.obs_dim();
    let mu = &post.smoothed_means;
    let v = &post.smoothed_covs;

    // E[x_n x_n^H]
    let second: Vec<CMatrix> = mu.iter().zip(v).map(|(m, c)| c + m * m.adjoint()).collect();

    let u0 = mu[0].clone();
    let q0 = finish_covariance(&v[0], mode);

    let mut sum_p = CMatrix::zeros(j, j);
    let mut sum_ymu = CMatrix::zeros(i, j);
    for (k, y) in obs.iter().enumerate() {
        sum_p += &second[k];
        sum_ymu += y * mu[k].adjoint();
    }
    let chol_p = cholesky(&sum_p).ok_or_else(|| Error::numerical(n, "state second moment is singular"))?;
    let c = solve_right(&sum_ymu, &chol_p);

    let mut r_acc = CMatrix::zeros(i, i);
    for (k, y) in obs.iter().enumerate() {
        let resid = y - &c * &mu[k];
        r_acc += &resid * resid.adjoint() + &c * &v[k] * c.adjoint();
    }
    let r = finish_covariance(&hermitian_part(&r_acc).unscale(n as f64), mode);

    let (a, q) = if n < 2 {
        (prev.a.clone(), prev.q.clone())
    } else {
        let mut s00 = CMatrix::zeros(j, j);
        let mut s11 = CMatrix::zeros(j, j);
        let mut s10 = CMatrix::zeros(j, j);
        for k in 1..n {
            s00 += &second[k - 1];
            s11 += &second[k];
            s10 += &post.cross_covs[k - 1] + &mu[k] * mu[k - 1].adjoint();
        }
        let chol00 = cholesky(&s00).ok_or_else(|| Error::numerical(n, "lagged state second moment is singular"))?;
        let a = solve_right(&s10, &chol00);
        let q_acc = &s11 - &a * s10.adjoint() - &s10 * a.adjoint() + &a * &s00 * a.adjoint();
        let q = finish_covariance(&hermitian_part(&q_acc).unscale((n - 1) as f64), mode);
        (a, q)
    };

    Ok(SliceLdsParams { u0, q0, a, q, c, r })
}
