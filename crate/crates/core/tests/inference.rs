use lmlds::gaussian_lds::oracle::{exact_posterior_bruteforce, random_system};
use lmlds::gaussian_lds::{
    em_fit, kalman_filter, rts_smoother, sample_trajectory, CovarianceMode, EmOptions, SliceLdsParams,
};
use lmlds::tensor_core::{CMatrix, CVector};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Log-density of the stacked observation vector under its joint Gaussian.
fn stacked_log_likelihood(p: &SliceLdsParams, obs: &[CVector]) -> f64 {
    let (n, i) = (obs.len(), p.obs_dim());
    let mut means = vec![p.u0.clone()];
    let mut covs = vec![p.q0.clone()];
    for t in 1..n {
        means.push(&p.a * &means[t - 1]);
        covs.push(&p.a * &covs[t - 1] * p.a.adjoint() + &p.q);
    }
    let mut sigma = DMatrix::<Complex64>::zeros(n * i, n * i);
    let mut resid = CVector::zeros(n * i);
    for t in 0..n {
        resid.rows_mut(t * i, i).copy_from(&(&obs[t] - &p.c * &means[t]));
        let mut cross = covs[t].clone();
        for s in t..n {
            // Cov(x_s, x_t) = A^{s-t} P_t
            let block = &p.c * &cross * p.c.adjoint();
            sigma.view_mut((s * i, t * i), (i, i)).copy_from(&block);
            sigma.view_mut((t * i, s * i), (i, i)).copy_from(&block.adjoint());
            cross = &p.a * cross;
        }
        let diag = sigma.view((t * i, t * i), (i, i)) + &p.r;
        sigma.view_mut((t * i, t * i), (i, i)).copy_from(&diag);
    }
    let lu = sigma.clone().lu();
    let quad = (resid.adjoint() * lu.solve(&resid).unwrap())[(0, 0)].re;
    let logdet: f64 = lu.determinant().ln().re;
    -((n * i) as f64) * std::f64::consts::PI.ln() - logdet - quad
}

#[test]
fn smoother_matches_joint_conditioning() {
    for seed in 0..30u64 {
        let (i, j, n) = (
            1 + seed as usize % 3,
            1 + (seed as usize / 3) % 3,
            1 + seed as usize % 4,
        );
        let p = random_system(i, j, seed);
        let obs = sample_trajectory(&p, n, seed + 100).observations;
        let post = rts_smoother(&p, kalman_filter(&p, &obs).unwrap()).unwrap();
        let exact = exact_posterior_bruteforce(&p, &obs).unwrap();
        for t in 0..n {
            let dm = (&post.smoothed_means[t] - &exact.means[t]).camax();
            assert!(dm < 1e-8, "seed {seed} mean {t}: {dm:e}");
            assert!(
                max_diff(&post.smoothed_covs[t], &exact.covs[t]) < 1e-8,
                "seed {seed} cov {t}"
            );
        }
        for t in 0..n - 1 {
            assert!(
                max_diff(&post.cross_covs[t], &exact.cross_covs[t]) < 1e-8,
                "seed {seed} cross {t}"
            );
        }
    }
}

#[test]
fn log_likelihood_matches_stacked_density() {
    for seed in 0..20u64 {
        let p = random_system(2, 2, seed);
        let obs = sample_trajectory(&p, 5, seed).observations;
        let ll = kalman_filter(&p, &obs).unwrap().log_likelihood;
        let direct = stacked_log_likelihood(&p, &obs);
        assert!(
            (ll - direct).abs() < 1e-8 * direct.abs().max(1.0),
            "seed {seed}: {ll} vs {direct}"
        );
    }
}

#[test]
fn em_never_decreases_likelihood_on_complex_systems() {
    for seed in 0..6u64 {
        let truth = random_system(3, 2, seed);
        let obs = sample_trajectory(&truth, 120, seed).observations;
        let init = random_system(3, 2, seed + 1000);
        for mode in [CovarianceMode::Diagonal, CovarianceMode::Full] {
            let fit = em_fit(
                &init,
                &obs,
                &EmOptions {
                    max_iters: 40,
                    tol: 0.0,
                    mode,
                },
            )
            .unwrap();
            assert_eq!(fit.trace.len(), 41);
            for w in fit.trace.windows(2) {
                assert!(
                    w[1] - w[0] > -1e-8 * w[0].abs().max(1.0),
                    "seed {seed} {mode}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
            fit.params.validate().unwrap();
        }
    }
}

#[test]
fn em_posterior_scores_returned_parameters() {
    let truth = random_system(2, 2, 5);
    let obs = sample_trajectory(&truth, 80, 9).observations;
    let fit = em_fit(&random_system(2, 2, 6), &obs, &EmOptions::default()).unwrap();
    let rescored = kalman_filter(&fit.params, &obs).unwrap().log_likelihood;
    assert_eq!(fit.posterior.log_likelihood, rescored);
    assert_eq!(*fit.trace.last().unwrap(), rescored);
}
