//! Linear-Gaussian state-space engine over complex scalars.
//!
//! A slice system evolves as
//!
//! ```text
//! x_1     ~ CN(u0, q0)
//! x_{n+1} ~ CN(a x_n, q)
//! y_n     ~ CN(c x_n, r)
//! ```
//!
//! with circularly-symmetric complex normals. Real data and real parameters
//! stay real through every routine here.

mod em;
mod filter;
pub(crate) mod linalg;
pub mod oracle;
mod sample;

pub use em::{em_fit, EmFit, EmOptions};
pub use filter::{kalman_filter, rts_smoother, FilterOutput, SmootherResult};
pub use linalg::{hermitian_eigenvalues, spectral_radius};
pub use sample::{sample_trajectory, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_core::{CMatrix, CVector};

/// Hermitian tolerance used when validating stored covariances.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalue floor applied to re-estimated covariances.
pub const COVARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    Diagonal,
    #[default]
    Full,
}

impl std::fmt::Display for CovarianceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CovarianceMode::Diagonal => "diagonal",
            CovarianceMode::Full => "full",
        })
    }
}

impl std::str::FromStr for CovarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diagonal" | "diag" => Ok(CovarianceMode::Diagonal),
            "full" => Ok(CovarianceMode::Full),
            _ => Err(Error::InvalidArgument(format!(
                "unknown covariance mode {s:?} (expected diagonal or full)"
            ))),
        }
    }
}

/// Parameters of one slice system: `latent` states, `obs` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceLdsParams {
    pub u0: CVector,
    pub q0: CMatrix,
    pub a: CMatrix,
    pub q: CMatrix,
    pub c: CMatrix,
    pub r: CMatrix,
}

impl SliceLdsParams {
    pub fn latent_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn obs_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Checks shapes and that every covariance is Hermitian PSD.
    pub fn validate(&self) -> Result<()> {
        let j = self.latent_dim();
        let i = self.obs_dim();
        let shape_ok = self.u0.len() == j
            && self.q0.shape() == (j, j)
            && self.a.shape() == (j, j)
            && self.q.shape() == (j, j)
            && self.c.shape() == (i, j)
            && self.r.shape() == (i, i);
        if !shape_ok || i == 0 || j == 0 {
            return Err(Error::Dimension(format!(
                "inconsistent slice parameters for latent dim {j}, observation dim {i}"
            )));
        }
        for (name, m) in [("q0", &self.q0), ("q", &self.q), ("r", &self.r)] {
            if !linalg::is_hermitian(m, HERMITIAN_TOL) {
                return Err(Error::InvalidData(format!("covariance {name} is not Hermitian")));
            }
            let scale = m.norm().max(1.0);
            if linalg::min_eigenvalue(m) < -1e-10 * scale {
                return Err(Error::InvalidData(format!(
                    "covariance {name} is not positive semidefinite"
                )));
            }
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.u0.iter().all(|z| z.im == 0.0)
            && [&self.q0, &self.a, &self.q, &self.c, &self.r]
                .into_iter()
                .all(linalg::is_real_matrix)
    }

    /// Entry-wise complex conjugate of every parameter.
    pub fn conj(&self) -> SliceLdsParams {
        SliceLdsParams {
            u0: self.u0.conjugate(),
            q0: self.q0.conjugate(),
            a: self.a.conjugate(),
            q: self.q.conjugate(),
            c: self.c.conjugate(),
            r: self.r.conjugate(),
        }
    }

    /// Number of stored entries in `a`, `c`, `q0`, `q` and `r`; the initial
    /// mean is not counted.
    pub fn operator_and_covariance_entries(&self) -> usize {
        [&self.a, &self.c, &self.q0, &self.q, &self.r]
            .iter()
            .map(|m| m.len())
            .sum()
    }
}

/// `h`-step-ahead observation means `c a^h mean` for `h = 1..=horizon`.
pub fn forecast(params: &SliceLdsParams, last_mean: &CVector, horizon: usize) -> Result<Vec<CVector>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
    }
    if last_mean.len() != params.latent_dim() {
        return Err(Error::Dimension(format!(
            "latent mean of length {} for latent dim {}",
            last_mean.len(),
            params.latent_dim()
        )));
    }
    let mut x = last_mean.clone();
    Ok((0..horizon)
        .map(|_| {
            x = &params.a * &x;
            &params.c * &x
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(v, 0.0))
    }

    fn scalar_params(a: f64, c: f64) -> SliceLdsParams {
        SliceLdsParams {
            u0: CVector::from_element(1, Complex64::new(0.0, 0.0)),
            q0: scalar(1.0),
            a: scalar(a),
            q: scalar(1.0),
            c: scalar(c),
            r: scalar(1.0),
        }
    }

    #[test]
    fn forecast_scalar_geometric() {
        let p = scalar_params(0.5, 2.0);
        let out = forecast(&p, &CVector::from_element(1, Complex64::new(1.0, 0.0)), 3).unwrap();
        let got: Vec<f64> = out.iter().map(|v| v[0].re).collect();
        assert_eq!(got, vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn forecast_identity_dynamics_is_constant() {
        let mut p = scalar_params(1.0, 3.0);
        p.a = CMatrix::identity(1, 1);
        let mean = CVector::from_element(1, Complex64::new(0.7, -0.1));
        for v in forecast(&p, &mean, 5).unwrap() {
            assert_eq!(v[0], Complex64::new(3.0, 0.0) * mean[0]);
        }
    }

    #[test]
    fn forecast_rejects_zero_horizon() {
        let p = scalar_params(1.0, 1.0);
        assert!(forecast(&p, &CVector::zeros(1), 0).is_err());
    }

    #[test]
    fn validate_catches_bad_covariance() {
        let mut p = scalar_params(1.0, 1.0);
        assert!(p.validate().is_ok());
        p.r = scalar(-1.0);
        assert!(p.validate().is_err());
        let mut p = scalar_params(1.0, 1.0);
        p.c = CMatrix::zeros(2, 2);
        assert!(matches!(p.validate(), Err(Error::Dimension(_))));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("diagonal".parse::<CovarianceMode>().unwrap(), CovarianceMode::Diagonal);
        assert_eq!("FULL".parse::<CovarianceMode>().unwrap(), CovarianceMode::Full);
        assert!("sparse".parse::<CovarianceMode>().is_err());
    }
}
