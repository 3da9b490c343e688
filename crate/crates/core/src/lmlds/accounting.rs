use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model families compared by parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// Vectorized LDS with `JK` latents and `IK` observations.
    Lds,
    /// Kronecker-factorized multilinear LDS (counted only, not implemented).
    Mlds,
    /// Transform-domain multilinear LDS.
    LMlds,
}

/// Free parameters of transition, projection, both state covariances and
/// the observation covariance, for observations `I x K` and latent width `J`.
///
/// | family | count |
/// |---|---|
/// | `Lds`   | `(JK)^2 + IJK^2 + 2(JK)^2 + (IK)^2` |
/// | `Mlds`  | `IJ + J^2 + 2K^2 + (IK)^2 + 2(JK)^2` |
/// | `LMlds` | `J^2 K + IJK + 2 J^2 K + I^2 K` |
pub fn param_count(family: ModelFamily, rows: u64, latent: u64, tubes: u64) -> u64 {
    let (i, j, k) = (rows, latent, tubes);
    match family {
        ModelFamily::Lds => vectorized_lds_param_count(i * k, j * k),
        ModelFamily::Mlds => i * j + j * j + 2 * k * k + (i * k).pow(2) + 2 * (j * k).pow(2),
        ModelFamily::LMlds => j * j * k + i * j * k + 2 * j * j * k + i * i * k,
    }
}

/// Parameter count of a plain LDS with `obs_dim` observations and `latent`
/// states: `d^2 + n d + 2 d^2 + n^2`.
pub fn vectorized_lds_param_count(obs_dim: u64, latent: u64) -> u64 {
    3 * latent * latent + obs_dim * latent + obs_dim * obs_dim
}

/// Latent width for a parameter budget.
///
/// * `LMlds` and `Mlds`: the largest `J` whose count stays within `budget`.
/// * `Lds`: the smallest vectorized latent dimension `d` whose count reaches
///   `budget` (the baseline is never given fewer parameters).
pub fn latent_dim_for_budget(family: ModelFamily, rows: u64, tubes: u64, budget: u64) -> Result<u64> {
    if rows == 0 || tubes == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    match family {
        ModelFamily::Lds => {
            let n = rows * tubes;
            let mut d = 1;
            while vectorized_lds_param_count(n, d) < budget {
                d += 1;
            }
            Ok(d)
        }
        ModelFamily::LMlds | ModelFamily::Mlds => {
            if param_count(family, rows, 1, tubes) > budget {
                return Err(Error::InfeasibleBudget { budget });
            }
            let mut j = 1;
            while param_count(family, rows, j + 1, tubes) <= budget {
                j += 1;
            }
            Ok(j)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_dimensions() {
        assert_eq!(param_count(ModelFamily::Lds, 1, 1, 1), 5);
        assert_eq!(param_count(ModelFamily::LMlds, 1, 1, 1), 5);
    }

    #[test]
    fn hand_evaluated_counts() {
        // I=5, J=2, K=3:
        // LDS   36 + 90 + 72 + 225 = 423
        // MLDS  10 + 4 + 18 + 225 + 72 = 329
        // L-MLDS 12 + 30 + 24 + 75 = 141
        assert_eq!(param_count(ModelFamily::Lds, 5, 2, 3), 423);
        assert_eq!(param_count(ModelFamily::Mlds, 5, 2, 3), 329);
        assert_eq!(param_count(ModelFamily::LMlds, 5, 2, 3), 141);
    }

    #[test]
    fn budget_from_mlds_count() {
        assert_eq!(latent_dim_for_budget(ModelFamily::LMlds, 5, 3, 329).unwrap(), 4);
        assert_eq!(param_count(ModelFamily::LMlds, 5, 4, 3), 279);
        assert_eq!(param_count(ModelFamily::LMlds, 5, 5, 3), 375);
    }

    #[test]
    fn budget_boundary_is_inclusive() {
        for j in 1..6 {
            let b = param_count(ModelFamily::LMlds, 4, j, 6);
            assert_eq!(latent_dim_for_budget(ModelFamily::LMlds, 4, 6, b).unwrap(), j);
        }
    }

    #[test]
    fn budget_monotone() {
        let mut last = 0;
        for budget in 60..2000 {
            let j = latent_dim_for_budget(ModelFamily::LMlds, 3, 4, budget).unwrap();
            assert!(j >= last);
            last = j;
        }
    }

    #[test]
    fn infeasible_budget() {
        assert!(matches!(
            latent_dim_for_budget(ModelFamily::LMlds, 5, 3, 10),
            Err(Error::InfeasibleBudget { budget: 10 })
        ));
    }

    #[test]
    fn lds_rule_reaches_budget() {
        let budget = param_count(ModelFamily::LMlds, 5, 2, 6);
        let d = latent_dim_for_budget(ModelFamily::Lds, 5, 6, budget).unwrap();
        assert_eq!(d, 1);
        assert!(vectorized_lds_param_count(30, d) >= budget);
        let d = latent_dim_for_budget(ModelFamily::Lds, 2, 2, 100).unwrap();
        assert!(vectorized_lds_param_count(4, d) >= 100);
        assert!(vectorized_lds_param_count(4, d - 1) < 100);
    }
}
