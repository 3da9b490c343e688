//! Small dense helpers for Hermitian matrices.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::tensor_core::CMatrix;

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub(crate) fn cholesky(m: &CMatrix) -> Option<Cholesky<Complex64, Dyn>> {
    Cholesky::new(hermitian_part(m))
}

/// `B * S^{-1}` for Hermitian positive definite `S`.
pub(crate) fn solve_right(b: &CMatrix, chol: &Cholesky<Complex64, Dyn>) -> CMatrix {
    chol.solve(&b.adjoint()).adjoint()
}

/// `ln det S` from a Cholesky factor.
pub(crate) fn log_det(chol: &Cholesky<Complex64, Dyn>) -> f64 {
    chol.l_dirty().diagonal().iter().map(|z| z.re.ln()).sum::<f64>() * 2.0
}

pub(crate) fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    (m - m.adjoint()).iter().all(|z| z.norm() <= tol * scale)
}

/// Eigenvalues of a Hermitian matrix (its Hermitian part, strictly).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_part(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Hermitian part of `m`, with eigenvalues raised to at least `floor`.
/// Matrices already above the floor pass through untouched.
pub(crate) fn repair_covariance(m: &CMatrix, floor: f64) -> CMatrix {
    let h = hermitian_part(m);
    let eig = h.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return h;
    }
    let v = &eig.eigenvectors;
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.max(floor), 0.0)));
    hermitian_part(&(v * d * v.adjoint()))
}

/// Diagonal of `m` as a diagonal matrix with real entries floored at `floor`.
pub(crate) fn diagonal_covariance(m: &CMatrix, floor: f64) -> CMatrix {
    CMatrix::from_diagonal(&m.diagonal().map(|z| Complex64::new(z.re.max(floor), 0.0)))
}

/// A factor `L` with `L L^H = m` for Hermitian PSD `m`; tolerates singular
/// and zero matrices.
pub(crate) fn psd_factor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return CMatrix::zeros(n, n);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        l.column_mut(j).scale_mut(s);
    }
    l
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &CMatrix) -> f64 {
    if m.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        return real.complex_eigenvalues().iter().fold(0.0, |acc, z| acc.max(z.norm()));
    }
    match m.clone().schur().eigenvalues() {
        Some(ev) => ev.iter().fold(0.0, |acc, z| acc.max(z.norm())),
        None => {
            // Gelfand's formula as a fallback.
            let mut p = m.clone();
            for _ in 0..6 {
                p = &p * &p;
            }
            p.norm().powf(1.0 / 64.0)
        }
    }
}

pub(crate) fn is_real_matrix(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn repair_leaves_healthy_matrices_alone() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(1.0, 0.0)]);
        assert_eq!(repair_covariance(&m, 1e-12), m);
    }

    #[test]
    fn repair_floors_negative_eigenvalues() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let fixed = repair_covariance(&m, 1e-12);
        assert!(min_eigenvalue(&fixed) >= 1e-12 - 1e-15);
        assert!(is_hermitian(&fixed, 1e-14));
    }

    #[test]
    fn psd_factor_reproduces_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.0, 0.0)]);
        let l = psd_factor(&m);
        assert!((&l * l.adjoint() - &m).norm() < 1e-13);
        assert_eq!(psd_factor(&CMatrix::zeros(3, 3)), CMatrix::zeros(3, 3));
    }

    #[test]
    fn spectral_radius_of_rotation_and_complex_diag() {
        let (s, co) = (0.3f64.sin(), 0.3f64.cos());
        let rot = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
        assert!((spectral_radius(&rot.scale(0.9)) - 0.9).abs() < 1e-12);
        let d = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.5), c(1.0, 0.0), c(0.0, 0.0), c(0.3, 0.4)]);
        assert!((spectral_radius(&d) - 0.5).abs() < 1e-12);
    }
}
