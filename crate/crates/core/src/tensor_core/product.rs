use num_complex::Complex64;

use super::{CMatrix, Tensor3, TransformKind, TubeTransform};
use crate::error::{Error, Result};

/// Tubal-scalar multiplication `L^{-1}(L(a) o L(b))`.
pub fn tubal_mult(a: &[Complex64], b: &[Complex64], kind: TransformKind) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("tubes of length {} and {}", a.len(), b.len())));
    }
    let plan = TubeTransform::new(kind, a.len())?;
    tubal_mult_with(&plan, a, b)
}

fn tubal_mult_with(plan: &TubeTransform, a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let (mut fa, mut fb) = (a.to_vec(), b.to_vec());
    plan.forward(&mut fa);
    plan.forward(&mut fb);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    plan.inverse(&mut prod);
    Ok(prod)
}

fn check_product_dims(a: &Tensor3, b: &Tensor3) -> Result<()> {
    let (_, p, ka) = a.dims();
    let (p2, _, kb) = b.dims();
    if p != p2 || ka != kb {
        return Err(Error::Dimension(format!(
            "cannot form the L-product of {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

/// L-product computed as independent slice products in the transform domain.
pub fn l_product(a: &Tensor3, b: &Tensor3, kind: TransformKind) -> Result<Tensor3> {
    check_product_dims(a, b)?;
    let plan = TubeTransform::new(kind, a.tubes())?;
    let (ta, tb) = (plan.forward_tensor(a), plan.forward_tensor(b));
    let slices: Vec<CMatrix> = (0..a.tubes()).map(|k| ta.slice(k) * tb.slice(k)).collect();
    Ok(plan.inverse_tensor(&Tensor3::from_slices(&slices)?))
}

/// L-product from its definition: each output tube is a sum of tubal
/// products over the inner index. Quadratically slower than [`l_product`];
/// kept as an independent check.
pub fn l_product_bruteforce(a: &Tensor3, b: &Tensor3, kind: TransformKind) -> Result<Tensor3> {
    check_product_dims(a, b)?;
    let (rows, inner, tubes) = a.dims();
    let cols = b.cols();
    let plan = TubeTransform::new(kind, tubes)?;
    let mut out = Tensor3::zeros(rows, cols, tubes);
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = vec![Complex64::new(0.0, 0.0); tubes];
            for p in 0..inner {
                let term = tubal_mult_with(&plan, &a.tube(i, p), &b.tube(p, j))?;
                acc.iter_mut().zip(term).for_each(|(s, t)| *s += t);
            }
            out.set_tube(i, j, &acc);
        }
    }
    Ok(out)
}

/// `C^H`: the tensor whose transform-domain slices are the conjugate
/// transposes of those of `c`.
pub fn hermitian_transpose(c: &Tensor3, kind: TransformKind) -> Result<Tensor3> {
    let plan = TubeTransform::new(kind, c.tubes())?;
    let tc = plan.forward_tensor(c);
    let slices: Vec<CMatrix> = (0..c.tubes()).map(|k| tc.slice(k).adjoint()).collect();
    Ok(plan.inverse_tensor(&Tensor3::from_slices(&slices)?))
}

/// The `n x n x K` tensor whose transform-domain slices are all identity.
pub fn l_identity(n: usize, tubes: usize, kind: TransformKind) -> Result<Tensor3> {
    let plan = TubeTransform::new(kind, tubes)?;
    let eye = CMatrix::identity(n, n);
    let slices = vec![eye; tubes];
    Ok(plan.inverse_tensor(&Tensor3::from_slices(&slices)?))
}
