//! Third-order tensors, their structural views, and the transform-domain
//! product algebra.
//!
//! Every tensor is stored with complex entries; real data simply has zero
//! imaginary parts. Frontal slices are contiguous and column-major, so
//! `slice(k)` is a cheap copy into an `I x J` matrix.

mod product;
mod transform;

pub use product::{hermitian_transpose, l_identity, l_product, l_product_bruteforce, tubal_mult};
pub use transform::{inverse_transform, transform, TransformKind, TubeTransform};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Dense `I x J x K` tensor of complex scalars.
///
/// Indices are zero-based in code; documentation follows the usual
/// one-based `(i, j, k)` notation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    rows: usize,
    cols: usize,
    tubes: usize,
    data: Vec<Complex64>,
}

impl Tensor3 {
    pub fn zeros(rows: usize, cols: usize, tubes: usize) -> Self {
        assert!(rows > 0 && cols > 0 && tubes > 0, "tensor dimensions must be positive");
        Tensor3 {
            rows,
            cols,
            tubes,
            data: vec![Complex64::new(0.0, 0.0); rows * cols * tubes],
        }
    }

    /// Builds a tensor from a closure over `(i, j, k)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        tubes: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        let mut t = Tensor3::zeros(rows, cols, tubes);
        for k in 0..tubes {
            for j in 0..cols {
                for i in 0..rows {
                    t.data[i + rows * (j + cols * k)] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Stacks `I x J` matrices as frontal slices.
    pub fn from_slices(slices: &[CMatrix]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Dimension("at least one frontal slice is required".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("frontal slices must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(rows * cols * slices.len());
        for (k, s) in slices.iter().enumerate() {
            if s.shape() != (rows, cols) {
                return Err(Error::Dimension(format!(
                    "slice {} has shape {:?}, expected {:?}",
                    k + 1,
                    s.shape(),
                    (rows, cols)
                )));
            }
            data.extend_from_slice(s.as_slice());
        }
        Ok(Tensor3 {
            rows,
            cols,
            tubes: slices.len(),
            data,
        })
    }

    /// Views a real `I x K` observation matrix as an `I x 1 x K` tensor:
    /// column `k` becomes frontal slice `k`.
    pub fn from_observation(obs: &DMatrix<f64>) -> Self {
        Tensor3::from_fn(obs.nrows(), 1, obs.ncols(), |i, _, k| Complex64::new(obs[(i, k)], 0.0))
    }

    pub fn from_real(rows: usize, cols: usize, tubes: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols * tubes {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols}x{tubes} tensor",
                values.len()
            )));
        }
        Ok(Tensor3 {
            rows,
            cols,
            tubes,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.tubes)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tubes(&self) -> usize {
        self.tubes
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols && k < self.tubes);
        i + self.rows * (j + self.cols * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[self.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex64) {
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    /// Raw entries in storage order: slice-major, column-major within a slice.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Frontal slice `A(:, :, k)`.
    pub fn slice(&self, k: usize) -> CMatrix {
        let n = self.rows * self.cols;
        CMatrix::from_column_slice(self.rows, self.cols, &self.data[k * n..(k + 1) * n])
    }

    pub fn set_slice(&mut self, k: usize, m: &CMatrix) {
        assert_eq!(m.shape(), (self.rows, self.cols), "slice shape mismatch");
        let n = self.rows * self.cols;
        self.data[k * n..(k + 1) * n].copy_from_slice(m.as_slice());
    }

    /// Mode-3 tube `A(i, j, :)`.
    pub fn tube(&self, i: usize, j: usize) -> Vec<Complex64> {
        (0..self.tubes).map(|k| self.get(i, j, k)).collect()
    }

    pub fn set_tube(&mut self, i: usize, j: usize, tube: &[Complex64]) {
        assert_eq!(tube.len(), self.tubes, "tube length mismatch");
        for (k, &v) in tube.iter().enumerate() {
            self.set(i, j, k, v);
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute imaginary part over all entries.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Real parts as an `I x K` matrix, for tensors with a unit middle
    /// dimension.
    pub fn real_observation(&self) -> Result<DMatrix<f64>> {
        if self.cols != 1 {
            return Err(Error::Dimension(format!(
                "expected an I x 1 x K tensor, got middle dimension {}",
                self.cols
            )));
        }
        Ok(DMatrix::from_fn(self.rows, self.tubes, |i, k| self.get(i, 0, k).re))
    }

    pub fn conj(&self) -> Tensor3 {
        Tensor3 {
            data: self.data.iter().map(|z| z.conj()).collect(),
            ..*self
        }
    }

    pub fn scale(&self, alpha: Complex64) -> Tensor3 {
        Tensor3 {
            data: self.data.iter().map(|z| z * alpha).collect(),
            ..*self
        }
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.check_same_dims(other)?;
        Ok(Tensor3 {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..*self
        })
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.check_same_dims(other)?;
        Ok(Tensor3 {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
            ..*self
        })
    }

    /// `||self - other||_F / ||other||_F`.
    pub fn relative_distance(&self, other: &Tensor3) -> Result<f64> {
        let diff = self.sub(other)?.frobenius_norm();
        let base = other.frobenius_norm();
        Ok(if base == 0.0 { diff } else { diff / base })
    }

    fn check_same_dims(&self, other: &Tensor3) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.dims(), other.dims())));
        }
        Ok(())
    }
}

/// The `IK x JK` block-diagonal matrix whose blocks are the frontal slices.
///
/// Only the blocks are stored; off-block entries are zero by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagView {
    blocks: Vec<CMatrix>,
}

impl BlockDiagView {
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        // Validates shapes.
        Tensor3::from_slices(&blocks)?;
        Ok(BlockDiagView { blocks })
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Materializes the full block-diagonal matrix.
    pub fn to_dense(&self) -> CMatrix {
        let (r, c) = self.blocks[0].shape();
        let k = self.blocks.len();
        let mut m = CMatrix::zeros(r * k, c * k);
        for (b, block) in self.blocks.iter().enumerate() {
            m.view_mut((b * r, b * c), (r, c)).copy_from(block);
        }
        m
    }

    /// Block-wise product `self * other`; blocks must be conformable.
    pub fn mul(&self, other: &BlockDiagView) -> Result<BlockDiagView> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::Dimension(format!(
                "{} blocks vs {} blocks",
                self.blocks.len(),
                other.blocks.len()
            )));
        }
        if self.blocks[0].ncols() != other.blocks[0].nrows() {
            return Err(Error::Dimension(format!(
                "block shapes {:?} and {:?} are not conformable",
                self.blocks[0].shape(),
                other.blocks[0].shape()
            )));
        }
        Ok(BlockDiagView {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        })
    }

    /// Conjugate transpose, block by block.
    pub fn adjoint(&self) -> BlockDiagView {
        BlockDiagView {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }
}

/// `MatView(A) = diag(A^(1), ..., A^(K))`.
pub fn mat_view(t: &Tensor3) -> BlockDiagView {
    BlockDiagView {
        blocks: (0..t.tubes()).map(|k| t.slice(k)).collect(),
    }
}

/// `Vec(B) = [B^(1); ...; B^(K)]` for an `I x 1 x K` tensor.
pub fn vec_view(t: &Tensor3) -> Result<CVector> {
    if t.cols() != 1 {
        return Err(Error::Dimension(format!(
            "vec_view needs a unit middle dimension, got {}",
            t.cols()
        )));
    }
    Ok(CVector::from_column_slice(t.as_slice()))
}

/// Folds a block-diagonal view back into the tensor it came from.
pub fn ten_view(view: &BlockDiagView) -> Tensor3 {
    Tensor3::from_slices(&view.blocks).expect("BlockDiagView holds validated blocks")
}

/// Folds a length-`I*K` vector back into an `I x 1 x K` tensor.
pub fn ten_view_vec(v: &CVector, tubes: usize) -> Result<Tensor3> {
    if tubes == 0 || v.len() % tubes != 0 || v.is_empty() {
        return Err(Error::Dimension(format!(
            "a vector of length {} cannot fold into {} slices",
            v.len(),
            tubes
        )));
    }
    let rows = v.len() / tubes;
    Ok(Tensor3 {
        rows,
        cols: 1,
        tubes,
        data: v.as_slice().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ramp(rows: usize, cols: usize, tubes: usize) -> Tensor3 {
        Tensor3::from_fn(rows, cols, tubes, |i, j, k| {
            Complex64::new((i + 10 * j + 100 * k) as f64, (i * j) as f64 - k as f64)
        })
    }

    #[test]
    fn mat_view_places_slices_on_the_diagonal() {
        let s1 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let s2 = CMatrix::from_row_slice(2, 2, &[c(5.0), c(6.0), c(7.0), c(8.0)]);
        let t = Tensor3::from_slices(&[s1.clone(), s2.clone()]).unwrap();
        let dense = mat_view(&t).to_dense();
        let expect = [
            [1.0, 2.0, 0.0, 0.0],
            [3.0, 4.0, 0.0, 0.0],
            [0.0, 0.0, 5.0, 6.0],
            [0.0, 0.0, 7.0, 8.0],
        ];
        for (r, row) in expect.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                assert_eq!(dense[(r, col)], c(v));
            }
        }
    }

    #[test]
    fn zero_tensor_gives_zero_blocks() {
        let view = mat_view(&Tensor3::zeros(3, 2, 4));
        assert_eq!(view.num_blocks(), 4);
        assert!(view.blocks().iter().all(|b| b.iter().all(|z| *z == c(0.0))));
    }

    #[test]
    fn views_round_trip_exactly() {
        let t = ramp(3, 4, 5);
        assert_eq!(ten_view(&mat_view(&t)), t);

        let v = ramp(4, 1, 3);
        assert_eq!(ten_view_vec(&vec_view(&v).unwrap(), 3).unwrap(), v);
    }

    #[test]
    fn vec_view_concatenates_slices() {
        let t = Tensor3::from_fn(2, 1, 2, |i, _, k| c((1 + i + 2 * k) as f64));
        let v = vec_view(&t).unwrap();
        assert_eq!(v.as_slice(), &[c(1.0), c(2.0), c(3.0), c(4.0)]);

        let tube = Tensor3::from_fn(1, 1, 3, |_, _, k| c(k as f64 + 0.5));
        assert_eq!(vec_view(&tube).unwrap().as_slice(), tube.tube(0, 0).as_slice());
    }

    #[test]
    fn vec_view_rejects_wide_tensors() {
        assert!(matches!(vec_view(&Tensor3::zeros(2, 2, 2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn slices_and_tubes_agree() {
        let t = ramp(3, 2, 4);
        for k in 0..4 {
            let s = t.slice(k);
            for i in 0..3 {
                for j in 0..2 {
                    assert_eq!(s[(i, j)], t.tube(i, j)[k]);
                }
            }
        }
    }

    #[test]
    fn observation_round_trip() {
        let obs = DMatrix::from_fn(3, 4, |i, k| (i * 4 + k) as f64 - 2.5);
        let t = Tensor3::from_observation(&obs);
        assert_eq!(t.dims(), (3, 1, 4));
        assert_eq!(t.real_observation().unwrap(), obs);
    }
}
