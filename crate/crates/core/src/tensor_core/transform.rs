use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::Tensor3;
use crate::error::{Error, Result};

/// Invertible 1-D transform applied along mode 3.
///
/// * `Dft`: unnormalized forward DFT, inverse scaled by `1/K`.
/// * `Dct`: orthonormal DCT-II (inverse is its transpose, DCT-III).
/// * `Dwt`: orthonormal Haar wavelet transform; `levels: None` means the full
///   `log2(K)` decomposition. Needs `K` to be a power of two.
/// * `Identity`: no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TransformKind {
    Dft,
    Dct,
    Dwt { levels: Option<u32> },
    Identity,
}

impl TransformKind {
    pub const DWT: TransformKind = TransformKind::Dwt { levels: None };

    /// True when the transform maps real tubes to real tubes.
    pub fn is_real(&self) -> bool {
        !matches!(self, TransformKind::Dft)
    }

    /// True for the orthonormal kinds, which preserve the Frobenius norm.
    pub fn is_orthonormal(&self) -> bool {
        !matches!(self, TransformKind::Dft)
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        let bad = || Error::IncompatibleLength {
            kind: self.to_string(),
            len,
        };
        if len == 0 {
            return Err(bad());
        }
        if let TransformKind::Dwt { levels } = self {
            if !len.is_power_of_two() {
                return Err(bad());
            }
            if let Some(l) = levels {
                if *l > len.trailing_zeros() {
                    return Err(bad());
                }
            }
        }
        Ok(())
    }

    /// For DFT on real data, the transform-domain slice `k` (zero-based) is
    /// the complex conjugate of slice `K - k`. Returns that partner when it
    /// is a different slice.
    pub fn conjugate_partner(&self, k: usize, tubes: usize) -> Option<usize> {
        match self {
            TransformKind::Dft if k != 0 && 2 * k != tubes => Some(tubes - k),
            _ => None,
        }
    }

    /// Whether transform-domain slice `k` of a real series is itself real.
    pub fn slice_is_real(&self, k: usize, tubes: usize) -> bool {
        self.is_real() || self.conjugate_partner(k, tubes).is_none()
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformKind::Dft => f.write_str("dft"),
            TransformKind::Dct => f.write_str("dct"),
            TransformKind::Dwt { levels: None } => f.write_str("dwt"),
            TransformKind::Dwt { levels: Some(l) } => write!(f, "dwt:{l}"),
            TransformKind::Identity => f.write_str("identity"),
        }
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dft" => Ok(TransformKind::Dft),
            "dct" => Ok(TransformKind::Dct),
            "dwt" => Ok(TransformKind::DWT),
            "identity" => Ok(TransformKind::Identity),
            other => match other.strip_prefix("dwt:").map(str::parse::<u32>) {
                Some(Ok(l)) if l > 0 => Ok(TransformKind::Dwt { levels: Some(l) }),
                _ => Err(Error::InvalidArgument(format!(
                    "unknown transform {s:?} (expected dft, dct, dwt, dwt:<levels> or identity)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for TransformKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TransformKind> for String {
    fn from(k: TransformKind) -> String {
        k.to_string()
    }
}

enum Plan {
    Dft {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    // Row-major K x K orthonormal DCT-II matrix.
    Dct(Vec<f64>),
    Haar(u32),
    Identity,
}

/// A transform specialised to one tube length, reusable across tubes.
pub struct TubeTransform {
    kind: TransformKind,
    len: usize,
    plan: Plan,
}

impl TubeTransform {
    pub fn new(kind: TransformKind, len: usize) -> Result<Self> {
        kind.check_len(len)?;
        let plan = match kind {
            TransformKind::Dft => {
                let mut planner = FftPlanner::new();
                Plan::Dft {
                    forward: planner.plan_fft_forward(len),
                    inverse: planner.plan_fft_inverse(len),
                }
            }
            TransformKind::Dct => {
                let n = len as f64;
                let mut basis = vec![0.0; len * len];
                for m in 0..len {
                    let scale = if m == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                    for t in 0..len {
                        basis[m * len + t] = scale * (PI * (t as f64 + 0.5) * m as f64 / n).cos();
                    }
                }
                Plan::Dct(basis)
            }
            TransformKind::Dwt { levels } => Plan::Haar(levels.unwrap_or_else(|| len.trailing_zeros())),
            TransformKind::Identity => Plan::Identity,
        };
        Ok(TubeTransform { kind, len, plan })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, tube: &mut [Complex64]) {
        assert_eq!(tube.len(), self.len, "tube length mismatch");
        match &self.plan {
            Plan::Dft { forward, .. } => forward.process(tube),
            Plan::Dct(basis) => {
                let out: Vec<Complex64> = (0..self.len)
                    .map(|m| {
                        let row = &basis[m * self.len..(m + 1) * self.len];
                        row.iter().zip(tube.iter()).map(|(b, x)| x * b).sum()
                    })
                    .collect();
                tube.copy_from_slice(&out);
            }
            Plan::Haar(levels) => haar_forward(tube, *levels),
            Plan::Identity => {}
        }
    }

    pub fn inverse(&self, tube: &mut [Complex64]) {
        assert_eq!(tube.len(), self.len, "tube length mismatch");
        match &self.plan {
            Plan::Dft { inverse, .. } => {
                inverse.process(tube);
                let s = 1.0 / self.len as f64;
                tube.iter_mut().for_each(|z| *z *= s);
            }
            Plan::Dct(basis) => {
                let out: Vec<Complex64> = (0..self.len)
                    .map(|t| (0..self.len).map(|m| tube[m] * basis[m * self.len + t]).sum())
                    .collect();
                tube.copy_from_slice(&out);
            }
            Plan::Haar(levels) => haar_inverse(tube, *levels),
            Plan::Identity => {}
        }
    }

    /// Applies the forward transform to every mode-3 tube.
    pub fn forward_tensor(&self, t: &Tensor3) -> Tensor3 {
        self.map_tubes(t, |tube| self.forward(tube))
    }

    pub fn inverse_tensor(&self, t: &Tensor3) -> Tensor3 {
        self.map_tubes(t, |tube| self.inverse(tube))
    }

    fn map_tubes(&self, t: &Tensor3, f: impl Fn(&mut [Complex64])) -> Tensor3 {
        assert_eq!(t.tubes(), self.len, "tube length mismatch");
        let mut out = t.clone();
        if matches!(self.plan, Plan::Identity) {
            return out;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for j in 0..t.cols() {
            for i in 0..t.rows() {
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = t.get(i, j, k);
                }
                f(&mut buf);
                out.set_tube(i, j, &buf);
            }
        }
        out
    }
}

fn haar_forward(x: &mut [Complex64], levels: u32) {
    let mut scratch = x.to_vec();
    let mut n = x.len();
    for _ in 0..levels {
        let half = n / 2;
        for i in 0..half {
            let (a, b) = (x[2 * i], x[2 * i + 1]);
            scratch[i] = (a + b) * std::f64::consts::FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * std::f64::consts::FRAC_1_SQRT_2;
        }
        x[..n].copy_from_slice(&scratch[..n]);
        n = half;
    }
}

fn haar_inverse(x: &mut [Complex64], levels: u32) {
    let mut scratch = x.to_vec();
    let mut n = x.len() >> levels;
    for _ in 0..levels {
        for i in 0..n {
            let (a, d) = (x[i], x[n + i]);
            scratch[2 * i] = (a + d) * std::f64::consts::FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (a - d) * std::f64::consts::FRAC_1_SQRT_2;
        }
        n *= 2;
        x[..n].copy_from_slice(&scratch[..n]);
    }
}

/// `L(t)`: transform every mode-3 tube.
pub fn transform(t: &Tensor3, kind: TransformKind) -> Result<Tensor3> {
    Ok(TubeTransform::new(kind, t.tubes())?.forward_tensor(t))
}

/// `L^{-1}(t)`.
pub fn inverse_transform(t: &Tensor3, kind: TransformKind) -> Result<Tensor3> {
    Ok(TubeTransform::new(kind, t.tubes())?.inverse_tensor(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tube_tensor(values: &[f64]) -> Tensor3 {
        Tensor3::from_real(1, 1, values.len(), values).unwrap()
    }

    const KINDS: [TransformKind; 4] = [
        TransformKind::Dft,
        TransformKind::Dct,
        TransformKind::DWT,
        TransformKind::Identity,
    ];

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|m| {
                x.iter()
                    .enumerate()
                    .map(|(t, v)| {
                        let ang = -2.0 * PI * (m * t) as f64 / n as f64;
                        v * Complex64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dft_of_impulse_is_flat() {
        let out = transform(&tube_tensor(&[1.0, 0.0, 0.0, 0.0]), TransformKind::Dft).unwrap();
        for z in out.tube(0, 0) {
            assert!((z - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn two_point_dft_and_inverse() {
        let fwd = transform(&tube_tensor(&[1.0, 2.0]), TransformKind::Dft).unwrap();
        assert_eq!(fwd.tube(0, 0), vec![c(3.0), c(-1.0)]);
        let back = inverse_transform(&fwd, TransformKind::Dft).unwrap();
        assert_eq!(back.tube(0, 0), vec![c(1.0), c(2.0)]);
    }

    #[test]
    fn dft_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in [1, 2, 3, 5, 8, 12] {
            let x: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let plan = TubeTransform::new(TransformKind::Dft, len).unwrap();
            let mut y = x.clone();
            plan.forward(&mut y);
            for (a, b) in y.iter().zip(naive_dft(&x)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_is_exact() {
        let t = Tensor3::from_fn(2, 3, 5, |i, j, k| Complex64::new(i as f64, (j * k) as f64));
        assert_eq!(transform(&t, TransformKind::Identity).unwrap(), t);
    }

    #[test]
    fn inverse_of_zero_is_zero() {
        for kind in KINDS {
            let z = Tensor3::zeros(2, 2, 8);
            assert_eq!(inverse_transform(&z, kind).unwrap().frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn round_trip_each_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in KINDS {
            let t = Tensor3::from_fn(3, 3, 8, |_, _, _| c(rng.random_range(-5.0..5.0)));
            let back = inverse_transform(&transform(&t, kind).unwrap(), kind).unwrap();
            assert!(back.relative_distance(&t).unwrap() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn haar_two_point() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let out = transform(&tube_tensor(&[1.0, 3.0]), TransformKind::DWT).unwrap();
        let tube = out.tube(0, 0);
        assert!((tube[0] - c(4.0 * s)).norm() < 1e-15);
        assert!((tube[1] - c(-2.0 * s)).norm() < 1e-15);
    }

    #[test]
    fn partial_haar_levels_round_trip() {
        let t = tube_tensor(&[1.0, -2.0, 3.5, 0.25, 7.0, 1.0, -1.0, 2.0]);
        for levels in 1..=3 {
            let kind = TransformKind::Dwt { levels: Some(levels) };
            let back = inverse_transform(&transform(&t, kind).unwrap(), kind).unwrap();
            assert!(back.relative_distance(&t).unwrap() < 1e-14);
        }
    }

    #[test]
    fn dwt_rejects_non_power_of_two() {
        let err = transform(&Tensor3::zeros(1, 1, 6), TransformKind::DWT).unwrap_err();
        assert!(matches!(err, Error::IncompatibleLength { len: 6, .. }));
        let too_deep = TransformKind::Dwt { levels: Some(3) };
        assert!(transform(&Tensor3::zeros(1, 1, 4), too_deep).is_err());
    }

    #[test]
    fn dct_basis_is_orthonormal() {
        let plan = TubeTransform::new(TransformKind::Dct, 7).unwrap();
        let Plan::Dct(b) = &plan.plan else { unreachable!() };
        for p in 0..7 {
            for q in 0..7 {
                let dot: f64 = (0..7).map(|t| b[p * 7 + t] * b[q * 7 + t]).sum();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn kind_strings_round_trip() {
        for kind in [
            TransformKind::Dft,
            TransformKind::Dct,
            TransformKind::DWT,
            TransformKind::Dwt { levels: Some(2) },
            TransformKind::Identity,
        ] {
            assert_eq!(kind.to_string().parse::<TransformKind>().unwrap(), kind);
        }
        assert!("fft".parse::<TransformKind>().is_err());
        assert!("dwt:0".parse::<TransformKind>().is_err());
    }

    #[test]
    fn conjugate_partners() {
        let k = TransformKind::Dft;
        assert_eq!(k.conjugate_partner(0, 6), None);
        assert_eq!(k.conjugate_partner(1, 6), Some(5));
        assert_eq!(k.conjugate_partner(3, 6), None);
        assert_eq!(k.conjugate_partner(2, 5), Some(3));
        assert_eq!(TransformKind::Dct.conjugate_partner(1, 6), None);
    }
}
