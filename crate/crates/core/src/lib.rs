//! Forecasting for tensor time series with transform-domain multilinear
//! dynamical systems.
//!
//! Each observation is an `I x K` real matrix, read as an `I x 1 x K` tensor.
//! An invertible transform along the third mode ([`tensor_core`]) splits the
//! model into `K` independent linear-Gaussian state-space systems, one per
//! frontal slice. Those are fitted by expectation-maximization
//! ([`gaussian_lds`]), trained in parallel and recombined into forecasts
//! ([`lmlds`]). [`data_io`] covers dataset and model files, synthetic data and
//! the relative-error metric.
//!
//! ```
//! use lmlds::data_io::{generate_synthetic, SyntheticSpec};
//! use lmlds::lmlds::{predict, train, ModelDims, TrainOptions};
//! use lmlds::tensor_core::TransformKind;
//!
//! let spec = SyntheticSpec::new(ModelDims::new(4, 2, 6), TransformKind::Dft, 7, 120);
//! let (series, _truth) = generate_synthetic(&spec)?;
//! let fitted = train(&series, 2, TransformKind::Dft, 7, &TrainOptions::default())?;
//! let forecast = predict(&fitted.model, 5)?;
//! assert_eq!(forecast.epochs.len(), 5);
//! assert_eq!(forecast.epochs[0].shape(), (4, 6));
//! # Ok::<(), lmlds::Error>(())
//! ```

pub mod data_io;
pub mod error;
pub mod gaussian_lds;
pub mod lmlds;
pub mod tensor_core;

pub use error::{Error, ErrorCategory, Result};

// The guide's code listings run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tensor-algebra.md")]
    mod tensor_algebra {}
    #[doc = include_str!("../../../book/src/slice-systems.md")]
    mod slice_systems {}
    #[doc = include_str!("../../../book/src/training-and-forecasting.md")]
    mod training_and_forecasting {}
    #[doc = include_str!("../../../book/src/parameter-accounting.md")]
    mod parameter_accounting {}
    #[doc = include_str!("../../../book/src/data-and-cli.md")]
    mod data_and_cli {}
}
