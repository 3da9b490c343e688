//! Dataset files, synthetic data, model files and the forecast metric.

mod metric;
mod model_file;
mod series;
mod synthetic;

pub use metric::relative_error;
pub use model_file::{load_model, model_to_json, save_model, MODEL_SCHEMA_VERSION};
pub use series::{load_series, read_manifest, save_series, write_long_format, Manifest, SplitSpec, TensorSeries};
pub use synthetic::{generate_synthetic, SyntheticSpec, SYNTHETIC_IMAG_LIMIT};
