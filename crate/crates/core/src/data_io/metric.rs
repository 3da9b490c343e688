use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `||predicted - actual||_F / ||actual||_F`.
pub fn relative_error(predicted: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<f64> {
    if predicted.shape() != actual.shape() {
        return Err(Error::Dimension(format!(
            "prediction {:?} vs actual {:?}",
            predicted.shape(),
            actual.shape()
        )));
    }
    let denom = actual.norm();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    Ok((predicted - actual).norm() / denom)
}
