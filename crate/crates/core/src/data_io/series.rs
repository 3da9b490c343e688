use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of real `I x K` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries {
    name: String,
    rows: usize,
    tubes: usize,
    observations: Vec<DMatrix<f64>>,
}

impl TensorSeries {
    pub fn new(name: impl Into<String>, observations: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = observations
            .first()
            .ok_or_else(|| Error::InvalidData("a series needs at least one epoch".into()))?;
        let (rows, tubes) = first.shape();
        if rows == 0 || tubes == 0 {
            return Err(Error::InvalidData("observations must be non-empty".into()));
        }
        for (n, y) in observations.iter().enumerate() {
            if y.shape() != (rows, tubes) {
                return Err(Error::InvalidData(format!(
                    "epoch {} has shape {:?}, expected {:?}",
                    n + 1,
                    y.shape(),
                    (rows, tubes)
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!("epoch {} has a non-finite entry", n + 1)));
            }
        }
        Ok(TensorSeries {
            name: name.into(),
            rows,
            tubes,
            observations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn tubes(&self) -> usize {
        self.tubes
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[DMatrix<f64>] {
        &self.observations
    }

    /// The first `n` epochs.
    pub fn head(&self, n: usize) -> Result<TensorSeries> {
        self.range(0, n)
    }

    /// Epochs `start .. start + len` (zero-based).
    pub fn range(&self, start: usize, len: usize) -> Result<TensorSeries> {
        if len == 0 || start + len > self.len() {
            return Err(Error::InvalidArgument(format!(
                "epochs {}..{} lie outside a series of length {}",
                start + 1,
                start + len,
                self.len()
            )));
        }
        Ok(TensorSeries {
            name: self.name.clone(),
            rows: self.rows,
            tubes: self.tubes,
            observations: self.observations[start..start + len].to_vec(),
        })
    }
}

/// Train/test split: train on the first `n_train` epochs, test on the
/// `n_test` that follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
}

impl SplitSpec {
    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.n_train < 2 {
            return Err(Error::InvalidArgument(
                "the training span needs at least 2 epochs".into(),
            ));
        }
        if self.n_train + self.n_test > series_len {
            return Err(Error::InvalidArgument(format!(
                "train {} + test {} exceeds series length {}",
                self.n_train, self.n_test, series_len
            )));
        }
        Ok(())
    }

    pub fn apply(&self, series: &TensorSeries) -> Result<(TensorSeries, Vec<DMatrix<f64>>)> {
        self.validate(series.len())?;
        let train = series.head(self.n_train)?;
        let test = series.observations()[self.n_train..self.n_train + self.n_test].to_vec();
        Ok((train, test))
    }
}

/// Dataset manifest (TOML).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub rows: usize,
    pub tubes: usize,
    pub length: usize,
    #[serde(default)]
    pub name: String,
}

pub(crate) fn check_overwrite(path: &Path, overwrite: bool) -> Result<()> {
    if !overwrite && path.exists() {
        return Err(Error::WouldOverwrite(path.display().to_string()));
    }
    Ok(())
}

/// 17 significant digits; enough to round-trip any `f64`.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let manifest: Manifest = toml::from_str(&fs::read_to_string(path)?)?;
    if manifest.rows == 0 || manifest.tubes == 0 || manifest.length == 0 {
        return Err(Error::InvalidData(format!(
            "{}: rows, tubes and length must be positive",
            path.display()
        )));
    }
    Ok(manifest)
}

/// Reads a manifest plus a long-format `epoch,row,tube,value` file with
/// one-based indices. Every cell must appear exactly once; blank lines are
/// ignored.
pub fn load_series(manifest_path: &Path, data_path: &Path) -> Result<TensorSeries> {
    let manifest = read_manifest(manifest_path)?;
    let text = fs::read_to_string(data_path)?;
    let src = data_path.display().to_string();
    let err = |line: usize, msg: String| Error::Parse {
        path: src.clone(),
        line,
        msg,
    };

    let (rows, tubes, length) = (manifest.rows, manifest.tubes, manifest.length);
    let mut values = vec![f64::NAN; rows * tubes * length];
    let mut seen_at = vec![0usize; rows * tubes * length];

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(line_no, format!("expected 4 fields, found {}", fields.len())));
        }
        let index = |pos: usize, name: &str, max: usize| -> Result<usize> {
            let v: usize = fields[pos]
                .parse()
                .map_err(|_| err(line_no, format!("{name} {:?} is not an integer", fields[pos])))?;
            if v == 0 || v > max {
                return Err(err(line_no, format!("{name} {v} out of range 1..={max}")));
            }
            Ok(v - 1)
        };
        let epoch = index(0, "epoch", length)?;
        let row = index(1, "row", rows)?;
        let tube = index(2, "tube", tubes)?;
        let value: f64 = fields[3]
            .parse()
            .map_err(|_| err(line_no, format!("value {:?} is not a number", fields[3])))?;
        if !value.is_finite() {
            return Err(err(line_no, format!("non-finite value {}", fields[3])));
        }
        let cell = (epoch * tubes + tube) * rows + row;
        if seen_at[cell] != 0 {
            return Err(err(
                line_no,
                format!(
                    "duplicate cell (epoch {}, row {}, tube {}), first given on line {}",
                    epoch + 1,
                    row + 1,
                    tube + 1,
                    seen_at[cell]
                ),
            ));
        }
        seen_at[cell] = line_no;
        values[cell] = value;
    }

    if let Some(missing) = seen_at.iter().position(|&s| s == 0) {
        let (row, rest) = (missing % rows, missing / rows);
        let (tube, epoch) = (rest % tubes, rest / tubes);
        return Err(err(
            text.lines().count() + 1,
            format!("missing cell (epoch {}, row {}, tube {})", epoch + 1, row + 1, tube + 1),
        ));
    }

    let observations = values
        .chunks(rows * tubes)
        .map(|c| DMatrix::from_column_slice(rows, tubes, c))
        .collect();
    TensorSeries::new(manifest.name, observations)
}

/// Writes observations in long format, epochs numbered from `first_epoch`.
pub fn write_long_format(
    path: &Path,
    observations: &[DMatrix<f64>],
    first_epoch: usize,
    overwrite: bool,
) -> Result<()> {
    check_overwrite(path, overwrite)?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    for (n, y) in observations.iter().enumerate() {
        for i in 0..y.nrows() {
            for k in 0..y.ncols() {
                writeln!(w, "{},{},{},{}", first_epoch + n, i + 1, k + 1, format_value(y[(i, k)]))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the manifest and data file; epoch-major, then row, then tube.
pub fn save_series(series: &TensorSeries, manifest_path: &Path, data_path: &Path, overwrite: bool) -> Result<()> {
    check_overwrite(manifest_path, overwrite)?;
    check_overwrite(data_path, overwrite)?;
    let manifest = Manifest {
        rows: series.rows(),
        tubes: series.tubes(),
        length: series.len(),
        name: series.name().to_string(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::InvalidData(e.to_string()))?;
    fs::write(manifest_path, text)?;
    write_long_format(data_path, series.observations(), 1, true)
}
