use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::check_overwrite;
use crate::error::{Error, Result};
use crate::gaussian_lds::{CovarianceMode, SliceLdsParams};
use crate::lmlds::{LmldsModel, ModelDims};
use crate::tensor_core::{CMatrix, CVector, TransformKind};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

type Pair = [f64; 2];

/// On-disk layout. Matrices are row-major nested arrays of `[re, im]`.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    transform: TransformKind,
    dims: ModelDims,
    mode: CovarianceMode,
    seed: u64,
    n_train: usize,
    slices: Vec<SliceRecord>,
}

#[derive(Serialize, Deserialize)]
struct SliceRecord {
    u0: Vec<Pair>,
    q0: Vec<Vec<Pair>>,
    a: Vec<Vec<Pair>>,
    q: Vec<Vec<Pair>>,
    c: Vec<Vec<Pair>>,
    r: Vec<Vec<Pair>>,
    last_latent: Vec<Pair>,
}

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn vec_out(v: &CVector) -> Vec<Pair> {
    v.iter().map(pair).collect()
}

fn mat_out(m: &CMatrix) -> Vec<Vec<Pair>> {
    m.row_iter().map(|r| r.iter().map(pair).collect()).collect()
}

fn vec_in(v: &[Pair]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| Complex64::new(p[0], p[1])))
}

fn mat_in(rows: &[Vec<Pair>], name: &str, slice: usize) -> Result<CMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!(
            "slice {slice}: matrix {name} is ragged or empty"
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Serializes a model to the JSON model-file format.
pub fn model_to_json(model: &LmldsModel) -> Result<String> {
    let file = ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        transform: model.kind,
        dims: model.dims,
        mode: model.mode,
        seed: model.seed,
        n_train: model.n_train,
        slices: model
            .slices
            .iter()
            .zip(&model.last_latents)
            .map(|(p, m)| SliceRecord {
                u0: vec_out(&p.u0),
                q0: mat_out(&p.q0),
                a: mat_out(&p.a),
                q: mat_out(&p.q),
                c: mat_out(&p.c),
                r: mat_out(&p.r),
                last_latent: vec_out(m),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn save_model(model: &LmldsModel, path: &Path, overwrite: bool) -> Result<()> {
    check_overwrite(path, overwrite)?;
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<LmldsModel> {
    model_from_json(&fs::read_to_string(path)?)
}

pub(crate) fn model_from_json(text: &str) -> Result<LmldsModel> {
    let raw: serde_json::Value = serde_json::from_str(text)?;
    let found = raw
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::InvalidData("model file has no schema_version".into()))?;
    if found != MODEL_SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersion {
            found: found.try_into().unwrap_or(u32::MAX),
            expected: MODEL_SCHEMA_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(raw)?;
    if file.slices.len() != file.dims.tubes {
        return Err(Error::Dimension(format!(
            "dims declare {} slices but the file holds {}",
            file.dims.tubes,
            file.slices.len()
        )));
    }
    let mut slices = Vec::with_capacity(file.slices.len());
    let mut last_latents = Vec::with_capacity(file.slices.len());
    for (k, rec) in file.slices.iter().enumerate() {
        let s = k + 1;
        slices.push(SliceLdsParams {
            u0: vec_in(&rec.u0),
            q0: mat_in(&rec.q0, "q0", s)?,
            a: mat_in(&rec.a, "a", s)?,
            q: mat_in(&rec.q, "q", s)?,
            c: mat_in(&rec.c, "c", s)?,
            r: mat_in(&rec.r, "r", s)?,
        });
        last_latents.push(vec_in(&rec.last_latent));
    }
    let model = LmldsModel {
        kind: file.transform,
        dims: file.dims,
        mode: file.mode,
        seed: file.seed,
        n_train: file.n_train,
        slices,
        last_latents,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmlds::init_model;

    fn model() -> LmldsModel {
        init_model(
            ModelDims::new(3, 2, 4),
            TransformKind::Dft,
            CovarianceMode::Diagonal,
            17,
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut m = model();
        m.slices[1].q[(0, 1)] = Complex64::new(0.1 + 0.2, 1.0 / 3.0);
        m.slices[1].q[(1, 0)] = m.slices[1].q[(0, 1)].conj();
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn tampered_slice_count() {
        let text = model_to_json(&model())
            .unwrap()
            .replacen("\"tubes\": 4", "\"tubes\": 8", 1);
        assert!(matches!(model_from_json(&text), Err(Error::Dimension(_))));
    }

    #[test]
    fn unknown_schema_version() {
        let text = model_to_json(&model())
            .unwrap()
            .replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
        assert!(matches!(
            model_from_json(&text),
            Err(Error::SchemaVersion { found: 99, expected: 1 })
        ));
    }

    #[test]
    fn non_hermitian_covariance_rejected() {
        let mut m = model();
        m.slices[0].r[(0, 1)] = Complex64::new(0.5, 0.0);
        let text = model_to_json(&m).unwrap();
        assert!(model_from_json(&text).is_err());
    }

    #[test]
    fn save_refuses_to_clobber() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model(), &path, false).unwrap();
        assert!(matches!(
            save_model(&model(), &path, false),
            Err(Error::WouldOverwrite(_))
        ));
        assert_eq!(load_model(&path).unwrap(), model());
    }
}
