use std::path::PathBuf;

use lmlds::data_io::{load_model, write_long_format};
use lmlds::lmlds::predict;
use lmlds::Error;

use super::manifest;
use crate::settings::{ConfigArg, DatasetArgs, OutArgs, Problems};
use crate::CliError;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    config: ConfigArg,
    /// Model file written by `train`
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Number of epochs to forecast
    #[arg(long)]
    horizon: Option<usize>,
    /// Optional dataset to check the model against
    #[command(flatten)]
    dataset: DatasetArgs,
    #[command(flatten)]
    out: OutArgs,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let mut s = args.config.load()?;
    args.dataset.apply(&mut s);
    args.out.apply(&mut s);
    if args.model.is_some() {
        s.model = args.model.clone();
    }
    if args.horizon.is_some() {
        s.horizon = args.horizon;
    }

    let mut p = Problems::default();
    let model_path = p.require(&s.model, "model");
    let horizon = p.require(&s.horizon, "horizon").unwrap_or(1);
    if horizon == 0 {
        p.push("--horizon must be at least 1");
    }
    let out = s.out(&mut p);
    if s.data.is_some() != s.manifest.is_some() {
        p.push("--data and --manifest must be given together");
    }
    p.finish()?;

    let model = load_model(&model_path.expect("validated"))?;
    if let Some(m) = manifest(s.manifest.as_deref())? {
        if (m.rows, m.tubes) != (model.dims.rows, model.dims.tubes) {
            return Err(Error::Dimension(format!(
                "dataset is {}x{} per epoch but the model expects {}x{}",
                m.rows, m.tubes, model.dims.rows, model.dims.tubes
            ))
            .into());
        }
        if m.length < model.n_train {
            return Err(Error::Dimension(format!(
                "model was trained on {} epochs but the dataset has {}",
                model.n_train, m.length
            ))
            .into());
        }
    }

    let prediction = predict(&model, horizon)?;
    log::info!("largest imaginary residue discarded: {:e}", prediction.max_imag_residue);
    write_long_format(&out, &prediction.epochs, model.n_train + 1, s.overwrite)?;
    Ok(())
}
