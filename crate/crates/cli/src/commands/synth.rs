use std::path::PathBuf;

use lmlds::data_io::{generate_synthetic, save_model, save_series, SyntheticSpec};
use lmlds::lmlds::ModelDims;

use crate::settings::{ConfigArg, Problems};
use crate::CliError;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    config: ConfigArg,
    /// Rows I of each observation
    #[arg(long)]
    rows: Option<usize>,
    /// Tubes K of each observation
    #[arg(long)]
    tubes: Option<usize>,
    /// Latent width J of the ground-truth slice systems
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Number of epochs
    #[arg(long)]
    length: Option<usize>,
    /// Transform of the ground-truth model
    #[arg(long)]
    transform: Option<String>,
    /// Spectral radius of every ground-truth transition, in (0, 1)
    #[arg(long)]
    rho: Option<f64>,
    /// Multiplier on the ground-truth covariances
    #[arg(long)]
    noise_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Manifest to write
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Data file to write
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Also write the ground-truth model here
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Replace existing output files
    #[arg(long)]
    overwrite: bool,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let mut s = args.config.load()?;
    macro_rules! take {
        ($($f:ident),+) => { $(if args.$f.is_some() { s.$f = args.$f.clone(); })+ };
    }
    take!(
        rows,
        tubes,
        latent_dim,
        length,
        transform,
        rho,
        noise_scale,
        seed,
        manifest,
        data,
        out
    );
    s.overwrite |= args.overwrite;

    let mut p = Problems::default();
    let rows = p.require(&s.rows, "rows").unwrap_or(1);
    let tubes = p.require(&s.tubes, "tubes").unwrap_or(1);
    let length = p.require(&s.length, "length").unwrap_or(1);
    let latent = s.latent_dim.unwrap_or(2);
    let kind = s.transform(&mut p);
    let (manifest, data) = s.dataset(&mut p).unzip();
    if rows == 0 || tubes == 0 || length == 0 {
        p.push("--rows, --tubes and --length must be positive");
    }
    if latent == 0 || latent > rows {
        p.push(format!("--latent-dim must lie in 1..={rows}"));
    }
    if let Err(e) = kind.check_len(tubes) {
        p.push(format!("--transform: {e}"));
    }
    let mut spec = SyntheticSpec::new(ModelDims::new(rows, latent, tubes), kind, s.seed(), length);
    spec.rho = s.rho.unwrap_or(spec.rho);
    spec.noise_scale = s.noise_scale.unwrap_or(spec.noise_scale);
    if !(spec.rho > 0.0 && spec.rho < 1.0) {
        p.push("--rho must lie in (0, 1)");
    }
    if !(spec.noise_scale >= 0.0 && spec.noise_scale.is_finite()) {
        p.push("--noise-scale must be finite and non-negative");
    }
    p.finish()?;
    let (manifest, data) = (manifest.expect("validated"), data.expect("validated"));

    let (series, truth) = generate_synthetic(&spec)?;
    save_series(&series, &manifest, &data, s.overwrite)?;
    if let Some(out) = &s.out {
        save_model(&truth, out, s.overwrite)?;
    }
    Ok(())
}
