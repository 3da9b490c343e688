use serde::Serialize;

use lmlds::lmlds::{latent_dim_for_budget, param_count, ModelFamily};

use crate::settings::Problems;
use crate::CliError;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Rows I of each observation
    #[arg(long)]
    rows: Option<usize>,
    /// Tubes K of each observation
    #[arg(long)]
    tubes: Option<usize>,
    /// Latent width J to count parameters for
    #[arg(long)]
    latent_dim: Option<usize>,
    /// Budget to convert into latent widths
    #[arg(long)]
    param_budget: Option<u64>,
}

#[derive(Serialize)]
struct Counts {
    lds: u64,
    mlds: u64,
    l_mlds: u64,
}

#[derive(Serialize)]
struct BudgetFit {
    param_budget: u64,
    /// Largest slice latent width within the budget.
    l_mlds_latent_dim: Option<u64>,
    /// Smallest vectorized latent width reaching the budget.
    lds_latent_dim: u64,
}

#[derive(Serialize)]
struct Output {
    rows: usize,
    tubes: usize,
    latent_dim: Option<usize>,
    counts: Option<Counts>,
    budget: Option<BudgetFit>,
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let mut p = Problems::default();
    let rows = p.require(&args.rows, "rows").unwrap_or(0);
    let tubes = p.require(&args.tubes, "tubes").unwrap_or(0);
    if args.latent_dim.is_none() && args.param_budget.is_none() {
        p.push("give --latent-dim, --param-budget or both");
    }
    if args.rows == Some(0) || args.tubes == Some(0) || args.latent_dim == Some(0) {
        p.push("dimensions must be positive");
    }
    p.finish()?;

    let (i, k) = (rows as u64, tubes as u64);
    let counts = args.latent_dim.map(|j| Counts {
        lds: param_count(ModelFamily::Lds, i, j as u64, k),
        mlds: param_count(ModelFamily::Mlds, i, j as u64, k),
        l_mlds: param_count(ModelFamily::LMlds, i, j as u64, k),
    });
    let budget = match args.param_budget {
        None => None,
        Some(b) => Some(BudgetFit {
            param_budget: b,
            l_mlds_latent_dim: latent_dim_for_budget(ModelFamily::LMlds, i, k, b).ok(),
            lds_latent_dim: latent_dim_for_budget(ModelFamily::Lds, i, k, b)?,
        }),
    };
    let output = Output {
        rows,
        tubes,
        latent_dim: args.latent_dim,
        counts,
        budget,
    };
    println!("{}", serde_json::to_string_pretty(&output).map_err(lmlds::Error::from)?);
    Ok(())
}
