use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polysys::{default_alpha, DesignSpec};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of stages.
    #[arg(long)]
    pub n: Option<usize>,
    /// Harmonics to assign, comma separated (default 2,4,...,2n).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<u32>>,
    /// Storage capacitance in farads.
    #[arg(long)]
    pub c: Option<f64>,
    /// Stage inductance in henries.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Charging voltage.
    #[arg(long)]
    pub v0: Option<f64>,
    /// Seed for the homotopy constant.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write only this format (default: both).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Track at most this many homotopy paths.
    #[arg(long)]
    pub paths_budget: Option<usize>,
    /// JSON file with any of the run settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tol_dedup: Option<f64>,
    #[arg(long)]
    pub tol_real: Option<f64>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    #[arg(long)]
    pub tol_eig: Option<f64>,
    #[arg(long)]
    pub tol_modal: Option<f64>,
    #[arg(long)]
    pub tol_transfer: Option<f64>,
    #[arg(long)]
    pub tol_energy: Option<f64>,
    #[arg(long)]
    pub tol_convexity: Option<f64>,
}

/// Settings read from `--config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub alpha: Option<Vec<u32>>,
    pub c: Option<f64>,
    pub ell: Option<f64>,
    pub v0: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub paths_budget: Option<usize>,
    pub resolution: Option<usize>,
    pub samples: Option<usize>,
    pub tolerances: Option<Tolerances>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub spec: DesignSpec,
    pub v0: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    pub format: Option<Format>,
    pub paths_budget: Option<usize>,
    pub resolution: usize,
    pub samples: usize,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let alpha = match (args.alpha.clone().or(file.alpha.clone()), args.n.or(file.n)) {
            (Some(a), Some(n)) if a.len() != n => {
                return Err(Error::InvalidSpec(format!("n = {n} but {} harmonics given", a.len())));
            }
            (Some(a), _) => a,
            (None, Some(n)) => default_alpha(n),
            (None, None) => return Err(Error::InvalidSpec("the stage count --n is required".into())),
        };
        let spec = DesignSpec::new(alpha, args.c.or(file.c).unwrap_or(1.0), args.ell.or(file.ell).unwrap_or(1.0))?;

        let mut tol = file.tolerances.clone().unwrap_or_default();
        let overrides = [
            (args.tol_dedup, &mut tol.dedup),
            (args.tol_real, &mut tol.real_imag),
            (args.tol_residual, &mut tol.polish_residual),
            (args.tol_eig, &mut tol.eig_error),
            (args.tol_modal, &mut tol.modal),
            (args.tol_transfer, &mut tol.transfer_endpoint),
            (args.tol_energy, &mut tol.energy_drift),
            (args.tol_convexity, &mut tol.convexity),
        ];
        for (flag, slot) in overrides {
            if let Some(v) = flag {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidArgument(format!("tolerance must be non-negative, got {v}")));
                }
                *slot = v;
            }
        }
        let v0 = args.v0.or(file.v0).unwrap_or(1.0);
        if !v0.is_finite() {
            return Err(Error::InvalidArgument("v0 must be finite".into()));
        }
        Ok(Self {
            spec,
            v0,
            seed: args.seed.or(file.seed).unwrap_or(0),
            tolerances: tol,
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            format: args.format.or(file.format),
            paths_budget: args.paths_budget.or(file.paths_budget),
            resolution: file.resolution.unwrap_or(201),
            samples: file.samples.unwrap_or(1000),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.format.is_none_or(|g| g == f)
    }
}
