//! Parameter resolution: built-in defaults, then an optional TOML file,
//! then command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

/// File consulted when `--config` is absent.
pub const DEFAULT_CONFIG: &str = "nehari.toml";

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_PRIMAL_COEFFS: usize = 32;
pub const DEFAULT_ITERS: usize = 20_000;

/// Every field optional; unset values fall through to the next layer.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub tail_tol: Option<f64>,
    pub primal_coeffs: Option<usize>,
    pub iters: Option<usize>,
}

impl Overrides {
    /// Fields of `self` win over those of `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            order: self.order.or(base.order),
            grid: self.grid.or(base.grid),
            tol: self.tol.or(base.tol),
            seed: self.seed.or(base.seed),
            tail_tol: self.tail_tol.or(base.tail_tol),
            primal_coeffs: self.primal_coeffs.or(base.primal_coeffs),
            iters: self.iters.or(base.iters),
        }
    }
}

/// Read `explicit`, or `./nehari.toml` when present.
pub fn load(explicit: Option<&Path>) -> Result<Overrides, CliError> {
    let path: PathBuf = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let p = PathBuf::from(DEFAULT_CONFIG);
            if !p.is_file() {
                return Ok(Overrides::default());
            }
            p
        }
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
