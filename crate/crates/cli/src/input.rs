//! Problem-file ingestion and resolution of numerical settings.

use std::fs;
use std::path::Path;

use hrc_core::bsde::RegressionBasis;
use hrc_core::hjb::LatticeGrid;
use hrc_core::problem::NumericsConfig;
use hrc_core::{build_problem, Error as CoreError, ProblemConfig, ProblemSpec};
use serde::Serialize;

use crate::args::CommonArgs;
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PATHS: usize = 20_000;
/// Default Monte Carlo steps over the horizon.
pub const DEFAULT_MC_STEPS: usize = 256;
pub const DEFAULT_NODES_1D: usize = 81;
pub const DEFAULT_NODES_2D: usize = 41;

/// Parses a problem file. Syntax and schema errors carry line and column.
pub fn read_problem(path: &Path) -> Result<ProblemConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
        CliError::Input(format!("{}:{}:{}: {msg}", path.display(), e.line(), e.column()))
    })
}

/// Builds the problem; each field defect is reported on its own line.
pub fn build(config: &ProblemConfig, path: &Path) -> Result<ProblemSpec, CliError> {
    build_problem(config).map_err(|e| match e {
        CoreError::Config(errors) => CliError::Input(format!("{}: invalid problem\n{errors}", path.display())),
        other => CliError::core(other, config.horizon),
    })
}

/// Numerical settings after applying flags over file values over defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub grid_nodes: Vec<usize>,
    /// Grid step requested by flag or file; the CFL-admissible default when absent.
    pub grid_dt: Option<f64>,
    pub mc_dt: f64,
    pub paths: usize,
    pub basis_degree: usize,
}

impl Settings {
    /// `dt_flag` is the value `--dt` maps to for the running command.
    pub fn resolve(
        common: &CommonArgs,
        config: Option<&ProblemConfig>,
        grid_dt_flag: Option<f64>,
        mc_dt_flag: Option<f64>,
    ) -> Result<Self, CliError> {
        let file = config.and_then(|c| c.numerics.clone()).unwrap_or_default();
        let dim = config.map_or(1, |c| c.dim);
        let horizon = config.map_or(1.0, |c| c.horizon);
        let threads = match common.threads {
            Some(0) => return Err(CliError::Input("--threads must be at least 1".into())),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let grid_nodes = match common.grid_nodes.clone().or(file.grid_nodes) {
            Some(v) if v.len() == 1 => vec![v[0]; dim],
            Some(v) if v.len() == dim => v,
            Some(v) => {
                return Err(CliError::Input(format!(
                    "--grid-nodes has {} entries for a {dim}-dimensional problem",
                    v.len()
                )))
            }
            None => vec![if dim == 1 { DEFAULT_NODES_1D } else { DEFAULT_NODES_2D }; dim],
        };
        Ok(Self {
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            threads,
            grid_nodes,
            grid_dt: grid_dt_flag.or(file.grid_dt),
            mc_dt: mc_dt_flag.or(file.mc_dt).unwrap_or(horizon / DEFAULT_MC_STEPS as f64),
            paths: common.paths.or(file.paths).unwrap_or(DEFAULT_PATHS),
            basis_degree: file.basis_degree.unwrap_or(RegressionBasis::default().degree),
        })
    }

    pub fn basis(&self) -> RegressionBasis {
        RegressionBasis::new(self.basis_degree)
    }

    /// The grid these settings describe.
    pub fn grid(&self, spec: &ProblemSpec) -> Result<LatticeGrid, CliError> {
        let horizon = spec.horizon();
        let grid = match self.grid_dt {
            Some(dt) => {
                let n_t = hrc_core::sde::step_count(horizon, dt).map_err(|e| CliError::core(e, horizon))?;
                LatticeGrid::new(spec, &self.grid_nodes, n_t)
            }
            None => LatticeGrid::with_stable_steps(spec, &self.grid_nodes),
        };
        grid.map_err(|e| CliError::core(e, horizon))
    }

    /// `config` with its numerics block replaced by these settings.
    pub fn resolved_config(&self, config: &ProblemConfig, grid: Option<&LatticeGrid>) -> ProblemConfig {
        let mut out = config.clone();
        out.numerics = Some(NumericsConfig {
            grid_nodes: Some(self.grid_nodes.clone()),
            grid_dt: grid.map(|g| g.dt()).or(self.grid_dt),
            mc_dt: Some(self.mc_dt),
            paths: Some(self.paths),
            seed: Some(self.seed),
            basis_degree: Some(self.basis_degree),
        });
        out
    }
}
