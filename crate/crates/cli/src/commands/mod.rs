mod crossval;
mod dpp;
mod riskcheck;
mod simulate;
mod solve;
mod validate;

use std::path::Path;
use std::time::Instant;

use hrc_core::hjb::LatticeGrid;
use hrc_core::problem::validate_assumptions;
use hrc_core::{ProblemConfig, ProblemSpec};
use serde::Serialize;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::input::{self, Settings};
use crate::output::{Artifacts, FileDigest};

/// Samples drawn by the assumption check that gates grid solves.
const GATE_SAMPLES: usize = 1024;

pub(crate) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let threads = match cli.common.threads {
        Some(0) => return Err(CliError::Input("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Validate { problem, samples } => validate::run(cli, problem, *samples),
        Command::Solve { problem, no_validate } => solve::run(cli, problem, !no_validate),
        Command::Simulate { .. } => simulate::run(cli),
        Command::Riskcheck { .. } => riskcheck::run(cli),
        Command::Dpp {
            problem,
            r_steps,
            no_validate,
        } => dpp::run(cli, problem, *r_steps, !no_validate),
        Command::Crossval {
            problem,
            mc_dt,
            no_validate,
        } => crossval::run(cli, problem, *mc_dt, !no_validate),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Solve { .. } => "solve",
        Command::Simulate { .. } => "simulate",
        Command::Riskcheck { .. } => "riskcheck",
        Command::Dpp { .. } => "dpp",
        Command::Crossval { .. } => "crossval",
    }
}

#[derive(Debug, Clone, Serialize)]
struct GridInfo {
    counts: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    spacing: Vec<f64>,
    n_t: usize,
    dt: f64,
}

impl GridInfo {
    fn of(g: &LatticeGrid) -> Self {
        Self {
            counts: g.counts().to_vec(),
            lower: g.lower().to_vec(),
            upper: g.upper().to_vec(),
            spacing: g.spacing().to_vec(),
            n_t: g.n_t(),
            dt: g.dt(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    problem_file: Option<String>,
    settings: &'a Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a ProblemConfig>,
    wall_clock_seconds: f64,
    outputs: &'a [FileDigest],
}

/// State of one command run: resolved settings and the output directory.
pub(crate) struct Run<'a> {
    cli: &'a Cli,
    problem_file: Option<&'a Path>,
    pub settings: Settings,
    pub out: Artifacts,
    grid: Option<LatticeGrid>,
    config: Option<ProblemConfig>,
    started: Instant,
}

impl<'a> Run<'a> {
    pub fn start(
        cli: &'a Cli,
        problem_file: Option<&'a Path>,
        config: Option<&ProblemConfig>,
        grid_dt: Option<f64>,
        mc_dt: Option<f64>,
    ) -> Result<Self, CliError> {
        let started = Instant::now();
        let settings = Settings::resolve(&cli.common, config, grid_dt, mc_dt)?;
        Ok(Self {
            cli,
            problem_file,
            settings,
            out: Artifacts::create(&cli.common.out_dir)?,
            grid: None,
            config: config.cloned(),
            started,
        })
    }

    pub fn set_grid(&mut self, grid: &LatticeGrid) {
        self.grid = Some(grid.clone());
    }

    /// Writes `problem.json` and `manifest.json`.
    pub fn finish(mut self) -> Result<(), CliError> {
        let resolved = self
            .config
            .as_ref()
            .map(|c| self.settings.resolved_config(c, self.grid.as_ref()));
        if let Some(c) = &resolved {
            self.out.json("problem.json", c)?;
        }
        let outputs = self.out.digests().to_vec();
        let manifest = Manifest {
            tool: "hrc",
            version: env!("CARGO_PKG_VERSION"),
            command: command_name(&self.cli.command),
            problem_file: self.problem_file.map(|p| p.display().to_string()),
            settings: &self.settings,
            grid: self.grid.as_ref().map(GridInfo::of),
            config: resolved.as_ref(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: &outputs,
        };
        self.out.json("manifest.json", &manifest)
    }
}

/// Reads and builds the problem file.
pub(crate) fn load(path: &Path) -> Result<(ProblemConfig, ProblemSpec), CliError> {
    let config = input::read_problem(path)?;
    let spec = input::build(&config, path)?;
    Ok((config, spec))
}

/// Runs the assumption check and fails with exit code 2 when it does not pass.
pub(crate) fn gate(spec: &ProblemSpec, seed: u64) -> Result<(), CliError> {
    let report = validate_assumptions(spec, GATE_SAMPLES, seed).map_err(|e| CliError::core(e, spec.horizon()))?;
    if report.passed() {
        return Ok(());
    }
    let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    Err(CliError::Validation(format!(
        "assumption check failed ({}); run `hrc validate` for witnesses or pass --no-validate",
        names.join(", ")
    )))
}
