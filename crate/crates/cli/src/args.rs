use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "hrc",
    version,
    about = "Hierarchical risk-averse control: grid solver, Monte Carlo checks and property suites"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command. Flags take precedence over the problem
/// file's `numerics` block, which takes precedence over built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Random seed [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism].
    #[arg(long, global = true, env = "HRC_THREADS")]
    pub threads: Option<usize>,
    /// Time step: grid step for solve/dpp/crossval, Monte Carlo step for simulate/riskcheck.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Grid nodes per axis; one value applies to every axis.
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid_nodes: Option<Vec<usize>>,
    /// Monte Carlo paths.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Directory receiving CSV tables, JSON reports and the manifest.
    #[arg(long, global = true, default_value = "hrc-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the standing assumptions on sampled points.
    Validate {
        problem: PathBuf,
        /// Random samples on top of the deterministic lattice.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },
    /// Backward sweep of the coupled value fields and policies.
    Solve {
        problem: PathBuf,
        /// Skip the assumption check.
        #[arg(long)]
        no_validate: bool,
    },
    /// Simulate paths and evaluate both players' risk values.
    Simulate {
        problem: PathBuf,
        /// Constant leader control (comma separated); nearest admissible point to the origin by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "solved")]
        leader_control: Option<Vec<f64>>,
        /// Constant follower control (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "solved")]
        follower_control: Option<Vec<f64>>,
        /// Use the feedback policies of a grid solve instead of constants.
        #[arg(long)]
        solved: bool,
        /// Grid time step for `--solved`.
        #[arg(long)]
        grid_dt: Option<f64>,
        /// Write every path to paths.csv.
        #[arg(long)]
        dump_paths: bool,
        /// Write both players' (Y, Z) tracks to bsde_leader.csv and bsde_follower.csv.
        #[arg(long)]
        dump_bsde: bool,
    },
    /// Risk-measure axiom suite and comparison checks.
    Riskcheck {
        /// Problem whose generators are checked; its horizon and dimension set the bundle.
        #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
        problem: Option<PathBuf>,
        /// Built-in generator instead of a problem file.
        #[arg(long, value_enum)]
        fixture: Option<Fixture>,
        /// Scale of the fixture generator.
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Time steps per trial bundle when --dt is absent.
        #[arg(long, default_value_t = 32)]
        steps: usize,
    },
    /// Dynamic-programming residuals of a grid solution.
    Dpp {
        problem: PathBuf,
        /// Intermediate time index; half the time steps by default.
        #[arg(long)]
        r_steps: Option<usize>,
        #[arg(long)]
        no_validate: bool,
    },
    /// Grid values against Monte Carlo risk values under the grid policies.
    Crossval {
        problem: PathBuf,
        /// Monte Carlo time step (--dt sets the grid step).
        #[arg(long)]
        mc_dt: Option<f64>,
        #[arg(long)]
        no_validate: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    Zero,
    ScaledL1,
    ScaledQuadratic,
}
