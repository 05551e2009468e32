use std::path::Path;

use hrc_core::hjb::cross_validate;
use hrc_core::Player;

use super::solve::solve_grid;
use super::{gate, load, Run};
use crate::args::Cli;
use crate::error::CliError;
use crate::output::fmt_f64;

pub(crate) fn run(cli: &Cli, path: &Path, mc_dt: Option<f64>, validate: bool) -> Result<(), CliError> {
    let (config, spec) = load(path)?;
    let mut run = Run::start(cli, Some(path), Some(&config), cli.common.dt, mc_dt)?;
    if validate {
        gate(&spec, run.settings.seed)?;
    }
    let sol = solve_grid(&mut run, &spec)?;
    let s = &run.settings;
    let cv = cross_validate(&spec, &sol, s.paths, s.mc_dt, s.seed, s.basis())
        .map_err(|e| CliError::core(e, spec.horizon()))?;

    let header = [
        "player",
        "grid_value",
        "mc_value",
        "std_error",
        "regression_error",
        "gap",
        "relative_gap",
    ];
    let mut table = run.out.table("crossval.csv", &header.map(String::from))?;
    for (p, grid, mc, gap) in [
        (Player::Leader, cv.grid_value_1, cv.mc_value_1, cv.gap_1),
        (Player::Follower, cv.grid_value_2, cv.mc_value_2, cv.gap_2),
    ] {
        let rel = gap / grid.abs().max(0.1);
        table.row([
            p.as_str().to_string(),
            fmt_f64(grid),
            fmt_f64(mc.value),
            fmt_f64(mc.std_error),
            fmt_f64(mc.regression_error),
            fmt_f64(gap),
            fmt_f64(rel),
        ])?;
        println!(
            "{:<9} grid {:.8e}  monte carlo {:.8e} (se {:.2e})  gap {:.3e} ({:.3}% of max(|value|, 0.1))",
            p.as_str(),
            grid,
            mc.value,
            mc.std_error,
            gap,
            100.0 * rel
        );
    }
    run.out.finish(table)?;
    run.out.json("crossval.json", &cv)?;
    run.finish()
}
