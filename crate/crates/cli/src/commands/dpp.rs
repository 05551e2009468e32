use std::path::Path;

use hrc_core::hjb::{dpp_residual, DppMode};
use hrc_core::Player;
use serde::Serialize;

use super::solve::solve_grid;
use super::{gate, load, Run};
use crate::args::Cli;
use crate::error::CliError;
use crate::output::fmt_f64;

#[derive(Debug, Serialize)]
struct DppRow {
    player: &'static str,
    mode: DppMode,
    r_steps: usize,
    residual: f64,
}

pub(crate) fn run(cli: &Cli, path: &Path, r_steps: Option<usize>, validate: bool) -> Result<(), CliError> {
    let (config, spec) = load(path)?;
    let mut run = Run::start(cli, Some(path), Some(&config), cli.common.dt, None)?;
    if validate {
        gate(&spec, run.settings.seed)?;
    }
    let sol = solve_grid(&mut run, &spec)?;
    let r = r_steps.unwrap_or((sol.grid.n_t() / 2).max(1));
    let mut rows = Vec::new();
    for mode in [DppMode::SameStep, DppMode::HalfStep] {
        for p in Player::BOTH {
            let residual = dpp_residual(&spec, &sol, p, r, mode).map_err(|e| CliError::core(e, spec.horizon()))?;
            rows.push(DppRow {
                player: p.as_str(),
                mode,
                r_steps: r,
                residual,
            });
        }
    }
    let mut table = run
        .out
        .table("dpp.csv", &["player", "mode", "r_steps", "residual"].map(String::from))?;
    for row in &rows {
        let mode = match row.mode {
            DppMode::SameStep => "same-step",
            DppMode::HalfStep => "half-step",
        };
        table.row([
            row.player.to_string(),
            mode.to_string(),
            row.r_steps.to_string(),
            fmt_f64(row.residual),
        ])?;
        println!(
            "{:<9} {mode:<10} r = {:<6} residual {:.6e}",
            row.player, row.r_steps, row.residual
        );
    }
    run.out.finish(table)?;
    run.out.json("dpp.json", &rows)?;
    run.finish()
}
