use std::path::Path;

use hrc_core::hjb::{backward_sweep_hierarchical, HierarchicalSolution};
use hrc_core::{Player, ProblemSpec};

use super::{gate, load, Run};
use crate::args::Cli;
use crate::error::CliError;
use crate::output::{fmt_f64, numbered, Artifacts};

/// Grid solve shared by `solve`, `dpp`, `crossval` and `simulate --solved`.
pub(crate) fn solve_grid(run: &mut Run<'_>, spec: &ProblemSpec) -> Result<HierarchicalSolution, CliError> {
    let grid = run.settings.grid(spec)?;
    run.set_grid(&grid);
    backward_sweep_hierarchical(spec, &grid).map_err(|e| CliError::core(e, spec.horizon()))
}

/// `solution.csv`: one row per time slice and node; the policy columns are
/// empty on the terminal slice.
pub(crate) fn write_solution(
    out: &mut Artifacts,
    spec: &ProblemSpec,
    sol: &HierarchicalSolution,
) -> Result<(), CliError> {
    let grid = &sol.grid;
    let d = grid.dim();
    let (dv, dw) = (
        spec.controls(Player::Leader).dim(),
        spec.controls(Player::Follower).dim(),
    );
    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend(numbered("x", d));
    header.extend(["phi1".to_string(), "phi2".to_string()]);
    header.extend(numbered("v_star", dv));
    header.extend(numbered("w_star", dw));
    let mut table = out.table("solution.csv", &header)?;
    let mut x = vec![0.0; d];
    let mut row = Vec::with_capacity(header.len());
    for k in 0..=grid.n_t() {
        let t = fmt_f64(grid.time(k));
        for node in 0..grid.n_nodes() {
            grid.coords(node, &mut x);
            row.clear();
            row.push(k.to_string());
            row.push(t.clone());
            row.extend(x.iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(sol.leader.slice(k)[node]));
            row.push(fmt_f64(sol.follower.slice(k)[node]));
            if k < grid.n_t() {
                let v = spec.controls(Player::Leader).point(sol.policy.leader_index(k, node));
                let w = spec
                    .controls(Player::Follower)
                    .point(sol.policy.follower_index(k, node));
                row.extend(v.iter().chain(w).map(|c| fmt_f64(*c)));
            } else {
                row.extend(std::iter::repeat_n(String::new(), dv + dw));
            }
            table.row(&row)?;
        }
    }
    out.finish(table)
}

pub(crate) fn run(cli: &Cli, path: &Path, validate: bool) -> Result<(), CliError> {
    let (config, spec) = load(path)?;
    let mut run = Run::start(cli, Some(path), Some(&config), cli.common.dt, None)?;
    if validate {
        gate(&spec, run.settings.seed)?;
    }
    let sol = solve_grid(&mut run, &spec)?;
    write_solution(&mut run.out, &spec, &sol)?;
    run.out.json("sweep_report.json", &sol.report)?;
    let x0 = spec.initial_state();
    println!(
        "grid {:?} x {} steps (dt = {:e}, CFL ratio {:.3}); phi1(0, x0) = {:.10e}, phi2(0, x0) = {:.10e}",
        sol.grid.counts(),
        sol.grid.n_t(),
        sol.grid.dt(),
        sol.report.cfl_ratio,
        sol.initial_value(Player::Leader, x0),
        sol.initial_value(Player::Follower, x0)
    );
    run.finish()
}
