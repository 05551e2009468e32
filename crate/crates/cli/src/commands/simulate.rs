use std::path::Path;

use hrc_core::bsde::{risk_value_on, solve_cost_bsde, RegressionBasis, RiskEstimate};
use hrc_core::sde::{accumulate_cost, simulate, FeedbackPolicy, PathBundle};
use hrc_core::{Player, ProblemSpec};
use serde::Serialize;

use super::solve::solve_grid;
use super::{gate, load, Run};
use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::output::{fmt_f64, numbered, Artifacts};

#[derive(Debug, Serialize)]
struct RiskReport {
    n_paths: usize,
    dt: f64,
    seed: u64,
    leader_policy: String,
    follower_policy: String,
    leader: RiskEstimate,
    follower: RiskEstimate,
}

fn constant_policy(
    spec: &ProblemSpec,
    player: Player,
    given: Option<&Vec<f64>>,
) -> Result<(FeedbackPolicy, String), CliError> {
    let set = spec.controls(player);
    let point = match given {
        Some(p) => p.clone(),
        None => set.point(set.nearest_index(&vec![0.0; set.dim()])).to_vec(),
    };
    let policy = FeedbackPolicy::constant(&point);
    policy
        .check_against(set, player.as_str())
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok((policy, format!("constant {point:?}")))
}

fn write_paths(out: &mut Artifacts, b: &PathBundle) -> Result<(), CliError> {
    let d = b.dim();
    let (dv, dw) = (b.leader_track().dim(), b.follower_track().dim());
    let mut header: Vec<String> = ["path", "step", "t"].map(String::from).to_vec();
    header.extend(numbered("x", d));
    header.extend(numbered("v", dv));
    header.extend(numbered("w", dw));
    let mut table = out.table("paths.csv", &header)?;
    let mut row = Vec::with_capacity(header.len());
    for p in 0..b.n_paths() {
        for k in 0..=b.n_steps() {
            row.clear();
            row.push(p.to_string());
            row.push(k.to_string());
            row.push(fmt_f64(b.time(k)));
            row.extend(b.state(p, k).iter().map(|x| fmt_f64(*x)));
            if k < b.n_steps() {
                row.extend(
                    b.leader_control(p, k)
                        .iter()
                        .chain(b.follower_control(p, k))
                        .map(|c| fmt_f64(*c)),
                );
            } else {
                row.extend(std::iter::repeat_n(String::new(), dv + dw));
            }
            table.row(&row)?;
        }
    }
    out.finish(table)
}

fn write_bsde(
    out: &mut Artifacts,
    b: &PathBundle,
    spec: &ProblemSpec,
    player: Player,
    basis: RegressionBasis,
) -> Result<(), CliError> {
    let sol = solve_cost_bsde(b, spec, player, basis).map_err(|e| CliError::core(e, spec.horizon()))?;
    let mut header: Vec<String> = ["path", "step", "t", "y"].map(String::from).to_vec();
    header.extend(numbered("z", sol.dim()));
    let mut table = out.table(&format!("bsde_{}.csv", player.as_str()), &header)?;
    let mut row = Vec::with_capacity(header.len());
    for p in 0..b.n_paths() {
        for k in 0..=b.n_steps() {
            row.clear();
            row.push(p.to_string());
            row.push(k.to_string());
            row.push(fmt_f64(b.time(k)));
            row.push(fmt_f64(sol.y(p, k)));
            if k < b.n_steps() {
                row.extend(sol.z(p, k).iter().map(|z| fmt_f64(*z)));
            } else {
                row.extend(std::iter::repeat_n(String::new(), sol.dim()));
            }
            table.row(&row)?;
        }
    }
    out.finish(table)?;
    out.json(&format!("bsde_{}_diagnostics.json", player.as_str()), &sol.diagnostics)
}

pub(crate) fn run(cli: &Cli) -> Result<(), CliError> {
    let Command::Simulate {
        problem,
        leader_control,
        follower_control,
        solved,
        grid_dt,
        dump_paths,
        dump_bsde,
    } = &cli.command
    else {
        unreachable!("dispatched on the simulate command")
    };
    let path: &Path = problem;
    let (config, spec) = load(path)?;
    let mut run = Run::start(cli, Some(path), Some(&config), *grid_dt, cli.common.dt)?;
    let horizon = spec.horizon();

    let (leader, follower, names) = if *solved {
        gate(&spec, run.settings.seed)?;
        let sol = solve_grid(&mut run, &spec)?;
        let feedback = |p| {
            sol.policy
                .feedback(&spec, &sol.grid, p)
                .map_err(|e| CliError::core(e, horizon))
        };
        (
            feedback(Player::Leader)?,
            feedback(Player::Follower)?,
            ("grid feedback".to_string(), "grid feedback".to_string()),
        )
    } else {
        let (l, ln) = constant_policy(&spec, Player::Leader, leader_control.as_ref())?;
        let (f, fname) = constant_policy(&spec, Player::Follower, follower_control.as_ref())?;
        (l, f, (ln, fname))
    };

    let s = &run.settings;
    let bundle =
        simulate(&spec, &leader, &follower, s.paths, s.mc_dt, s.seed).map_err(|e| CliError::core(e, horizon))?;
    let costs: Vec<Vec<f64>> = Player::BOTH
        .iter()
        .map(|p| accumulate_cost(&bundle, &spec, *p))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::core(e, horizon))?;
    let risk = |p| risk_value_on(&bundle, &spec, p, s.basis()).map_err(|e| CliError::core(e, horizon));
    let report = RiskReport {
        n_paths: s.paths,
        dt: s.mc_dt,
        seed: s.seed,
        leader_policy: names.0,
        follower_policy: names.1,
        leader: risk(Player::Leader)?,
        follower: risk(Player::Follower)?,
    };

    let mut table = run
        .out
        .table("costs.csv", &["path", "leader_cost", "follower_cost"].map(String::from))?;
    for p in 0..bundle.n_paths() {
        table.row([p.to_string(), fmt_f64(costs[0][p]), fmt_f64(costs[1][p])])?;
    }
    run.out.finish(table)?;
    let mut table = run.out.table(
        "risk.csv",
        &["player", "value", "std_error", "regression_error"].map(String::from),
    )?;
    for (p, e) in [(Player::Leader, report.leader), (Player::Follower, report.follower)] {
        table.row([
            p.as_str().to_string(),
            fmt_f64(e.value),
            fmt_f64(e.std_error),
            fmt_f64(e.regression_error),
        ])?;
    }
    run.out.finish(table)?;
    run.out.json("risk.json", &report)?;
    if *dump_paths {
        write_paths(&mut run.out, &bundle)?;
    }
    if *dump_bsde {
        for p in Player::BOTH {
            write_bsde(&mut run.out, &bundle, &spec, p, s.basis())?;
        }
    }
    println!(
        "{} paths, dt = {:e}: leader risk value {:.10e} (se {:.2e}), follower {:.10e} (se {:.2e})",
        s.paths,
        s.mc_dt,
        report.leader.value,
        report.leader.std_error,
        report.follower.value,
        report.follower.std_error
    );
    run.finish()
}
