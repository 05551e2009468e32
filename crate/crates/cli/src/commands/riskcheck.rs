use hrc_core::bsde::axioms::{run_axiom_suite, AxiomReport, AxiomSettings, Expectation};
use hrc_core::problem::GeneratorKind;
use hrc_core::sde::step_count;
use hrc_core::{Generator, Player};

use super::{load, Run};
use crate::args::{Cli, Command, Fixture};
use crate::error::CliError;
use crate::output::fmt_f64;

fn kind_name(k: GeneratorKind) -> &'static str {
    match k {
        GeneratorKind::Zero => "zero",
        GeneratorKind::ScaledL1 => "scaled-l1",
        GeneratorKind::ScaledQuadratic => "scaled-quadratic",
    }
}

fn expectation_name(e: Expectation) -> &'static str {
    match e {
        Expectation::Holds => "holds",
        Expectation::Fails => "fails",
        Expectation::NotApplicable => "not-applicable",
    }
}

pub(crate) fn run(cli: &Cli) -> Result<(), CliError> {
    let Command::Riskcheck {
        problem,
        fixture,
        kappa,
        trials,
        steps,
    } = &cli.command
    else {
        unreachable!("dispatched on the riskcheck command")
    };
    let loaded = problem.as_deref().map(load).transpose()?;
    let mut run = Run::start(
        cli,
        problem.as_deref(),
        loaded.as_ref().map(|l| &l.0),
        None,
        cli.common.dt,
    )?;

    let (horizon, dim) = loaded.as_ref().map_or((1.0, 1), |(c, _)| (c.horizon, c.dim));
    let subjects: Vec<(String, Generator)> = match (fixture, &loaded) {
        (Some(f), _) => {
            let g = match f {
                Fixture::Zero => Generator::ZERO,
                Fixture::ScaledL1 => Generator::scaled_l1(*kappa),
                Fixture::ScaledQuadratic => Generator::scaled_quadratic(*kappa),
            };
            vec![("fixture".to_string(), g)]
        }
        (None, Some((_, spec))) => Player::BOTH
            .iter()
            .map(|p| (p.as_str().to_string(), *spec.generator(*p)))
            .collect(),
        (None, None) => unreachable!("clap requires a problem file or a fixture"),
    };
    let n_steps = match cli.common.dt {
        Some(dt) => step_count(horizon, dt).map_err(|e| CliError::core(e, horizon))?,
        None => *steps,
    };
    let settings = AxiomSettings {
        trials: *trials,
        n_paths: cli.common.paths.unwrap_or(AxiomSettings::default().n_paths),
        n_steps,
        horizon,
        dim,
        seed: run.settings.seed,
        basis: run.settings.basis(),
    };
    run.settings.paths = settings.n_paths;
    run.settings.mc_dt = horizon / n_steps as f64;

    let reports: Vec<(String, AxiomReport)> = subjects
        .into_iter()
        .map(|(who, g)| run_axiom_suite(&g, &settings).map(|r| (who, r)))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::core(e, horizon))?;

    let header = [
        "subject",
        "generator",
        "kappa",
        "axiom",
        "expectation",
        "checks",
        "violations",
        "worst_slack",
        "passed",
    ]
    .map(String::from);
    let mut table = run.out.table("riskcheck.csv", &header)?;
    for (who, r) in &reports {
        for o in &r.outcomes {
            table.row([
                who.clone(),
                kind_name(r.generator.preset).to_string(),
                fmt_f64(r.generator.kappa),
                o.axiom.as_str().to_string(),
                expectation_name(o.expectation).to_string(),
                o.checks.to_string(),
                o.violations.to_string(),
                fmt_f64(o.worst_slack),
                o.passed.to_string(),
            ])?;
            let status = if o.passed { "pass" } else { "FAIL" };
            println!(
                "{who:<9} {:<17} {:<23} {:<15} {:>5} checks {:>5} violations  {status}",
                kind_name(r.generator.preset),
                o.axiom.as_str(),
                expectation_name(o.expectation),
                o.checks,
                o.violations
            );
            if let (Expectation::Fails, Some(w)) = (o.expectation, &o.witness) {
                println!(
                    "          counterexample: trial {}{}: {} vs {} ({})",
                    w.trial,
                    w.parameter.map(|p| format!(", parameter {p}")).unwrap_or_default(),
                    w.lhs,
                    w.rhs,
                    w.payoff
                );
            }
        }
    }
    run.out.finish(table)?;
    let json: Vec<&AxiomReport> = reports.iter().map(|(_, r)| r).collect();
    run.out.json("riskcheck.json", &json)?;
    run.finish()?;

    let failed: Vec<String> = reports
        .iter()
        .flat_map(|(who, r)| {
            r.outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(move |o| format!("{who} {}", o.axiom.as_str()))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "risk-axiom suite failed: {}",
            failed.join(", ")
        )))
    }
}
