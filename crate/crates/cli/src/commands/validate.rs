use std::path::Path;

use hrc_core::problem::{validate_assumptions, Witness};

use super::{load, Run};
use crate::args::Cli;
use crate::error::CliError;
use crate::output::fmt_f64;

fn witness_line(w: &Witness) -> String {
    let mut s = format!("t = {}, x = {:?}, v = {:?}, w = {:?}", w.t, w.x, w.v, w.w);
    if !w.z.is_empty() {
        s.push_str(&format!(", z = {:?}", w.z));
    }
    s
}

pub(crate) fn run(cli: &Cli, path: &Path, samples: usize) -> Result<(), CliError> {
    let (config, spec) = load(path)?;
    let mut run = Run::start(cli, Some(path), Some(&config), None, None)?;
    let report =
        validate_assumptions(&spec, samples, run.settings.seed).map_err(|e| CliError::core(e, spec.horizon()))?;

    println!("{:<36} {:<6} {:>16} {:>16}", "check", "status", "estimate", "threshold");
    for c in &report.checks {
        let threshold = c.threshold.map_or_else(|| "-".to_string(), |t| format!("{t:e}"));
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("{:<36} {:<6} {:>16.6e} {:>16}", c.name, status, c.estimate, threshold);
        if let Some(w) = c.witness.as_ref().filter(|_| !c.passed) {
            println!("    witness: {}", witness_line(w));
        }
        if !c.note.is_empty() {
            println!("    note: {}", c.note);
        }
    }

    let mut table = run.out.table(
        "validation.csv",
        &["check", "passed", "estimate", "threshold"].map(String::from),
    )?;
    for c in &report.checks {
        table.row([
            c.name.clone(),
            c.passed.to_string(),
            fmt_f64(c.estimate),
            c.threshold.map_or_else(String::new, fmt_f64),
        ])?;
    }
    run.out.finish(table)?;
    run.out.json("validation.json", &report)?;
    run.finish()?;

    if report.passed() {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} of {} assumption checks failed",
            report.failures().count(),
            report.checks.len()
        )))
    }
}
