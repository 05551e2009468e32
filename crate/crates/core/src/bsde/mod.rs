//! Regression Monte Carlo for BSDEs with z-only generators
//! `Y_t = xi + int_t^T g(s, Z_s) ds - int_t^T Z_s dB_s`, the conditional
//! g-expectation and the dynamic risk measure it induces.
//!
//! One backward step on a bundle, with `C` the least-squares projection onto
//! the regression basis at `X_k`:
//!
//! ```text
//! C_k = C[Y_{k+1} + c_k dt]
//! Z_k = C[(Y_{k+1} + c_k dt - C_k) dB_k] / dt
//! Y_k = C_k + g(t_k, Z_k) dt
//! ```
//!
//! `c_k` is an optional running cost (zero for plain g-expectations) and `g`
//! is evaluated through [`Generator::eval_bounded`].
//! Subtracting the fitted continuation before the covariation regression
//! leaves `E[Z]` unchanged and makes constant shifts of the terminal value
//! pass through exactly.

pub mod axioms;
mod regression;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use regression::{RegressionBasis, MAX_CONDITION};

use crate::error::{Error, Result};
use crate::par;
use crate::problem::{Generator, Player, ProblemSpec, Z_RADIUS};
use crate::sde::{self, FeedbackPolicy, PathBundle};
use regression::Regressor;

/// Regression diagnostics of one backward step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub condition: f64,
    pub y_residual_rms: f64,
    pub z_residual_rms: Vec<f64>,
    pub z_max: f64,
}

/// `(Y, Z)` along every path of a bundle, step-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BsdeSolution {
    n_paths: usize,
    n_steps: usize,
    dim: usize,
    y: Vec<f64>,
    z: Vec<f64>,
    pub y0: f64,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Propagated statistical error of the Z regressions.
    pub regression_error: f64,
}

impl BsdeSolution {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn y(&self, p: usize, k: usize) -> f64 {
        self.y[k * self.n_paths + p]
    }

    pub fn y_at(&self, k: usize) -> &[f64] {
        &self.y[k * self.n_paths..(k + 1) * self.n_paths]
    }

    pub fn z(&self, p: usize, k: usize) -> &[f64] {
        let i = (k * self.n_paths + p) * self.dim;
        &self.z[i..i + self.dim]
    }
}

struct Backward {
    y_stop: Vec<f64>,
    y0: f64,
    diagnostics: Vec<StepDiagnostics>,
    regression_error: f64,
    y: Option<Vec<f64>>,
    z: Option<Vec<f64>>,
}

fn backward(
    bundle: &PathBundle,
    gen: &Generator,
    terminal: &[f64],
    running: Option<&[f64]>,
    basis: RegressionBasis,
    stop: usize,
    keep: bool,
) -> Result<Backward> {
    let n = bundle.n_paths();
    let d = bundle.dim();
    let steps = bundle.n_steps();
    let dt = bundle.dt();
    if terminal.len() != n {
        return Err(Error::DimensionMismatch {
            what: "terminal samples",
            expected: n,
            got: terminal.len(),
        });
    }
    if let Some(r) = running {
        if r.len() != n * steps {
            return Err(Error::DimensionMismatch {
                what: "running cost table",
                expected: n * steps,
                got: r.len(),
            });
        }
    }
    let needed = 10 * basis.size(d);
    if n < needed {
        return Err(Error::Precondition(format!(
            "{n} paths is fewer than 10 x basis size ({needed})"
        )));
    }
    if stop > steps {
        return Err(Error::Precondition(format!("step {stop} beyond {steps} steps")));
    }

    let mut ys = keep.then(|| vec![0.0; (steps + 1) * n]);
    let mut zs = keep.then(|| vec![0.0; steps * n * d]);
    if let Some(ys) = ys.as_mut() {
        ys[steps * n..].copy_from_slice(terminal);
    }
    let mut y_next = terminal.to_vec();
    let mut diagnostics = Vec::with_capacity(steps - stop);
    let mut regression_error = 0.0;

    for k in (stop..steps).rev() {
        let t = bundle.time(k);
        let reg = Regressor::fit(bundle.states_at(k), n, d, basis.degree, k)?;
        let target: Vec<f64> = match running {
            Some(r) => {
                let rk = &r[k * n..(k + 1) * n];
                y_next.iter().zip(rk).map(|(y, c)| y + c * dt).collect()
            }
            None => y_next,
        };
        let (cont, y_rms) = reg.project(&target);
        let db = bundle.increments_at(k);
        let mut z = vec![0.0; n * d];
        let mut z_rms = Vec::with_capacity(d);
        for j in 0..d {
            let r: Vec<f64> = (0..n).map(|p| (target[p] - cont[p]) * db[p * d + j] / dt).collect();
            let (zj, rms) = reg.project(&r);
            for p in 0..n {
                z[p * d + j] = zj[p];
            }
            z_rms.push(rms);
        }
        let z_max = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lip = gen.lipschitz_on(z_max.min(Z_RADIUS));
        let sqrt_n = libm::sqrt(n as f64);
        regression_error += dt * lip * z_rms.iter().map(|r| r / sqrt_n).sum::<f64>();

        let zr = &z;
        let y_k = par::map_range(n, |p| cont[p] + gen.eval_bounded(t, &zr[p * d..(p + 1) * d]) * dt);
        if let Some(ys) = ys.as_mut() {
            ys[k * n..(k + 1) * n].copy_from_slice(&y_k);
        }
        if let Some(zs) = zs.as_mut() {
            zs[k * n * d..(k + 1) * n * d].copy_from_slice(&z);
        }
        diagnostics.push(StepDiagnostics {
            step: k,
            condition: reg.condition,
            y_residual_rms: y_rms,
            z_residual_rms: z_rms,
            z_max,
        });
        y_next = y_k;
    }
    diagnostics.reverse();

    let y0 = shifted_mean(&y_next);
    Ok(Backward {
        y_stop: y_next,
        y0,
        diagnostics,
        regression_error,
        y: ys,
        z: zs,
    })
}

/// Solves the BSDE with terminal samples `terminal` on `bundle`.
pub fn solve_bsde(
    bundle: &PathBundle,
    gen: &Generator,
    terminal: &[f64],
    basis: RegressionBasis,
) -> Result<BsdeSolution> {
    let b = backward(bundle, gen, terminal, None, basis, 0, true)?;
    Ok(BsdeSolution {
        n_paths: bundle.n_paths(),
        n_steps: bundle.n_steps(),
        dim: bundle.dim(),
        y: b.y.unwrap_or_default(),
        z: b.z.unwrap_or_default(),
        y0: b.y0,
        diagnostics: b.diagnostics,
        regression_error: b.regression_error,
    })
}

/// `E_g[xi | F_{t_k}]` per path, as a function of `X_{t_k}`.
pub fn conditional_g_expectation(
    bundle: &PathBundle,
    gen: &Generator,
    terminal: &[f64],
    basis: RegressionBasis,
    k: usize,
) -> Result<Vec<f64>> {
    Ok(backward(bundle, gen, terminal, None, basis, k, false)?.y_stop)
}

/// `rho^g_{0,T}[xi]`.
pub fn risk_measure(bundle: &PathBundle, gen: &Generator, terminal: &[f64], basis: RegressionBasis) -> Result<f64> {
    Ok(backward(bundle, gen, terminal, None, basis, 0, false)?.y0)
}

/// `rho^g_{0,T}[xi]` together with its regression error estimate.
pub fn risk_measure_with_error(
    bundle: &PathBundle,
    gen: &Generator,
    terminal: &[f64],
    basis: RegressionBasis,
) -> Result<(f64, f64)> {
    let b = backward(bundle, gen, terminal, None, basis, 0, false)?;
    Ok((b.y0, b.regression_error))
}

/// Monte Carlo risk value of one player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    /// Sample standard deviation of the accumulated cost over `sqrt(n_paths)`.
    pub std_error: f64,
    pub regression_error: f64,
}

/// Risk value `V_i(0, x0)` under the given policies: the g-expectation of
/// the accumulated cost `int_0^T c_i dt + Psi_i(X_T)`.
#[allow(clippy::too_many_arguments)]
pub fn risk_value(
    spec: &ProblemSpec,
    leader: &FeedbackPolicy,
    follower: &FeedbackPolicy,
    player: Player,
    n_paths: usize,
    dt: f64,
    seed: u64,
    basis: RegressionBasis,
) -> Result<RiskEstimate> {
    let bundle = sde::simulate(spec, leader, follower, n_paths, dt, seed)?;
    risk_value_on(&bundle, spec, player, basis)
}

/// [`risk_value`] on an existing bundle simulated from `spec`.
pub fn risk_value_on(
    bundle: &PathBundle,
    spec: &ProblemSpec,
    player: Player,
    basis: RegressionBasis,
) -> Result<RiskEstimate> {
    let running = sde::running_costs(bundle, spec, player)?;
    let terminal = sde::terminal_costs(bundle, spec, player)?;
    let n = bundle.n_paths();
    let dt = bundle.dt();
    let xi = par::map_range(n, |p| {
        let mut s = 0.0;
        for k in 0..bundle.n_steps() {
            s += running[k * n + p] * dt;
        }
        s + terminal[p]
    });
    let std_error = sample_sd(&xi) / libm::sqrt(n as f64);
    drop(xi);
    let b = backward(
        bundle,
        spec.generator(player),
        &terminal,
        Some(&running),
        basis,
        0,
        false,
    )?;
    Ok(RiskEstimate {
        value: b.y0,
        std_error,
        regression_error: b.regression_error,
    })
}

/// `(Y, Z)` of a player's cost BSDE on `bundle`: `Y_t` is the risk value of
/// the remaining cost from `t` along each path.
pub fn solve_cost_bsde(
    bundle: &PathBundle,
    spec: &ProblemSpec,
    player: Player,
    basis: RegressionBasis,
) -> Result<BsdeSolution> {
    let running = sde::running_costs(bundle, spec, player)?;
    let terminal = sde::terminal_costs(bundle, spec, player)?;
    let b = backward(
        bundle,
        spec.generator(player),
        &terminal,
        Some(&running),
        basis,
        0,
        true,
    )?;
    Ok(BsdeSolution {
        n_paths: bundle.n_paths(),
        n_steps: bundle.n_steps(),
        dim: bundle.dim(),
        y: b.y.unwrap_or_default(),
        z: b.z.unwrap_or_default(),
        y0: b.y0,
        diagnostics: b.diagnostics,
        regression_error: b.regression_error,
    })
}

/// Mean computed around the first sample, so constant vectors are returned exactly.
pub(crate) fn shifted_mean(x: &[f64]) -> f64 {
    let r = x[0];
    r + par::block_sum(x.len(), 1, |p, acc| acc[0] += x[p] - r)[0] / x.len() as f64
}

pub(crate) fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = par::block_sum(n, 1, |p, acc| acc[0] += x[p])[0] / n as f64;
    let ss = par::block_sum(n, 1, |p, acc| {
        let e = x[p] - mean;
        acc[0] += e * e;
    })[0];
    libm::sqrt(ss / (n - 1) as f64)
}

/// Outcome of a comparison-theorem check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub y_a0: f64,
    pub y_b0: f64,
    pub tolerance: f64,
    pub ordered: bool,
}

/// Ordering tolerance `1e-8 + 3 x` the combined regression error.
pub fn ordering_tolerance(combined_regression_error: f64) -> f64 {
    1e-8 + 3.0 * combined_regression_error
}

/// Points per axis of the z lattice on which generator ordering is sampled.
const Z_LATTICE: usize = 41;

/// Solves both BSDEs on `bundle` and checks `y_a0 >= y_b0 - tol`.
///
/// Requires `terminal_a >= terminal_b` on every path and `gen_a >= gen_b` on
/// a lattice of `z` in `[-Z_RADIUS, Z_RADIUS]^d`.
pub fn comparison_check(
    bundle: &PathBundle,
    gen_a: &Generator,
    gen_b: &Generator,
    terminal_a: &[f64],
    terminal_b: &[f64],
    basis: RegressionBasis,
) -> Result<ComparisonReport> {
    if terminal_a.len() != terminal_b.len() {
        return Err(Error::DimensionMismatch {
            what: "comparison terminals",
            expected: terminal_a.len(),
            got: terminal_b.len(),
        });
    }
    if let Some(p) = (0..terminal_a.len()).find(|&p| !(terminal_a[p] >= terminal_b[p])) {
        return Err(Error::Precondition(format!(
            "terminal ordering violated on path {p}: {} < {}",
            terminal_a[p], terminal_b[p]
        )));
    }
    let d = bundle.dim();
    let mut z = vec![0.0; d];
    let total = Z_LATTICE.pow(d as u32);
    for s in 0..total {
        let mut rest = s;
        for zi in z.iter_mut() {
            let j = rest % Z_LATTICE;
            rest /= Z_LATTICE;
            *zi = -Z_RADIUS + 2.0 * Z_RADIUS * j as f64 / (Z_LATTICE - 1) as f64;
        }
        let (ga, gb) = (gen_a.eval(0.0, &z), gen_b.eval(0.0, &z));
        if !(ga >= gb) {
            return Err(Error::Precondition(format!(
                "generator ordering violated at z sample {s} ({z:?}): {ga} < {gb}"
            )));
        }
    }
    let (y_a0, ea) = risk_measure_with_error(bundle, gen_a, terminal_a, basis)?;
    let (y_b0, eb) = risk_measure_with_error(bundle, gen_b, terminal_b, basis)?;
    let tolerance = ordering_tolerance(ea + eb);
    Ok(ComparisonReport {
        y_a0,
        y_b0,
        tolerance,
        ordered: y_a0 >= y_b0 - tolerance,
    })
}
