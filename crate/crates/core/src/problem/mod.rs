//! Problem instances: dynamics, costs, generators, control sets and the
//! truncated state domain.

pub mod catalog;
mod config;
mod control;
mod generator;
mod preset;
mod validate;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use config::{BoxConfig, ControlSetConfig, FunctionPreset, NumericsConfig, ProblemConfig};
pub use control::{ControlSet, DomainBox};
pub use generator::{eval_generator, Generator, GeneratorKind};
pub use preset::{Diffusion, Drift, RunningCost, TerminalCost};
pub use validate::{validate_assumptions, AssumptionCheck, AssumptionReport, Witness, Z_RADIUS};

use crate::error::{Error, FieldError, Result};

/// Decision group of the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Player {
    Leader,
    Follower,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::Leader, Player::Follower];

    pub fn as_str(self) -> &'static str {
        match self {
            Player::Leader => "leader",
            Player::Follower => "follower",
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    horizon: f64,
    dim: usize,
    drift: Drift,
    diffusion: Diffusion,
    leader_cost: RunningCost,
    follower_cost: RunningCost,
    leader_terminal: TerminalCost,
    follower_terminal: TerminalCost,
    leader_generator: Generator,
    follower_generator: Generator,
    leader_controls: ControlSet,
    follower_controls: ControlSet,
    domain_box: DomainBox,
    ellipticity_floor: f64,
    initial_state: Vec<f64>,
    config: ProblemConfig,
}

/// Builds a problem from its declarative record, reporting every defect found.
///
/// Uniform ellipticity is not enforced here; it is reported by
/// [`validate_assumptions`] so degenerate test dynamics can still be built.
pub fn build_problem(config: &ProblemConfig) -> Result<ProblemSpec> {
    let mut errors: Vec<FieldError> = Vec::new();

    if !(config.horizon.is_finite() && config.horizon > 0.0) {
        errors.push(FieldError::new("horizon", "horizon must be positive"));
    }
    let dim = config.dim;
    if !(dim == 1 || dim == 2) {
        errors.push(FieldError::new("dim", format!("dim must be 1 or 2, got {dim}")));
        return Err(Error::config(errors));
    }
    if !(config.ellipticity_floor.is_finite() && config.ellipticity_floor > 0.0) {
        errors.push(FieldError::new(
            "ellipticity_floor",
            "ellipticity_floor must be positive",
        ));
    }

    let leader_controls = take(
        ControlSet::from_config(&config.leader_controls, "leader_controls"),
        &mut errors,
    );
    let follower_controls = take(
        ControlSet::from_config(&config.follower_controls, "follower_controls"),
        &mut errors,
    );
    let domain_box = take(DomainBox::from_config(&config.domain_box, dim), &mut errors);

    let (mv, mw) = match (&leader_controls, &follower_controls) {
        (Some(v), Some(w)) => (v.dim(), w.dim()),
        _ => (config.leader_controls.lower.len(), config.follower_controls.lower.len()),
    };
    let drift = take(preset::compile_drift(&config.drift, dim, mv, mw), &mut errors);
    let diffusion = take(preset::compile_diffusion(&config.diffusion, dim, mv, mw), &mut errors);
    let leader_cost = take(
        preset::compile_cost("leader_cost", &config.leader_cost, dim, mv),
        &mut errors,
    );
    let follower_cost = take(
        preset::compile_cost("follower_cost", &config.follower_cost, dim, mw),
        &mut errors,
    );
    let leader_terminal = take(
        preset::compile_terminal("leader_terminal", &config.leader_terminal, dim),
        &mut errors,
    );
    let follower_terminal = take(
        preset::compile_terminal("follower_terminal", &config.follower_terminal, dim),
        &mut errors,
    );

    if let Err(msg) = config.leader_generator.validate() {
        errors.push(FieldError::new("leader_generator.kappa", msg));
    }
    if let Err(msg) = config.follower_generator.validate() {
        errors.push(FieldError::new("follower_generator.kappa", msg));
    }

    if config.initial_state.len() != dim {
        errors.push(FieldError::new(
            "initial_state",
            format!(
                "shape mismatch: expected {dim} entries, got {}",
                config.initial_state.len()
            ),
        ));
    } else if let Some(b) = &domain_box {
        if !b.contains(&config.initial_state) {
            errors.push(FieldError::new("initial_state", "initial state outside domain box"));
        }
    }

    if !errors.is_empty() {
        return Err(Error::config(errors));
    }

    // every Option is Some once no errors were recorded
    Ok(ProblemSpec {
        horizon: config.horizon,
        dim,
        drift: drift.unwrap(),
        diffusion: diffusion.unwrap(),
        leader_cost: leader_cost.unwrap(),
        follower_cost: follower_cost.unwrap(),
        leader_terminal: leader_terminal.unwrap(),
        follower_terminal: follower_terminal.unwrap(),
        leader_generator: config.leader_generator,
        follower_generator: config.follower_generator,
        leader_controls: leader_controls.unwrap(),
        follower_controls: follower_controls.unwrap(),
        domain_box: domain_box.unwrap(),
        ellipticity_floor: config.ellipticity_floor,
        initial_state: config.initial_state.clone(),
        config: config.clone(),
    })
}

fn take<T>(r: core::result::Result<T, Vec<FieldError>>, errors: &mut Vec<FieldError>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(mut e) => {
            errors.append(&mut e);
            None
        }
    }
}

impl ProblemSpec {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn domain_box(&self) -> &DomainBox {
        &self.domain_box
    }

    pub fn ellipticity_floor(&self) -> f64 {
        self.ellipticity_floor
    }

    /// The record this problem was built from.
    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn drift_fn(&self) -> &Drift {
        &self.drift
    }

    pub fn diffusion_fn(&self) -> &Diffusion {
        &self.diffusion
    }

    pub fn controls(&self, player: Player) -> &ControlSet {
        match player {
            Player::Leader => &self.leader_controls,
            Player::Follower => &self.follower_controls,
        }
    }

    pub fn generator(&self, player: Player) -> &Generator {
        match player {
            Player::Leader => &self.leader_generator,
            Player::Follower => &self.follower_generator,
        }
    }

    /// `f(t, x, (v, w))` written into `out[..dim]`.
    #[inline]
    pub fn drift(&self, _t: f64, x: &[f64], v: &[f64], w: &[f64], out: &mut [f64]) {
        self.drift.eval(x, v, w, out);
    }

    /// `sigma(t, x, (v, w))`, row-major `dim x dim`, written into `out`.
    #[inline]
    pub fn diffusion(&self, _t: f64, x: &[f64], v: &[f64], w: &[f64], out: &mut [f64]) {
        self.diffusion.eval(x, v, w, out);
    }

    /// `c_1(t, x, v)` for the leader, `c_2(t, x, w)` for the follower.
    #[inline]
    pub fn running_cost(&self, player: Player, _t: f64, x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        match player {
            Player::Leader => self.leader_cost.eval(x, v),
            Player::Follower => self.follower_cost.eval(x, w),
        }
    }

    #[inline]
    pub fn terminal_cost(&self, player: Player, x: &[f64]) -> f64 {
        match player {
            Player::Leader => self.leader_terminal.eval(x),
            Player::Follower => self.follower_terminal.eval(x),
        }
    }

    /// Both running and terminal cost vanish identically for `player`.
    pub fn is_cost_free(&self, player: Player) -> bool {
        match player {
            Player::Leader => self.leader_cost.is_zero() && self.leader_terminal.is_zero(),
            Player::Follower => self.follower_cost.is_zero() && self.follower_terminal.is_zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn lq_config_builds() {
        let spec = build_problem(&catalog::lq_decoupled(0.0)).unwrap();
        assert_eq!(spec.controls(Player::Leader).len(), 41);
        assert_eq!(spec.dim(), 1);
    }

    #[test]
    fn three_point_leader_set() {
        let mut cfg = catalog::lq_decoupled(0.0);
        cfg.leader_controls = ControlSetConfig::interval(-1.0, 1.0, 3);
        let spec = build_problem(&cfg).unwrap();
        assert_eq!(spec.controls(Player::Leader).points(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn negative_horizon() {
        let mut cfg = catalog::zero_cost(1);
        cfg.horizon = -1.0;
        let Error::Config(errs) = build_problem(&cfg).unwrap_err() else {
            panic!("expected config error")
        };
        assert_eq!(errs.0[0].message, "horizon must be positive");
    }

    #[test]
    fn errors_are_collected_field_by_field() {
        let mut cfg = catalog::zero_cost(1);
        cfg.horizon = 0.0;
        cfg.leader_controls = ControlSetConfig::interval(0.0, 1.0, 0);
        cfg.initial_state = vec![100.0];
        cfg.drift = FunctionPreset::constant_terminal(0.0);
        let Error::Config(errs) = build_problem(&cfg).unwrap_err() else {
            panic!("expected config error")
        };
        let fields: Vec<&str> = errs.0.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"horizon"));
        assert!(fields.contains(&"leader_controls.points[0]"));
        assert!(fields.contains(&"initial_state"));
        assert!(fields.contains(&"drift"));
    }

    #[test]
    fn pure_function_of_config() {
        let cfg = catalog::lq_decoupled(0.2);
        assert_eq!(build_problem(&cfg).unwrap(), build_problem(&cfg).unwrap());
    }

    #[test]
    fn dim_out_of_range() {
        let mut cfg = catalog::zero_cost(1);
        cfg.dim = 3;
        assert!(build_problem(&cfg).is_err());
    }
}
