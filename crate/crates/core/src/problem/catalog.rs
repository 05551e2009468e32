//! Named problem instances used by the test suites and as CLI fixtures.

use alloc::vec;
use alloc::vec::Vec;

use super::config::{BoxConfig, ControlSetConfig, FunctionPreset, ProblemConfig};
use super::generator::Generator;

fn unit_interval_box(dim: usize, half_width: f64) -> BoxConfig {
    BoxConfig {
        lower: vec![-half_width; dim],
        upper: vec![half_width; dim],
    }
}

fn square_control_cost() -> FunctionPreset {
    FunctionPreset::QuadraticCost {
        constant: 0.0,
        state_linear: Vec::new(),
        state_quadratic: Vec::new(),
        control_linear: Vec::new(),
        control_quadratic: vec![vec![1.0]],
    }
}

fn square_terminal() -> FunctionPreset {
    FunctionPreset::QuadraticTerminal {
        constant: 0.0,
        linear: Vec::new(),
        quadratic: vec![vec![1.0]],
    }
}

/// `f = v + w` in one dimension.
fn additive_drift() -> FunctionPreset {
    FunctionPreset::AffineDrift {
        offset: Vec::new(),
        state: Vec::new(),
        leader: vec![vec![1.0]],
        follower: vec![vec![1.0]],
    }
}

/// All costs zero, Brownian dynamics, singleton control sets at the origin.
pub fn zero_cost(dim: usize) -> ProblemConfig {
    ProblemConfig {
        horizon: 1.0,
        dim,
        drift: FunctionPreset::zero_drift(),
        diffusion: FunctionPreset::scaled_identity_diffusion(dim, 1.0),
        leader_cost: FunctionPreset::constant_cost(0.0),
        follower_cost: FunctionPreset::constant_cost(0.0),
        leader_terminal: FunctionPreset::constant_terminal(0.0),
        follower_terminal: FunctionPreset::constant_terminal(0.0),
        leader_generator: Generator::ZERO,
        follower_generator: Generator::ZERO,
        leader_controls: ControlSetConfig::singleton(&vec![0.0; dim]),
        follower_controls: ControlSetConfig::singleton(&vec![0.0; dim]),
        domain_box: unit_interval_box(dim, 2.0),
        ellipticity_floor: 0.5,
        initial_state: vec![0.0; dim],
        numerics: None,
    }
}

/// Pure diffusion `dX = s dB` with `Psi_1 = Psi_2 = x^2` and no running cost.
///
/// `phi(t, x) = x^2 + s^2 (T - t)` solves both equations on the whole line.
pub fn heat(s: f64) -> ProblemConfig {
    ProblemConfig {
        horizon: 1.0,
        dim: 1,
        drift: FunctionPreset::zero_drift(),
        diffusion: FunctionPreset::scaled_identity_diffusion(1, s),
        leader_cost: FunctionPreset::constant_cost(0.0),
        follower_cost: FunctionPreset::constant_cost(0.0),
        leader_terminal: square_terminal(),
        follower_terminal: square_terminal(),
        leader_generator: Generator::ZERO,
        follower_generator: Generator::ZERO,
        leader_controls: ControlSetConfig::singleton(&[0.0]),
        follower_controls: ControlSetConfig::singleton(&[0.0]),
        domain_box: unit_interval_box(1, 3.0),
        ellipticity_floor: (s * s).min(1.0) * 0.5,
        initial_state: vec![0.5],
        numerics: None,
    }
}

/// `f = v + w`, `sigma = 0.5`, `c_1 = v^2`, `c_2 = w^2`, zero terminal costs.
///
/// With zero value slices the optimal pair is `(0, 0)` everywhere.
pub fn decoupled() -> ProblemConfig {
    ProblemConfig {
        horizon: 1.0,
        dim: 1,
        drift: additive_drift(),
        diffusion: FunctionPreset::scaled_identity_diffusion(1, 0.5),
        leader_cost: square_control_cost(),
        follower_cost: square_control_cost(),
        leader_terminal: FunctionPreset::constant_terminal(0.0),
        follower_terminal: FunctionPreset::constant_terminal(0.0),
        leader_generator: Generator::ZERO,
        follower_generator: Generator::ZERO,
        leader_controls: ControlSetConfig::interval(-1.0, 1.0, 3),
        follower_controls: ControlSetConfig::interval(-1.0, 1.0, 3),
        domain_box: unit_interval_box(1, 2.0),
        ellipticity_floor: 0.125,
        initial_state: vec![0.5],
        numerics: None,
    }
}

/// Linear-quadratic hierarchy: `f = v + w`, `sigma = 0.5`, `c_1 = v^2`,
/// `c_2 = w^2`, `Psi_1 = Psi_2 = x^2`, scaled-l1 generators with `kappa`,
/// controls on `[-2, 2]` with step 0.1.
pub fn lq_decoupled(kappa: f64) -> ProblemConfig {
    ProblemConfig {
        horizon: 1.0,
        dim: 1,
        drift: additive_drift(),
        diffusion: FunctionPreset::scaled_identity_diffusion(1, 0.5),
        leader_cost: square_control_cost(),
        follower_cost: square_control_cost(),
        leader_terminal: square_terminal(),
        follower_terminal: square_terminal(),
        leader_generator: Generator::scaled_l1(kappa),
        follower_generator: Generator::scaled_l1(kappa),
        leader_controls: ControlSetConfig::interval(-2.0, 2.0, 41),
        follower_controls: ControlSetConfig::interval(-2.0, 2.0, 41),
        domain_box: unit_interval_box(1, 2.0),
        ellipticity_floor: 0.125,
        initial_state: vec![0.5],
        numerics: None,
    }
}
