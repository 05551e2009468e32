//! Declarative problem records, as read from problem files.
//!
//! Coefficient arrays left out of a preset default to zeros of the right
//! shape. Unknown keys are rejected at deserialization time.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::generator::Generator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub horizon: f64,
    pub dim: usize,
    pub drift: FunctionPreset,
    pub diffusion: FunctionPreset,
    pub leader_cost: FunctionPreset,
    pub follower_cost: FunctionPreset,
    pub leader_terminal: FunctionPreset,
    pub follower_terminal: FunctionPreset,
    pub leader_generator: Generator,
    pub follower_generator: Generator,
    pub leader_controls: ControlSetConfig,
    pub follower_controls: ControlSetConfig,
    pub domain_box: BoxConfig,
    pub ellipticity_floor: f64,
    pub initial_state: Vec<f64>,
    /// Default numerical parameters; command-line flags take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericsConfig>,
}

/// Closed catalog of coefficient families.
///
/// Matrices are row-major nested arrays. Control-dependent terms are indexed
/// by control coordinate; `affine-diffusion` stacks one `dim x dim` matrix per
/// state or control coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionPreset {
    /// `f = offset + state x + leader v + follower w`
    AffineDrift {
        #[serde(default)]
        offset: Vec<f64>,
        #[serde(default)]
        state: Vec<Vec<f64>>,
        #[serde(default)]
        leader: Vec<Vec<f64>>,
        #[serde(default)]
        follower: Vec<Vec<f64>>,
    },
    /// `sigma = matrix`
    ConstantDiffusion { matrix: Vec<Vec<f64>> },
    /// `sigma = base + sum_i x_i S_i + sum_j v_j L_j + sum_k w_k F_k`
    AffineDiffusion {
        base: Vec<Vec<f64>>,
        #[serde(default)]
        state: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        leader: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        follower: Vec<Vec<Vec<f64>>>,
    },
    /// `c = constant + l.x + x'Qx + m.u + u'Ru` where `u` is the player's own control.
    QuadraticCost {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        state_linear: Vec<f64>,
        #[serde(default)]
        state_quadratic: Vec<Vec<f64>>,
        #[serde(default)]
        control_linear: Vec<f64>,
        #[serde(default)]
        control_quadratic: Vec<Vec<f64>>,
    },
    /// `psi = constant + l.x`
    LinearTerminal {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        linear: Vec<f64>,
    },
    /// `psi = constant + l.x + x'Qx`
    QuadraticTerminal {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        linear: Vec<f64>,
        #[serde(default)]
        quadratic: Vec<Vec<f64>>,
    },
}

impl FunctionPreset {
    pub fn family(&self) -> &'static str {
        match self {
            FunctionPreset::AffineDrift { .. } => "affine-drift",
            FunctionPreset::ConstantDiffusion { .. } => "constant-diffusion",
            FunctionPreset::AffineDiffusion { .. } => "affine-diffusion",
            FunctionPreset::QuadraticCost { .. } => "quadratic-cost",
            FunctionPreset::LinearTerminal { .. } => "linear-terminal",
            FunctionPreset::QuadraticTerminal { .. } => "quadratic-terminal",
        }
    }

    /// All-zero affine drift.
    pub fn zero_drift() -> Self {
        FunctionPreset::AffineDrift {
            offset: Vec::new(),
            state: Vec::new(),
            leader: Vec::new(),
            follower: Vec::new(),
        }
    }

    /// `s * I` in dimension `dim`.
    pub fn scaled_identity_diffusion(dim: usize, s: f64) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { s } else { 0.0 }).collect())
            .collect();
        FunctionPreset::ConstantDiffusion { matrix }
    }

    pub fn constant_cost(c: f64) -> Self {
        FunctionPreset::QuadraticCost {
            constant: c,
            state_linear: Vec::new(),
            state_quadratic: Vec::new(),
            control_linear: Vec::new(),
            control_quadratic: Vec::new(),
        }
    }

    pub fn constant_terminal(c: f64) -> Self {
        FunctionPreset::LinearTerminal {
            constant: c,
            linear: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSetConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Points per coordinate.
    pub points: Vec<usize>,
}

impl ControlSetConfig {
    pub fn interval(lower: f64, upper: f64, points: usize) -> Self {
        Self {
            lower: alloc::vec![lower],
            upper: alloc::vec![upper],
            points: alloc::vec![points],
        }
    }

    pub fn singleton(point: &[f64]) -> Self {
        Self {
            lower: point.to_vec(),
            upper: point.to_vec(),
            points: alloc::vec![1; point.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Optional per-problem numerical defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Grid nodes per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nodes: Option<Vec<usize>>,
    /// Grid time step; the largest CFL-admissible step dividing the horizon when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_dt: Option<f64>,
    /// Monte Carlo time step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_degree: Option<usize>,
}
