//! Compiled coefficient functions `f`, `sigma`, `c_i` and `Psi_i`.
//!
//! All matrices are stored row-major and flat. None of the catalog families
//! depends on time.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::config::FunctionPreset;
use crate::error::FieldError;

#[derive(Debug, Clone, PartialEq)]
pub struct Drift {
    dim: usize,
    offset: Vec<f64>,
    state: Vec<f64>,
    leader: Vec<f64>,
    follower: Vec<f64>,
    leader_dim: usize,
    follower_dim: usize,
}

impl Drift {
    #[inline]
    pub fn eval(&self, x: &[f64], v: &[f64], w: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut s = self.offset[i];
            for j in 0..d {
                s += self.state[i * d + j] * x[j];
            }
            for j in 0..self.leader_dim {
                s += self.leader[i * self.leader_dim + j] * v[j];
            }
            for j in 0..self.follower_dim {
                s += self.follower[i * self.follower_dim + j] * w[j];
            }
            out[i] = s;
        }
    }

    /// Operator-norm style bound on the x-Lipschitz constant (max absolute row sum).
    pub fn state_lipschitz_bound(&self) -> f64 {
        row_sum_norm(&self.state, self.dim, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diffusion {
    dim: usize,
    base: Vec<f64>,
    /// One `d x d` slab per coordinate; empty when the family has no such dependence.
    state: Vec<f64>,
    leader: Vec<f64>,
    follower: Vec<f64>,
}

impl Diffusion {
    #[inline]
    pub fn eval(&self, x: &[f64], v: &[f64], w: &[f64], out: &mut [f64]) {
        let dd = self.dim * self.dim;
        out[..dd].copy_from_slice(&self.base);
        accumulate_slabs(&self.state, x, dd, out);
        accumulate_slabs(&self.leader, v, dd, out);
        accumulate_slabs(&self.follower, w, dd, out);
    }

    /// True when `sigma` does not vary with the state or either control.
    pub fn is_constant(&self) -> bool {
        self.state.is_empty() && self.leader.is_empty() && self.follower.is_empty()
    }
}

#[inline]
fn accumulate_slabs(slabs: &[f64], coords: &[f64], dd: usize, out: &mut [f64]) {
    if slabs.is_empty() {
        return;
    }
    for (k, c) in coords.iter().enumerate() {
        let slab = &slabs[k * dd..(k + 1) * dd];
        for (o, s) in out[..dd].iter_mut().zip(slab) {
            *o += s * c;
        }
    }
}

/// Running cost in the state and the player's own control.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningCost {
    dim: usize,
    control_dim: usize,
    constant: f64,
    state_linear: Vec<f64>,
    state_quadratic: Vec<f64>,
    control_linear: Vec<f64>,
    control_quadratic: Vec<f64>,
}

impl RunningCost {
    #[inline]
    pub fn eval(&self, x: &[f64], u: &[f64]) -> f64 {
        let mut s = self.constant;
        s += quadratic_form(&self.state_linear, &self.state_quadratic, x, self.dim);
        s += quadratic_form(&self.control_linear, &self.control_quadratic, u, self.control_dim);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0
            && all_zero(&self.state_linear)
            && all_zero(&self.state_quadratic)
            && all_zero(&self.control_linear)
            && all_zero(&self.control_quadratic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalCost {
    dim: usize,
    constant: f64,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
}

impl TerminalCost {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + quadratic_form(&self.linear, &self.quadratic, x, self.dim)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && all_zero(&self.linear) && all_zero(&self.quadratic)
    }
}

#[inline]
fn quadratic_form(linear: &[f64], quadratic: &[f64], x: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        s += linear[i] * x[i];
    }
    for i in 0..n {
        for j in 0..n {
            s += quadratic[i * n + j] * x[i] * x[j];
        }
    }
    s
}

fn all_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

fn row_sum_norm(m: &[f64], rows: usize, cols: usize) -> f64 {
    (0..rows)
        .map(|i| m[i * cols..(i + 1) * cols].iter().map(|a| a.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Collects shape errors while flattening nested coefficient arrays.
struct Shapes<'a> {
    field: &'a str,
    errors: Vec<FieldError>,
}

impl Shapes<'_> {
    fn err(&mut self, key: &str, msg: String) {
        self.errors.push(FieldError::new(format!("{}.{key}", self.field), msg));
    }

    fn finite(&mut self, key: &str, data: &[f64]) {
        if data.iter().any(|x| !x.is_finite()) {
            self.err(key, String::from("coefficients must be finite"));
        }
    }

    fn vector(&mut self, key: &str, v: &[f64], n: usize) -> Vec<f64> {
        if v.is_empty() {
            return alloc::vec![0.0; n];
        }
        if v.len() != n {
            self.err(key, format!("shape mismatch: expected {n} entries, got {}", v.len()));
            return alloc::vec![0.0; n];
        }
        self.finite(key, v);
        v.to_vec()
    }

    fn matrix(&mut self, key: &str, m: &[Vec<f64>], rows: usize, cols: usize, required: bool) -> Vec<f64> {
        if m.is_empty() && !required {
            return alloc::vec![0.0; rows * cols];
        }
        if m.len() != rows || m.iter().any(|r| r.len() != cols) {
            self.err(key, format!("shape mismatch: expected a {rows}x{cols} matrix"));
            return alloc::vec![0.0; rows * cols];
        }
        let flat: Vec<f64> = m.iter().flatten().copied().collect();
        self.finite(key, &flat);
        flat
    }

    /// Stack of `count` square `d x d` slabs; empty input means no dependence.
    fn slabs(&mut self, key: &str, s: &[Vec<Vec<f64>>], count: usize, d: usize) -> Vec<f64> {
        if s.is_empty() {
            return Vec::new();
        }
        if s.len() != count {
            self.err(
                key,
                format!("shape mismatch: expected {count} matrices, got {}", s.len()),
            );
            return Vec::new();
        }
        let mut out = Vec::with_capacity(count * d * d);
        for slab in s {
            out.extend(self.matrix(key, slab, d, d, true));
        }
        out
    }
}

fn wrong_family(field: &str, preset: &FunctionPreset, expected: &str) -> Vec<FieldError> {
    alloc::vec![FieldError::new(
        field,
        format!(
            "unknown preset id '{}' for this role (expected {expected})",
            preset.family()
        ),
    )]
}

pub(crate) fn compile_drift(p: &FunctionPreset, dim: usize, mv: usize, mw: usize) -> Result<Drift, Vec<FieldError>> {
    let FunctionPreset::AffineDrift {
        offset,
        state,
        leader,
        follower,
    } = p
    else {
        return Err(wrong_family("drift", p, "affine-drift"));
    };
    let mut sh = Shapes {
        field: "drift",
        errors: Vec::new(),
    };
    let drift = Drift {
        dim,
        offset: sh.vector("offset", offset, dim),
        state: sh.matrix("state", state, dim, dim, false),
        leader: sh.matrix("leader", leader, dim, mv, false),
        follower: sh.matrix("follower", follower, dim, mw, false),
        leader_dim: mv,
        follower_dim: mw,
    };
    if sh.errors.is_empty() {
        Ok(drift)
    } else {
        Err(sh.errors)
    }
}

pub(crate) fn compile_diffusion(
    p: &FunctionPreset,
    dim: usize,
    mv: usize,
    mw: usize,
) -> Result<Diffusion, Vec<FieldError>> {
    let mut sh = Shapes {
        field: "diffusion",
        errors: Vec::new(),
    };
    let diffusion = match p {
        FunctionPreset::ConstantDiffusion { matrix } => Diffusion {
            dim,
            base: sh.matrix("matrix", matrix, dim, dim, true),
            state: Vec::new(),
            leader: Vec::new(),
            follower: Vec::new(),
        },
        FunctionPreset::AffineDiffusion {
            base,
            state,
            leader,
            follower,
        } => Diffusion {
            dim,
            base: sh.matrix("base", base, dim, dim, true),
            state: sh.slabs("state", state, dim, dim),
            leader: sh.slabs("leader", leader, mv, dim),
            follower: sh.slabs("follower", follower, mw, dim),
        },
        _ => return Err(wrong_family("diffusion", p, "constant-diffusion or affine-diffusion")),
    };
    if sh.errors.is_empty() {
        Ok(diffusion)
    } else {
        Err(sh.errors)
    }
}

pub(crate) fn compile_cost(
    field: &str,
    p: &FunctionPreset,
    dim: usize,
    m: usize,
) -> Result<RunningCost, Vec<FieldError>> {
    let FunctionPreset::QuadraticCost {
        constant,
        state_linear,
        state_quadratic,
        control_linear,
        control_quadratic,
    } = p
    else {
        return Err(wrong_family(field, p, "quadratic-cost"));
    };
    let mut sh = Shapes {
        field,
        errors: Vec::new(),
    };
    sh.finite("constant", &[*constant]);
    let cost = RunningCost {
        dim,
        control_dim: m,
        constant: *constant,
        state_linear: sh.vector("state_linear", state_linear, dim),
        state_quadratic: sh.matrix("state_quadratic", state_quadratic, dim, dim, false),
        control_linear: sh.vector("control_linear", control_linear, m),
        control_quadratic: sh.matrix("control_quadratic", control_quadratic, m, m, false),
    };
    if sh.errors.is_empty() {
        Ok(cost)
    } else {
        Err(sh.errors)
    }
}

pub(crate) fn compile_terminal(field: &str, p: &FunctionPreset, dim: usize) -> Result<TerminalCost, Vec<FieldError>> {
    let mut sh = Shapes {
        field,
        errors: Vec::new(),
    };
    let terminal = match p {
        FunctionPreset::LinearTerminal { constant, linear } => {
            sh.finite("constant", &[*constant]);
            TerminalCost {
                dim,
                constant: *constant,
                linear: sh.vector("linear", linear, dim),
                quadratic: alloc::vec![0.0; dim * dim],
            }
        }
        FunctionPreset::QuadraticTerminal {
            constant,
            linear,
            quadratic,
        } => {
            sh.finite("constant", &[*constant]);
            TerminalCost {
                dim,
                constant: *constant,
                linear: sh.vector("linear", linear, dim),
                quadratic: sh.matrix("quadratic", quadratic, dim, dim, false),
            }
        }
        _ => return Err(wrong_family(field, p, "linear-terminal or quadratic-terminal")),
    };
    if sh.errors.is_empty() {
        Ok(terminal)
    } else {
        Err(sh.errors)
    }
}
