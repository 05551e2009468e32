//! Finite-difference Hamiltonians at one node.
//!
//! With `h_i` the spacing, `p`/`m` the neighbours along axis `i`, and `c`
//! the node value:
//!
//! - first differences `(p - c) / h` (forward), `(c - m) / h` (backward),
//!   `(p - m) / (2.0 * h)` (central); the gradient takes the forward one for
//!   `f_i > 0`, the backward one for `f_i < 0`, the central one for
//!   `f_i == 0`, and the only available one-sided one on a box face;
//! - `D2_ii = (p - 2.0 * c + m) / (h * h)` inside, `0` on a face;
//! - `D2_ij = (pp - pm - mp + mm) / (4.0 * h_i * h_j)` for `i != j` when
//!   neither axis is on a face, `0` otherwise;
//! - `L phi = 0.5 * sum_ij a_ij D2_ij + sum_i f_i Dphi_i` with `a = sigma sigma^T`,
//!   each sum accumulated from `0.0` in index order (row-major for `ij`);
//! - `z_j = sum_i Dphi_i sigma_ij`;
//! - the player's expression is `(c + L phi) + g(t, z)`, with `g` evaluated
//!   through [`Generator::eval_bounded`](crate::problem::Generator::eval_bounded).

use crate::hjb::LatticeGrid;
use crate::linalg::outer_square;
use crate::problem::{Player, ProblemSpec};

/// Finite differences of a value slice at one node.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    d: usize,
    forward: [f64; 2],
    backward: [f64; 2],
    central: [f64; 2],
    lower_face: [bool; 2],
    upper_face: [bool; 2],
    d2: [f64; 4],
}

impl Stencil {
    pub fn new(grid: &LatticeGrid, slice: &[f64], node: usize) -> Self {
        let d = grid.dim();
        let mut j = [0usize; 2];
        grid.multi_index(node, &mut j[..d]);
        let c = slice[node];
        let mut s = Stencil {
            d,
            forward: [0.0; 2],
            backward: [0.0; 2],
            central: [0.0; 2],
            lower_face: [false; 2],
            upper_face: [false; 2],
            d2: [0.0; 4],
        };
        for i in 0..d {
            let h = grid.spacing()[i];
            let st = grid.stride(i);
            let lo = j[i] == 0;
            let hi = j[i] == grid.counts()[i] - 1;
            s.lower_face[i] = lo;
            s.upper_face[i] = hi;
            let p = if hi { c } else { slice[node + st] };
            let m = if lo { c } else { slice[node - st] };
            if !hi {
                s.forward[i] = (p - c) / h;
            }
            if !lo {
                s.backward[i] = (c - m) / h;
            }
            if !lo && !hi {
                s.central[i] = (p - m) / (2.0 * h);
                s.d2[i * d + i] = (p - 2.0 * c + m) / (h * h);
            }
        }
        if d == 2 && !(s.lower_face[0] || s.upper_face[0] || s.lower_face[1] || s.upper_face[1]) {
            let (s0, s1) = (grid.stride(0), grid.stride(1));
            let (h0, h1) = (grid.spacing()[0], grid.spacing()[1]);
            let pp = slice[node + s0 + s1];
            let pm = slice[node + s0 - s1];
            let mp = slice[node - s0 + s1];
            let mm = slice[node - s0 - s1];
            let x = (pp - pm - mp + mm) / (4.0 * h0 * h1);
            s.d2[1] = x;
            s.d2[2] = x;
        }
        s
    }

    /// Upwind gradient for drift `f`.
    #[inline]
    pub fn gradient(&self, f: &[f64], out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = if self.lower_face[i] {
                self.forward[i]
            } else if self.upper_face[i] {
                self.backward[i]
            } else if f[i] > 0.0 {
                self.forward[i]
            } else if f[i] < 0.0 {
                self.backward[i]
            } else {
                self.central[i]
            };
        }
    }

    /// `L phi` for coefficients `(f, sigma)`; writes `z = Dphi sigma`.
    #[inline]
    pub fn operator(&self, f: &[f64], sigma: &[f64], z: &mut [f64]) -> f64 {
        let d = self.d;
        let mut a = [0.0; 4];
        outer_square(sigma, d, &mut a[..d * d]);
        let mut grad = [0.0; 2];
        self.gradient(f, &mut grad[..d]);
        let mut diff = 0.0;
        for i in 0..d {
            for j in 0..d {
                diff += a[i * d + j] * self.d2[i * d + j];
            }
        }
        let mut adv = 0.0;
        for i in 0..d {
            adv += f[i] * grad[i];
        }
        for j in 0..d {
            let mut s = 0.0;
            for i in 0..d {
                s += grad[i] * sigma[i * d + j];
            }
            z[j] = s;
        }
        0.5 * diff + adv
    }
}

/// `(c_i + L phi_i) + g_i(t, Dphi_i sigma)` at `(x, v, w)`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn expression(
    spec: &ProblemSpec,
    player: Player,
    stencil: &Stencil,
    t: f64,
    x: &[f64],
    v: &[f64],
    w: &[f64],
) -> f64 {
    let d = spec.dim();
    let mut f = [0.0; 2];
    let mut sigma = [0.0; 4];
    let mut z = [0.0; 2];
    spec.drift(t, x, v, w, &mut f[..d]);
    spec.diffusion(t, x, v, w, &mut sigma[..d * d]);
    let op = stencil.operator(&f[..d], &sigma[..d * d], &mut z[..d]);
    let cost = spec.running_cost(player, t, x, v, w);
    (cost + op) + spec.generator(player).eval_bounded(t, &z[..d])
}

/// `L phi` at `node` for the control pair `(v, w)`.
pub fn apply_operator(
    grid: &LatticeGrid,
    slice: &[f64],
    node: usize,
    spec: &ProblemSpec,
    t: f64,
    v: &[f64],
    w: &[f64],
) -> f64 {
    let d = spec.dim();
    let mut x = [0.0; 2];
    grid.coords(node, &mut x[..d]);
    let mut f = [0.0; 2];
    let mut sigma = [0.0; 4];
    let mut z = [0.0; 2];
    spec.drift(t, &x[..d], v, w, &mut f[..d]);
    spec.diffusion(t, &x[..d], v, w, &mut sigma[..d * d]);
    Stencil::new(grid, slice, node).operator(&f[..d], &sigma[..d * d], &mut z[..d])
}

/// Relative width of the band inside which two candidate values count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Minimum and first minimizer over a finite set, with a tie flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub value: f64,
    pub index: usize,
    /// Another candidate lies within `TIE_RTOL * max(1, |value|)` of the minimum.
    pub tie: bool,
}

struct Argmin {
    best: f64,
    index: usize,
    runner_up: f64,
}

impl Argmin {
    fn new() -> Self {
        Self {
            best: f64::INFINITY,
            index: 0,
            runner_up: f64::INFINITY,
        }
    }

    /// True when `value` becomes the new minimum.
    #[inline]
    fn offer(&mut self, i: usize, value: f64) -> bool {
        if value < self.best {
            self.runner_up = self.best;
            self.best = value;
            self.index = i;
            true
        } else {
            if value < self.runner_up {
                self.runner_up = value;
            }
            false
        }
    }

    fn finish(self) -> Choice {
        let tie = self.runner_up - self.best <= TIE_RTOL * self.best.abs().max(1.0);
        Choice {
            value: self.best,
            index: self.index,
            tie,
        }
    }
}

fn follower_choice(spec: &ProblemSpec, stencil: &Stencil, t: f64, x: &[f64], v: &[f64]) -> Choice {
    let mut am = Argmin::new();
    for (i, w) in spec.controls(Player::Follower).iter().enumerate() {
        am.offer(i, expression(spec, Player::Follower, stencil, t, x, v, w));
    }
    am.finish()
}

/// `min_w (c_2 + L phi_2 + g_2)` at `node` for the leader control `v`, with
/// the lexicographically first minimizer.
pub fn follower_hamiltonian(
    grid: &LatticeGrid,
    follower_slice: &[f64],
    node: usize,
    spec: &ProblemSpec,
    t: f64,
    v: &[f64],
) -> Choice {
    let d = spec.dim();
    let mut x = [0.0; 2];
    grid.coords(node, &mut x[..d]);
    follower_choice(spec, &Stencil::new(grid, follower_slice, node), t, &x[..d], v)
}

/// Leader decision at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderStep {
    /// Leader expression at `(v*, S(v*))`.
    pub h1: f64,
    /// Follower expression at `(v*, S(v*))`.
    pub h2: f64,
    pub v_index: usize,
    pub w_index: usize,
    pub leader_tie: bool,
    pub follower_tie: bool,
}

pub(crate) fn leader_step_at(spec: &ProblemSpec, s1: &Stencil, s2: &Stencil, t: f64, x: &[f64]) -> LeaderStep {
    let ws = spec.controls(Player::Follower);
    let mut am = Argmin::new();
    let mut resp = None;
    for (i, v) in spec.controls(Player::Leader).iter().enumerate() {
        let r = follower_choice(spec, s2, t, x, v);
        if am.offer(i, expression(spec, Player::Leader, s1, t, x, v, ws.point(r.index))) {
            resp = Some(r);
        }
    }
    let lead = am.finish();
    let resp = resp.expect("leader control set is nonempty and values are not NaN");
    LeaderStep {
        h1: lead.value,
        h2: resp.value,
        v_index: lead.index,
        w_index: resp.index,
        leader_tie: lead.tie,
        follower_tie: resp.tie,
    }
}

/// For each leader control `v`: `w = S(v)` from the follower slice, then the
/// leader expression at `(v, w)`; returns the first leader minimizer and
/// both Hamiltonians there.
pub fn leader_step(
    grid: &LatticeGrid,
    leader_slice: &[f64],
    follower_slice: &[f64],
    node: usize,
    spec: &ProblemSpec,
    t: f64,
) -> LeaderStep {
    let d = spec.dim();
    let mut x = [0.0; 2];
    grid.coords(node, &mut x[..d]);
    let s1 = Stencil::new(grid, leader_slice, node);
    let s2 = Stencil::new(grid, follower_slice, node);
    leader_step_at(spec, &s1, &s2, t, &x[..d])
}
