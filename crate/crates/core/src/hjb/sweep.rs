use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::scheme::{expression, leader_step_at, LeaderStep, Stencil};
use super::{LatticeGrid, Stability};
use crate::bsde::{risk_value_on, RegressionBasis, RiskEstimate};
use crate::error::{Error, Result};
use crate::par;
use crate::problem::{Player, ProblemSpec};
use crate::sde::{self, FeedbackPolicy, TabulatedPolicy};

/// One player's value on every node and time slice, `[(n_t + 1) x nodes]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    n_nodes: usize,
    values: Vec<f64>,
}

impl ValueField {
    fn terminal(spec: &ProblemSpec, grid: &LatticeGrid, player: Player) -> Self {
        let n = grid.n_nodes();
        let mut values = vec![0.0; (grid.n_t() + 1) * n];
        let mut x = [0.0; 2];
        let d = grid.dim();
        for node in 0..n {
            grid.coords(node, &mut x[..d]);
            values[grid.n_t() * n + node] = spec.terminal_cost(player, &x[..d]);
        }
        Self { n_nodes: n, values }
    }

    pub fn n_slices(&self) -> usize {
        self.values.len() / self.n_nodes
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Control-set indices of `v*` and `w*`, `[n_t x nodes]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyField {
    n_nodes: usize,
    leader: Vec<u32>,
    follower: Vec<u32>,
}

impl PolicyField {
    fn zeroed(n_t: usize, n_nodes: usize) -> Self {
        Self {
            n_nodes,
            leader: vec![0; n_t * n_nodes],
            follower: vec![0; n_t * n_nodes],
        }
    }

    pub fn leader_index(&self, k: usize, node: usize) -> usize {
        self.leader[k * self.n_nodes + node] as usize
    }

    pub fn follower_index(&self, k: usize, node: usize) -> usize {
        self.follower[k * self.n_nodes + node] as usize
    }

    pub fn leader_indices(&self) -> &[u32] {
        &self.leader
    }

    pub fn follower_indices(&self) -> &[u32] {
        &self.follower
    }

    /// The tabulated policy of `player` as a simulation feedback rule.
    pub fn feedback(&self, spec: &ProblemSpec, grid: &LatticeGrid, player: Player) -> Result<FeedbackPolicy> {
        let indices = match player {
            Player::Leader => self.leader.clone(),
            Player::Follower => self.follower.clone(),
        };
        Ok(FeedbackPolicy::tabulated(TabulatedPolicy::new(
            grid.clone(),
            spec.controls(player).clone(),
            indices,
        )?))
    }
}

/// Extremes of both value fields on one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub k: usize,
    pub t: f64,
    pub leader_min: f64,
    pub leader_max: f64,
    pub follower_min: f64,
    pub follower_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub counts: Vec<usize>,
    pub spacing: Vec<f64>,
    pub n_t: usize,
    pub dt: f64,
    pub stability: Stability,
    /// `dt / dt_max`.
    pub cfl_ratio: f64,
    /// Node-steps whose leader argmin was not unique.
    pub leader_ties: usize,
    /// Node-steps whose follower argmin at `v*` was not unique.
    pub follower_ties: usize,
    pub slices: Vec<SliceStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalSolution {
    pub grid: LatticeGrid,
    pub leader: ValueField,
    pub follower: ValueField,
    pub policy: PolicyField,
    pub report: SweepReport,
}

impl HierarchicalSolution {
    pub fn value(&self, player: Player) -> &ValueField {
        match player {
            Player::Leader => &self.leader,
            Player::Follower => &self.follower,
        }
    }

    /// `phi_i(0, x)` by multilinear interpolation.
    pub fn initial_value(&self, player: Player, x: &[f64]) -> f64 {
        self.grid.interpolate(self.value(player).slice(0), x)
    }
}

fn check_grid(spec: &ProblemSpec, grid: &LatticeGrid) -> Result<Stability> {
    let st = Stability::sample(spec, grid.counts())?;
    if grid.dt() > st.dt_max {
        return Err(Error::Cfl {
            dt: grid.dt(),
            dt_max: st.dt_max,
            suggested_steps: st.min_steps(spec.horizon()),
        });
    }
    Ok(st)
}

fn slice_stats(k: usize, t: f64, a: &[f64], b: &[f64]) -> SliceStats {
    let mm = |s: &[f64]| {
        s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        })
    };
    let (leader_min, leader_max) = mm(a);
    let (follower_min, follower_max) = mm(b);
    SliceStats {
        k,
        t,
        leader_min,
        leader_max,
        follower_min,
        follower_max,
    }
}

/// One explicit step of both fields: `next + dt * H` at `(v*, S(v*))`.
fn hierarchical_step(
    spec: &ProblemSpec,
    grid: &LatticeGrid,
    t: f64,
    dt: f64,
    leader_next: &[f64],
    follower_next: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<LeaderStep>) {
    let d = grid.dim();
    let steps = par::map_range(grid.n_nodes(), |node| {
        let mut x = [0.0; 2];
        grid.coords(node, &mut x[..d]);
        let s1 = Stencil::new(grid, leader_next, node);
        let s2 = Stencil::new(grid, follower_next, node);
        leader_step_at(spec, &s1, &s2, t, &x[..d])
    });
    let phi1 = steps.iter().zip(leader_next).map(|(s, v)| v + dt * s.h1).collect();
    let phi2 = steps.iter().zip(follower_next).map(|(s, v)| v + dt * s.h2).collect();
    (phi1, phi2, steps)
}

/// Backward sweep of both value fields with the nested leader/follower argmin.
pub fn backward_sweep_hierarchical(spec: &ProblemSpec, grid: &LatticeGrid) -> Result<HierarchicalSolution> {
    let stability = check_grid(spec, grid)?;
    let n_t = grid.n_t();
    let n = grid.n_nodes();
    let mut leader = ValueField::terminal(spec, grid, Player::Leader);
    let mut follower = ValueField::terminal(spec, grid, Player::Follower);
    let mut policy = PolicyField::zeroed(n_t, n);
    let mut slices = vec![slice_stats(n_t, grid.time(n_t), leader.slice(n_t), follower.slice(n_t))];
    let (mut leader_ties, mut follower_ties) = (0, 0);

    for k in (0..n_t).rev() {
        let t = grid.time(k);
        let (phi1, phi2, steps) =
            hierarchical_step(spec, grid, t, grid.dt(), leader.slice(k + 1), follower.slice(k + 1));
        leader.slice_mut(k).copy_from_slice(&phi1);
        follower.slice_mut(k).copy_from_slice(&phi2);
        for (node, s) in steps.iter().enumerate() {
            policy.leader[k * n + node] = s.v_index as u32;
            policy.follower[k * n + node] = s.w_index as u32;
            leader_ties += s.leader_tie as usize;
            follower_ties += s.follower_tie as usize;
        }
        slices.push(slice_stats(k, t, &phi1, &phi2));
    }
    slices.reverse();

    Ok(HierarchicalSolution {
        report: SweepReport {
            counts: grid.counts().to_vec(),
            spacing: grid.spacing().to_vec(),
            n_t,
            dt: grid.dt(),
            stability,
            cfl_ratio: grid.dt() / stability.dt_max,
            leader_ties,
            follower_ties,
            slices,
        },
        grid: grid.clone(),
        leader,
        follower,
        policy,
    })
}

/// Leader play supplied to a follower-only sweep.
#[derive(Debug, Clone, Copy)]
pub enum LeaderPlay<'a> {
    /// Index into the leader control set, used everywhere.
    Constant(usize),
    /// Leader indices of a policy field on the same grid.
    Field(&'a PolicyField),
}

/// Backward sweep of the follower field against a given leader play.
/// The returned policy field records the leader indices used and `w*`.
pub fn backward_sweep_follower(
    spec: &ProblemSpec,
    grid: &LatticeGrid,
    leader: LeaderPlay<'_>,
) -> Result<(ValueField, PolicyField)> {
    check_grid(spec, grid)?;
    let n_t = grid.n_t();
    let n = grid.n_nodes();
    let vs = spec.controls(Player::Leader);
    match leader {
        LeaderPlay::Constant(i) if i >= vs.len() => {
            return Err(Error::Precondition(format!(
                "leader index {i} outside a control set of size {}",
                vs.len()
            )))
        }
        LeaderPlay::Field(p) if p.n_nodes != n || p.leader.len() != n_t * n => {
            return Err(Error::DimensionMismatch {
                what: "leader policy field",
                expected: n_t * n,
                got: p.leader.len(),
            })
        }
        _ => {}
    }
    let d = grid.dim();
    let ws = spec.controls(Player::Follower);
    let mut field = ValueField::terminal(spec, grid, Player::Follower);
    let mut policy = PolicyField::zeroed(n_t, n);
    for k in (0..n_t).rev() {
        let t = grid.time(k);
        let next = field.slice(k + 1);
        let out = par::map_range(n, |node| {
            let vi = match leader {
                LeaderPlay::Constant(i) => i,
                LeaderPlay::Field(p) => p.leader_index(k, node),
            };
            let mut x = [0.0; 2];
            grid.coords(node, &mut x[..d]);
            let s = Stencil::new(grid, next, node);
            let v = vs.point(vi);
            let mut best = (f64::INFINITY, 0usize);
            for (i, w) in ws.iter().enumerate() {
                let e = expression(spec, Player::Follower, &s, t, &x[..d], v, w);
                if e < best.0 {
                    best = (e, i);
                }
            }
            (next[node] + grid.dt() * best.0, vi, best.1)
        });
        for (node, (value, vi, wi)) in out.into_iter().enumerate() {
            field.values[k * n + node] = value;
            policy.leader[k * n + node] = vi as u32;
            policy.follower[k * n + node] = wi as u32;
        }
    }
    Ok((field, policy))
}

/// Time step used when replaying the recursion for a DPP residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DppMode {
    /// The solution's own step.
    SameStep,
    /// Half the solution's step (twice as many substeps).
    HalfStep,
}

/// `|phi_i(0, x0)` recomputed from the stored slice at `t_r` minus the stored
/// `phi_i(0, x0)|`, both interpolated at the initial state.
pub fn dpp_residual(
    spec: &ProblemSpec,
    solution: &HierarchicalSolution,
    player: Player,
    r_steps: usize,
    mode: DppMode,
) -> Result<f64> {
    let grid = &solution.grid;
    if r_steps == 0 || r_steps > grid.n_t() {
        return Err(Error::Precondition(format!(
            "r_steps = {r_steps} outside 1..={}",
            grid.n_t()
        )));
    }
    let (sub, h) = match mode {
        DppMode::SameStep => (r_steps, grid.dt()),
        DppMode::HalfStep => (2 * r_steps, grid.dt() / 2.0),
    };
    let mut phi1 = solution.leader.slice(r_steps).to_vec();
    let mut phi2 = solution.follower.slice(r_steps).to_vec();
    for s in (0..sub).rev() {
        let t = match mode {
            DppMode::SameStep => grid.time(s),
            DppMode::HalfStep => s as f64 * h,
        };
        let (a, b, _) = hierarchical_step(spec, grid, t, h, &phi1, &phi2);
        phi1 = a;
        phi2 = b;
    }
    let x0 = spec.initial_state();
    let recomputed = match player {
        Player::Leader => grid.interpolate(&phi1, x0),
        Player::Follower => grid.interpolate(&phi2, x0),
    };
    Ok((recomputed - solution.initial_value(player, x0)).abs())
}

/// Grid values against Monte Carlo risk values under the tabulated policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub grid_value_1: f64,
    pub mc_value_1: RiskEstimate,
    pub grid_value_2: f64,
    pub mc_value_2: RiskEstimate,
    pub gap_1: f64,
    pub gap_2: f64,
}

/// Smallest relative distance of the initial state from the box faces.
pub const CROSSVAL_MARGIN: f64 = 0.1;

/// Simulates under `(v*, w*)` read from the policy field and compares each
/// player's Monte Carlo risk value with its grid value at `(0, x0)`.
pub fn cross_validate(
    spec: &ProblemSpec,
    solution: &HierarchicalSolution,
    n_paths: usize,
    dt_mc: f64,
    seed: u64,
    basis: RegressionBasis,
) -> Result<CrossValidation> {
    let x0 = spec.initial_state();
    let margin = spec.domain_box().relative_margin(x0);
    if margin < CROSSVAL_MARGIN {
        return Err(Error::Precondition(format!(
            "initial state is {:.1}% of the box width from the boundary (need {:.0}%)",
            100.0 * margin,
            100.0 * CROSSVAL_MARGIN
        )));
    }
    let grid = &solution.grid;
    let v = solution.policy.feedback(spec, grid, Player::Leader)?;
    let w = solution.policy.feedback(spec, grid, Player::Follower)?;
    let bundle = sde::simulate(spec, &v, &w, n_paths, dt_mc, seed)?;
    let mc1 = risk_value_on(&bundle, spec, Player::Leader, basis)?;
    let mc2 = risk_value_on(&bundle, spec, Player::Follower, basis)?;
    let g1 = solution.initial_value(Player::Leader, x0);
    let g2 = solution.initial_value(Player::Follower, x0);
    Ok(CrossValidation {
        grid_value_1: g1,
        mc_value_1: mc1,
        grid_value_2: g2,
        mc_value_2: mc2,
        gap_1: (g1 - mc1.value).abs(),
        gap_2: (g2 - mc2.value).abs(),
    })
}
