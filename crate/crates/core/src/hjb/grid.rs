use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::outer_square;
use crate::problem::ProblemSpec;

/// Uniform space-time lattice over the domain box.
///
/// Nodes are numbered with axis 0 slowest. The last node on each axis sits
/// on the upper box face exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGrid {
    counts: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    spacing: Vec<f64>,
    horizon: f64,
    n_t: usize,
    dt: f64,
    stability: Stability,
}

/// Sampled coefficient maxima and the explicit-scheme step bound they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub a_max: f64,
    pub f_max: f64,
    pub h_min: f64,
    pub dt_max: f64,
}

impl Stability {
    /// `h^2 / (2 d a_max + h f_max d)`; infinite for vanishing dynamics.
    pub fn sample(spec: &ProblemSpec, counts: &[usize]) -> Result<Self> {
        let (lower, upper, spacing) = axes(spec, counts)?;
        let d = spec.dim();
        let vs = spec.controls(crate::Player::Leader);
        let ws = spec.controls(crate::Player::Follower);
        let nodes: usize = counts.iter().product();
        let mut x = vec![0.0; d];
        let mut f = vec![0.0; d];
        let mut sigma = vec![0.0; d * d];
        let mut a = vec![0.0; d * d];
        let (mut a_max, mut f_max) = (0.0f64, 0.0f64);
        for node in 0..nodes {
            node_coords(counts, &lower, &upper, &spacing, node, &mut x);
            for v in vs.iter() {
                for w in ws.iter() {
                    spec.drift(0.0, &x, v, w, &mut f);
                    spec.diffusion(0.0, &x, v, w, &mut sigma);
                    outer_square(&sigma, d, &mut a);
                    a_max = a.iter().fold(a_max, |m, e| m.max(e.abs()));
                    f_max = f.iter().fold(f_max, |m, e| m.max(e.abs()));
                }
            }
        }
        let h = spacing.iter().copied().fold(f64::INFINITY, f64::min);
        let denom = 2.0 * d as f64 * a_max + h * f_max * d as f64;
        let dt_max = if denom > 0.0 { h * h / denom } else { f64::INFINITY };
        Ok(Self {
            a_max,
            f_max,
            h_min: h,
            dt_max,
        })
    }

    /// Fewest uniform steps over `horizon` that satisfy the bound.
    pub fn min_steps(&self, horizon: f64) -> usize {
        if self.dt_max.is_infinite() {
            return 1;
        }
        let mut n = libm::ceil(horizon / self.dt_max) as usize;
        n = n.max(1);
        while horizon / n as f64 > self.dt_max {
            n += 1;
        }
        n
    }
}

fn axes(spec: &ProblemSpec, counts: &[usize]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let d = spec.dim();
    if counts.len() != d {
        return Err(Error::DimensionMismatch {
            what: "grid node counts",
            expected: d,
            got: counts.len(),
        });
    }
    if counts.iter().any(|&n| n < 2) {
        return Err(Error::Precondition("every grid axis needs at least 2 nodes".into()));
    }
    let b = spec.domain_box();
    let lower = b.lower().to_vec();
    let upper = b.upper().to_vec();
    let spacing = (0..d).map(|i| (upper[i] - lower[i]) / (counts[i] - 1) as f64).collect();
    Ok((lower, upper, spacing))
}

fn node_coords(counts: &[usize], lower: &[f64], upper: &[f64], spacing: &[f64], node: usize, x: &mut [f64]) {
    let mut rest = node;
    for a in (0..counts.len()).rev() {
        let j = rest % counts[a];
        rest /= counts[a];
        x[a] = if j == counts[a] - 1 {
            upper[a]
        } else {
            lower[a] + spacing[a] * j as f64
        };
    }
}

/// Node counts giving spacing `h` (rounded to the nearest whole cell count).
pub fn counts_for_spacing(spec: &ProblemSpec, h: f64) -> Vec<usize> {
    let b = spec.domain_box();
    (0..spec.dim())
        .map(|i| (libm::round(b.width(i) / h) as usize).max(1) + 1)
        .collect()
}

impl LatticeGrid {
    /// Builds the grid and rejects time steps above the stability bound.
    pub fn new(spec: &ProblemSpec, counts: &[usize], n_t: usize) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::TimeStep {
                dt: f64::INFINITY,
                reason: "at least one time step is required",
            });
        }
        let stability = Stability::sample(spec, counts)?;
        let dt = spec.horizon() / n_t as f64;
        if dt > stability.dt_max {
            return Err(Error::Cfl {
                dt,
                dt_max: stability.dt_max,
                suggested_steps: stability.min_steps(spec.horizon()),
            });
        }
        let (lower, upper, spacing) = axes(spec, counts)?;
        Ok(Self {
            counts: counts.to_vec(),
            lower,
            upper,
            spacing,
            horizon: spec.horizon(),
            n_t,
            dt,
            stability,
        })
    }

    /// Grid with the fewest time steps allowed by the stability bound.
    pub fn with_stable_steps(spec: &ProblemSpec, counts: &[usize]) -> Result<Self> {
        let n_t = Stability::sample(spec, counts)?.min_steps(spec.horizon());
        Self::new(spec, counts, n_t)
    }

    /// Same nodes, `n_t` time steps.
    pub fn with_time_steps(&self, spec: &ProblemSpec, n_t: usize) -> Result<Self> {
        Self::new(spec, &self.counts, n_t)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn n_nodes(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn stability(&self) -> &Stability {
        &self.stability
    }

    /// `t_k = k dt`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Distance between consecutive nodes along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.counts[axis + 1..].iter().product()
    }

    /// Per-axis position of `node`.
    pub fn multi_index(&self, node: usize, out: &mut [usize]) {
        let mut rest = node;
        for a in (0..self.dim()).rev() {
            out[a] = rest % self.counts[a];
            rest /= self.counts[a];
        }
    }

    pub fn coords(&self, node: usize, out: &mut [f64]) {
        node_coords(&self.counts, &self.lower, &self.upper, &self.spacing, node, out);
    }

    /// Nearest node to `x`, clamped into the box.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let mut node = 0;
        for a in 0..self.dim() {
            let r = libm::round((x[a] - self.lower[a]) / self.spacing[a]);
            let j = if r <= 0.0 {
                0
            } else {
                (r as usize).min(self.counts[a] - 1)
            };
            node = node * self.counts[a] + j;
        }
        node
    }

    /// Multilinear interpolation of a node slice at `x` (clamped into the box).
    pub fn interpolate(&self, slice: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = [0usize; 2];
        let mut frac = [0.0f64; 2];
        for a in 0..d {
            let s = ((x[a] - self.lower[a]) / self.spacing[a]).clamp(0.0, (self.counts[a] - 1) as f64);
            let j = (libm::floor(s) as usize).min(self.counts[a] - 2);
            base[a] = j;
            frac[a] = s - j as f64;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut node = 0;
            for a in 0..d {
                let up = (corner >> (d - 1 - a)) & 1;
                weight *= if up == 1 { frac[a] } else { 1.0 - frac[a] };
                node = node * self.counts[a] + base[a] + up;
            }
            total += weight * slice[node];
        }
        total
    }

    /// Time-slice index containing `t`; the final slice maps to `n_t - 1`.
    pub fn step_at(&self, t: f64) -> usize {
        let k = libm::floor(t / self.dt + 1e-9);
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n_t - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_problem, catalog};

    #[test]
    fn node_layout_axis_zero_slowest() {
        let spec = build_problem(&catalog::zero_cost(2)).unwrap();
        let g = LatticeGrid::new(&spec, &[3, 5], 10).unwrap();
        let mut x = [0.0; 2];
        g.coords(1, &mut x);
        assert_eq!(x, [-2.0, -1.0]);
        g.coords(14, &mut x);
        assert_eq!(x, [2.0, 2.0]);
        assert_eq!(g.stride(0), 5);
        assert_eq!(g.nearest_node(&[0.1, 0.9]), 5 + 3);
    }

    #[test]
    fn stability_bound() {
        // sigma = I, f = 0, d = 2, h = 1: dt_max = 1 / (2 * 2 * 1)
        let spec = build_problem(&catalog::zero_cost(2)).unwrap();
        let g = LatticeGrid::with_stable_steps(&spec, &[5, 5]).unwrap();
        assert_eq!(g.stability().dt_max, 0.25);
        assert_eq!(g.n_t(), 4);
        match LatticeGrid::new(&spec, &[5, 5], 3) {
            Err(Error::Cfl { suggested_steps, .. }) => assert_eq!(suggested_steps, 4),
            other => panic!("expected CFL rejection, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_reproduces_affine() {
        let spec = build_problem(&catalog::zero_cost(2)).unwrap();
        let g = LatticeGrid::new(&spec, &[5, 9], 16).unwrap();
        let mut x = [0.0; 2];
        let slice: Vec<f64> = (0..g.n_nodes())
            .map(|n| {
                g.coords(n, &mut x);
                1.0 + 2.0 * x[0] - 3.0 * x[1]
            })
            .collect();
        let p = [0.3, -1.7];
        assert!((g.interpolate(&slice, &p) - (1.0 + 0.6 + 5.1)).abs() < 1e-12);
    }

    #[test]
    fn step_lookup() {
        let spec = build_problem(&catalog::zero_cost(1)).unwrap();
        let g = LatticeGrid::new(&spec, &[5], 8).unwrap();
        assert_eq!(g.step_at(0.0), 0);
        assert_eq!(g.step_at(0.25), 2);
        assert_eq!(g.step_at(1.0), 7);
    }
}
