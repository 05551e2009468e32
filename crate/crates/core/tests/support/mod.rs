//! Straight-line reference implementation of the hierarchical sweep and a
//! generator of random tiny instances, shared by the integration tests.
#![allow(dead_code)]

use hrc_core::hjb::{LatticeGrid, Stability};
use hrc_core::problem::{BoxConfig, ControlSetConfig, FunctionPreset, Generator};
use hrc_core::rng::{self, StreamRng};
use hrc_core::{build_problem, Player, ProblemConfig, ProblemSpec};

/// Both value fields and both index fields, indexed `[k][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub leader: Vec<Vec<f64>>,
    pub follower: Vec<Vec<f64>>,
    pub v_index: Vec<Vec<usize>>,
    pub w_index: Vec<Vec<usize>>,
}

fn neighbour(grid: &LatticeGrid, j: &[usize], axis: usize, step: isize) -> usize {
    let mut node = 0;
    for a in 0..grid.dim() {
        let ja = if a == axis {
            (j[a] as isize + step) as usize
        } else {
            j[a]
        };
        node = node * grid.counts()[a] + ja;
    }
    node
}

fn diagonal(grid: &LatticeGrid, j: &[usize], s0: isize, s1: isize) -> usize {
    let j0 = (j[0] as isize + s0) as usize;
    let j1 = (j[1] as isize + s1) as usize;
    j0 * grid.counts()[1] + j1
}

/// Player expression `(c + L phi) + g(z)` at one node, from first principles.
#[allow(clippy::too_many_arguments)]
pub fn expression(
    spec: &ProblemSpec,
    player: Player,
    grid: &LatticeGrid,
    slice: &[f64],
    node: usize,
    t: f64,
    v: &[f64],
    w: &[f64],
) -> f64 {
    let d = grid.dim();
    let counts = grid.counts();
    let mut j = vec![0usize; d];
    let mut rest = node;
    for a in (0..d).rev() {
        j[a] = rest % counts[a];
        rest /= counts[a];
    }
    let mut x = vec![0.0; d];
    grid.coords(node, &mut x);
    let mut f = vec![0.0; d];
    let mut sigma = vec![0.0; d * d];
    spec.drift(t, &x, v, w, &mut f);
    spec.diffusion(t, &x, v, w, &mut sigma);

    let c = slice[node];
    let on_face = |a: usize| j[a] == 0 || j[a] == counts[a] - 1;
    let mut grad = vec![0.0; d];
    let mut second = vec![0.0; d * d];
    for i in 0..d {
        let h = grid.spacing()[i];
        if j[i] == 0 {
            grad[i] = (slice[neighbour(grid, &j, i, 1)] - c) / h;
        } else if j[i] == counts[i] - 1 {
            grad[i] = (c - slice[neighbour(grid, &j, i, -1)]) / h;
        } else {
            let p = slice[neighbour(grid, &j, i, 1)];
            let m = slice[neighbour(grid, &j, i, -1)];
            grad[i] = if f[i] > 0.0 {
                (p - c) / h
            } else if f[i] < 0.0 {
                (c - m) / h
            } else {
                (p - m) / (2.0 * h)
            };
            second[i * d + i] = (p - 2.0 * c + m) / (h * h);
        }
    }
    if d == 2 && !on_face(0) && !on_face(1) {
        let cross =
            (slice[diagonal(grid, &j, 1, 1)] - slice[diagonal(grid, &j, 1, -1)] - slice[diagonal(grid, &j, -1, 1)]
                + slice[diagonal(grid, &j, -1, -1)])
                / (4.0 * grid.spacing()[0] * grid.spacing()[1]);
        second[1] = cross;
        second[2] = cross;
    }

    let mut diffusion_term = 0.0;
    for i in 0..d {
        for k in 0..d {
            let mut a_ik = 0.0;
            for l in 0..d {
                a_ik += sigma[i * d + l] * sigma[k * d + l];
            }
            diffusion_term += a_ik * second[i * d + k];
        }
    }
    let mut advection = 0.0;
    for i in 0..d {
        advection += f[i] * grad[i];
    }
    let mut z = vec![0.0; d];
    for (col, zc) in z.iter_mut().enumerate() {
        for i in 0..d {
            *zc += grad[i] * sigma[i * d + col];
        }
    }
    let operator = 0.5 * diffusion_term + advection;
    (spec.running_cost(player, t, &x, v, w) + operator) + spec.generator(player).eval_bounded(t, &z)
}

/// Follower inner loop then leader outer loop, first minimizer on ties.
/// Returns `(h1, h2, v_index, w_index)`.
pub fn two_stage(
    spec: &ProblemSpec,
    grid: &LatticeGrid,
    phi1: &[f64],
    phi2: &[f64],
    node: usize,
    t: f64,
) -> (f64, f64, usize, usize) {
    let vs = spec.controls(Player::Leader);
    let ws = spec.controls(Player::Follower);
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for vi in 0..vs.len() {
        let v = vs.point(vi);
        let mut response: Option<(f64, usize)> = None;
        for wi in 0..ws.len() {
            let e = expression(spec, Player::Follower, grid, phi2, node, t, v, ws.point(wi));
            if response.is_none_or(|(b, _)| e < b) {
                response = Some((e, wi));
            }
        }
        let (h2, wi) = response.unwrap();
        let h1 = expression(spec, Player::Leader, grid, phi1, node, t, v, ws.point(wi));
        if best.is_none_or(|(b, ..)| h1 < b) {
            best = Some((h1, h2, vi, wi));
        }
    }
    best.unwrap()
}

pub fn reference_sweep(spec: &ProblemSpec, grid: &LatticeGrid) -> Reference {
    let n = grid.n_nodes();
    let n_t = grid.n_t();
    let d = grid.dim();
    let mut leader = vec![vec![0.0; n]; n_t + 1];
    let mut follower = vec![vec![0.0; n]; n_t + 1];
    let mut v_index = vec![vec![0; n]; n_t];
    let mut w_index = vec![vec![0; n]; n_t];
    let mut x = vec![0.0; d];
    for node in 0..n {
        grid.coords(node, &mut x);
        leader[n_t][node] = spec.terminal_cost(Player::Leader, &x);
        follower[n_t][node] = spec.terminal_cost(Player::Follower, &x);
    }
    for k in (0..n_t).rev() {
        let t = k as f64 * grid.dt();
        for node in 0..n {
            let (h1, h2, vi, wi) = two_stage(spec, grid, &leader[k + 1], &follower[k + 1], node, t);
            leader[k][node] = leader[k + 1][node] + grid.dt() * h1;
            follower[k][node] = follower[k + 1][node] + grid.dt() * h2;
            v_index[k][node] = vi;
            w_index[k][node] = wi;
        }
    }
    Reference {
        leader,
        follower,
        v_index,
        w_index,
    }
}

fn draw(r: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    rng::uniform(r, lo, hi)
}

fn matrix(r: &mut StreamRng, rows: usize, cols: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| draw(r, -scale, scale)).collect())
        .collect()
}

fn vector(r: &mut StreamRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| draw(r, -scale, scale)).collect()
}

fn generator(r: &mut StreamRng) -> Generator {
    let kappa = draw(r, 0.0, 1.0);
    match rng::index(r, 3) {
        0 => Generator::ZERO,
        1 => Generator::scaled_l1(kappa),
        _ => Generator::scaled_quadratic(kappa),
    }
}

fn controls(r: &mut StreamRng) -> ControlSetConfig {
    let points = 1 + rng::index(r, 3);
    let lo = draw(r, -1.0, 0.0);
    let hi = if points == 1 { lo } else { draw(r, 0.1, 1.0) };
    ControlSetConfig::interval(lo, hi, points)
}

/// A random instance with at most 5 nodes, at most 3 time steps and at
/// most 3 x 3 scalar controls, together with a CFL-admissible grid.
pub fn tiny_instance(seed: u64, index: u64) -> (ProblemSpec, LatticeGrid) {
    let r = &mut rng::stream(seed, index);
    let dim = 1 + rng::index(r, 2);
    let counts = if dim == 1 {
        vec![2 + rng::index(r, 4)]
    } else {
        vec![2, 2]
    };
    let diffusion = if rng::index(r, 2) == 0 {
        let mut m = matrix(r, dim, dim, 0.3);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += 1.0;
        }
        FunctionPreset::ConstantDiffusion { matrix: m }
    } else {
        let mut base = matrix(r, dim, dim, 0.2);
        for (i, row) in base.iter_mut().enumerate() {
            row[i] += 1.0;
        }
        FunctionPreset::AffineDiffusion {
            base,
            state: (0..dim).map(|_| matrix(r, dim, dim, 0.1)).collect(),
            leader: vec![matrix(r, dim, dim, 0.2)],
            follower: vec![matrix(r, dim, dim, 0.2)],
        }
    };
    let cost = |r: &mut StreamRng| FunctionPreset::QuadraticCost {
        constant: draw(r, -0.5, 0.5),
        state_linear: vector(r, dim, 1.0),
        state_quadratic: matrix(r, dim, dim, 1.0),
        control_linear: vector(r, 1, 1.0),
        control_quadratic: vec![vec![draw(r, 0.0, 2.0)]],
    };
    let terminal = |r: &mut StreamRng| FunctionPreset::QuadraticTerminal {
        constant: draw(r, -1.0, 1.0),
        linear: vector(r, dim, 1.0),
        quadratic: matrix(r, dim, dim, 1.0),
    };
    let mut config = ProblemConfig {
        horizon: 1.0,
        dim,
        drift: FunctionPreset::AffineDrift {
            offset: vector(r, dim, 0.5),
            state: matrix(r, dim, dim, 0.5),
            leader: matrix(r, dim, 1, 1.0),
            follower: matrix(r, dim, 1, 1.0),
        },
        diffusion,
        leader_cost: cost(r),
        follower_cost: cost(r),
        leader_terminal: terminal(r),
        follower_terminal: terminal(r),
        leader_generator: generator(r),
        follower_generator: generator(r),
        leader_controls: controls(r),
        follower_controls: controls(r),
        domain_box: BoxConfig {
            lower: vec![-1.0; dim],
            upper: vec![1.0; dim],
        },
        ellipticity_floor: 1e-3,
        initial_state: vec![0.0; dim],
        numerics: None,
    };
    let n_t = 1 + rng::index(r, 3);
    let probe = build_problem(&config).expect("random instance builds");
    let stability = Stability::sample(&probe, &counts).expect("stability sample");
    config.horizon = 0.9 * stability.dt_max * n_t as f64;
    let spec = build_problem(&config).expect("random instance builds");
    let grid = LatticeGrid::new(&spec, &counts, n_t).expect("grid within the CFL bound");
    (spec, grid)
}
