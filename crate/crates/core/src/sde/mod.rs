//! Euler–Maruyama simulation of the controlled state under Markov feedback
//! policies, and pathwise accumulated costs.
//!
//! Path `p` draws its Brownian increments from ChaCha stream `(seed, p)`, so a
//! bundle depends only on `(spec, policies, n_paths, dt, seed)` and never on
//! the worker count. Arrays are stored step-major: entry `(p, k)` of a
//! per-step quantity lives at `k * n_paths + p`.

mod policy;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use policy::{FeedbackPolicy, TabulatedPolicy};

use crate::error::{Error, Result};
use crate::par;
use crate::problem::{build_problem, catalog, Player, ProblemSpec};
use crate::rng;

/// Controls applied along a bundle: a palette of points plus per-(path, step)
/// palette indices. Constant policies store no indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrack {
    dim: usize,
    palette: Vec<f64>,
    indices: Option<Vec<u32>>,
}

impl ControlTrack {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn palette(&self) -> &[f64] {
        &self.palette
    }

    #[inline]
    fn index(&self, n_paths: usize, p: usize, k: usize) -> usize {
        match &self.indices {
            Some(ix) => ix[k * n_paths + p] as usize,
            None => 0,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.palette[i * self.dim..(i + 1) * self.dim]
    }

    fn select_steps(&self, n_paths: usize, steps: impl Iterator<Item = usize>) -> Self {
        let indices = self.indices.as_ref().map(|ix| {
            steps
                .flat_map(|k| ix[k * n_paths..(k + 1) * n_paths].iter().copied())
                .collect()
        });
        Self {
            dim: self.dim,
            palette: self.palette.clone(),
            indices,
        }
    }
}

/// Simulated paths of the state, the driving increments and the controls used.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    n_paths: usize,
    n_steps: usize,
    dim: usize,
    dt: f64,
    t0: f64,
    seed: u64,
    states: Vec<f64>,
    increments: Vec<f64>,
    leader: ControlTrack,
    follower: ControlTrack,
}

impl PathBundle {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        self.t0 + self.n_steps as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// `X` of path `p` at step `k`.
    #[inline]
    pub fn state(&self, p: usize, k: usize) -> &[f64] {
        let i = (k * self.n_paths + p) * self.dim;
        &self.states[i..i + self.dim]
    }

    /// All paths at step `k`, `[n_paths x dim]`.
    pub fn states_at(&self, k: usize) -> &[f64] {
        let w = self.n_paths * self.dim;
        &self.states[k * w..(k + 1) * w]
    }

    /// `B_{t_{k+1}} - B_{t_k}` of path `p`.
    #[inline]
    pub fn increment(&self, p: usize, k: usize) -> &[f64] {
        let i = (k * self.n_paths + p) * self.dim;
        &self.increments[i..i + self.dim]
    }

    pub fn increments_at(&self, k: usize) -> &[f64] {
        let w = self.n_paths * self.dim;
        &self.increments[k * w..(k + 1) * w]
    }

    pub fn leader_track(&self) -> &ControlTrack {
        &self.leader
    }

    pub fn follower_track(&self) -> &ControlTrack {
        &self.follower
    }

    /// Leader control applied on path `p` over step `k`.
    #[inline]
    pub fn leader_control(&self, p: usize, k: usize) -> &[f64] {
        self.leader.point(self.leader.index(self.n_paths, p, k))
    }

    #[inline]
    pub fn follower_control(&self, p: usize, k: usize) -> &[f64] {
        self.follower.point(self.follower.index(self.n_paths, p, k))
    }

    /// First `r` steps.
    pub fn truncate(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.n_steps {
            return Err(Error::Precondition(format!(
                "cannot truncate {} steps to {r}",
                self.n_steps
            )));
        }
        let w = self.n_paths * self.dim;
        Ok(Self {
            n_steps: r,
            states: self.states[..(r + 1) * w].to_vec(),
            increments: self.increments[..r * w].to_vec(),
            leader: self.leader.select_steps(self.n_paths, 0..r),
            follower: self.follower.select_steps(self.n_paths, 0..r),
            ..self.clone_header()
        })
    }

    /// Every `factor`-th time point of the same paths; increments are summed.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_steps.is_multiple_of(factor) {
            return Err(Error::Precondition(format!(
                "coarsening factor {factor} does not divide {} steps",
                self.n_steps
            )));
        }
        let n_steps = self.n_steps / factor;
        let w = self.n_paths * self.dim;
        let mut states = Vec::with_capacity((n_steps + 1) * w);
        for k in 0..=n_steps {
            states.extend_from_slice(self.states_at(k * factor));
        }
        let mut increments = vec![0.0; n_steps * w];
        for k in 0..n_steps {
            let out = &mut increments[k * w..(k + 1) * w];
            for s in 0..factor {
                for (o, db) in out.iter_mut().zip(self.increments_at(k * factor + s)) {
                    *o += db;
                }
            }
        }
        Ok(Self {
            n_steps,
            dt: self.dt * factor as f64,
            states,
            increments,
            leader: self.leader.select_steps(self.n_paths, (0..n_steps).map(|k| k * factor)),
            follower: self
                .follower
                .select_steps(self.n_paths, (0..n_steps).map(|k| k * factor)),
            ..self.clone_header()
        })
    }

    /// Path `p` of the result is path `perm[p]` of `self`.
    pub fn permute_paths(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_paths;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&q| q >= n || core::mem::replace(&mut seen[q], true)) {
            return Err(Error::Precondition("not a permutation of the path indices".into()));
        }
        let d = self.dim;
        let gather = |src: &[f64], steps: usize| {
            let mut out = Vec::with_capacity(src.len());
            for k in 0..steps {
                for &q in perm {
                    let i = (k * n + q) * d;
                    out.extend_from_slice(&src[i..i + d]);
                }
            }
            out
        };
        let track = |t: &ControlTrack| ControlTrack {
            dim: t.dim,
            palette: t.palette.clone(),
            indices: t.indices.as_ref().map(|ix| {
                (0..self.n_steps)
                    .flat_map(|k| perm.iter().map(move |&q| ix[k * n + q]))
                    .collect()
            }),
        };
        Ok(Self {
            states: gather(&self.states, self.n_steps + 1),
            increments: gather(&self.increments, self.n_steps),
            leader: track(&self.leader),
            follower: track(&self.follower),
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> Self {
        Self {
            n_paths: self.n_paths,
            n_steps: self.n_steps,
            dim: self.dim,
            dt: self.dt,
            t0: self.t0,
            seed: self.seed,
            states: Vec::new(),
            increments: Vec::new(),
            leader: self.leader.clone(),
            follower: self.follower.clone(),
        }
    }

    fn check_spec(&self, spec: &ProblemSpec) -> Result<()> {
        if self.dim != spec.dim() {
            return Err(Error::DimensionMismatch {
                what: "bundle state dimension",
                expected: spec.dim(),
                got: self.dim,
            });
        }
        for (track, player) in [(&self.leader, Player::Leader), (&self.follower, Player::Follower)] {
            if track.dim != spec.controls(player).dim() {
                return Err(Error::DimensionMismatch {
                    what: "bundle control dimension",
                    expected: spec.controls(player).dim(),
                    got: track.dim,
                });
            }
        }
        Ok(())
    }
}

/// Number of steps of size `dt` in `horizon`; `dt` must divide it to one part in 1e9.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::TimeStep {
            dt,
            reason: "time step must be positive",
        });
    }
    let n = libm::round(horizon / dt);
    if n < 1.0 || (n * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::TimeStep {
            dt,
            reason: "time step does not divide the horizon",
        });
    }
    Ok(n as usize)
}

/// Euler–Maruyama paths
/// `X_{k+1} = X_k + f(t_k, X_k, u_k) dt + sigma(t_k, X_k, u_k) dB_k`
/// with `u_k` read from the policies at `(t_k, X_k)`.
pub fn simulate(
    spec: &ProblemSpec,
    leader: &FeedbackPolicy,
    follower: &FeedbackPolicy,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<PathBundle> {
    leader.check_against(spec.controls(Player::Leader), "leader")?;
    follower.check_against(spec.controls(Player::Follower), "follower")?;
    let n_steps = step_count(spec.horizon(), dt)?;
    if n_paths == 0 {
        return Err(Error::Precondition("at least one path is required".into()));
    }
    let d = spec.dim();
    let n = n_paths;
    let w = n * d;
    let (mv, mw) = (leader.dim(), follower.dim());
    let lpal = leader.palette();
    let fpal = follower.palette();

    let mut states = vec![0.0; (n_steps + 1) * w];
    for p in 0..n {
        states[p * d..(p + 1) * d].copy_from_slice(spec.initial_state());
    }
    let mut increments = vec![0.0; n_steps * w];
    let mut lidx = (!leader.is_constant()).then(|| vec![0u32; n_steps * n]);
    let mut fidx = (!follower.is_constant()).then(|| vec![0u32; n_steps * n]);
    let mut rngs: Vec<rng::StreamRng> = (0..n).map(|p| rng::stream(seed, p as u64)).collect();
    let sqdt = libm::sqrt(dt);

    for k in 0..n_steps {
        let t = k as f64 * dt;
        let (head, tail) = states.split_at_mut((k + 1) * w);
        let cur = &head[k * w..];
        let next = &mut tail[..w];
        let inc = &mut increments[k * w..(k + 1) * w];
        let mut lk = lidx.as_mut().map(|v| v[k * n..(k + 1) * n].chunks_mut(par::BLOCK));
        let mut fk = fidx.as_mut().map(|v| v[k * n..(k + 1) * n].chunks_mut(par::BLOCK));

        let items: Vec<_> = rngs
            .chunks_mut(par::BLOCK)
            .zip(next.chunks_mut(par::BLOCK * d))
            .zip(inc.chunks_mut(par::BLOCK * d))
            .enumerate()
            .map(|(b, ((r, x1), db))| {
                let l = lk.as_mut().and_then(|it| it.next());
                let f = fk.as_mut().and_then(|it| it.next());
                (b * par::BLOCK, r, x1, db, l, f)
            })
            .collect();

        par::for_each(items, |(p0, r, x1, db, mut l, mut f)| {
            let mut drift = [0.0; 2];
            let mut sigma = [0.0; 4];
            let mut dbp = [0.0; 2];
            for (j, rng) in r.iter_mut().enumerate() {
                let p = p0 + j;
                let x = &cur[p * d..(p + 1) * d];
                let vi = leader.index_at(t, x);
                let wi = follower.index_at(t, x);
                if let Some(l) = l.as_deref_mut() {
                    l[j] = vi;
                }
                if let Some(f) = f.as_deref_mut() {
                    f[j] = wi;
                }
                let v = &lpal[vi as usize * mv..(vi as usize + 1) * mv];
                let u = &fpal[wi as usize * mw..(wi as usize + 1) * mw];
                spec.drift(t, x, v, u, &mut drift[..d]);
                spec.diffusion(t, x, v, u, &mut sigma[..d * d]);
                for e in dbp[..d].iter_mut() {
                    *e = sqdt * rng::normal(rng);
                }
                for i in 0..d {
                    let mut s = x[i] + drift[i] * dt;
                    for jj in 0..d {
                        s += sigma[i * d + jj] * dbp[jj];
                    }
                    x1[j * d + i] = s;
                }
                db[j * d..(j + 1) * d].copy_from_slice(&dbp[..d]);
            }
        });
    }

    Ok(PathBundle {
        n_paths: n,
        n_steps,
        dim: d,
        dt,
        t0: 0.0,
        seed,
        states,
        increments,
        leader: ControlTrack {
            dim: mv,
            palette: lpal,
            indices: lidx,
        },
        follower: ControlTrack {
            dim: mw,
            palette: fpal,
            indices: fidx,
        },
    })
}

/// Paths of a standard Brownian motion started at the origin (`X = B`).
pub fn brownian_only(dim: usize, horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<PathBundle> {
    let mut cfg = catalog::zero_cost(dim);
    cfg.horizon = horizon;
    let spec = build_problem(&cfg)?;
    let zero = FeedbackPolicy::constant(&vec![0.0; dim]);
    simulate(&spec, &zero, &zero, n_paths, dt, seed)
}

/// Running cost `c_i(t_k, X_k, u_k)` per (path, step), step-major.
pub fn running_costs(bundle: &PathBundle, spec: &ProblemSpec, player: Player) -> Result<Vec<f64>> {
    bundle.check_spec(spec)?;
    let n = bundle.n_paths;
    let rows = par::map_range(bundle.n_steps, |k| {
        let t = bundle.time(k);
        (0..n)
            .map(|p| {
                spec.running_cost(
                    player,
                    t,
                    bundle.state(p, k),
                    bundle.leader_control(p, k),
                    bundle.follower_control(p, k),
                )
            })
            .collect::<Vec<f64>>()
    });
    Ok(rows.concat())
}

/// Terminal cost `Psi_i(X_T)` per path.
pub fn terminal_costs(bundle: &PathBundle, spec: &ProblemSpec, player: Player) -> Result<Vec<f64>> {
    bundle.check_spec(spec)?;
    let last = bundle.n_steps;
    Ok(par::map_range(bundle.n_paths, |p| {
        spec.terminal_cost(player, bundle.state(p, last))
    }))
}

/// `sum_k c_i(t_k, X_k, u_k) dt + Psi_i(X_T)` per path.
pub fn accumulate_cost(bundle: &PathBundle, spec: &ProblemSpec, player: Player) -> Result<Vec<f64>> {
    bundle.check_spec(spec)?;
    let dt = bundle.dt;
    Ok(par::map_range(bundle.n_paths, |p| {
        let mut s = 0.0;
        for k in 0..bundle.n_steps {
            s += spec.running_cost(
                player,
                bundle.time(k),
                bundle.state(p, k),
                bundle.leader_control(p, k),
                bundle.follower_control(p, k),
            ) * dt;
        }
        s + spec.terminal_cost(player, bundle.state(p, bundle.n_steps))
    }))
}
