//! Sampled falsification checks for the standing assumptions: generator
//! Lipschitz bound and `g(t, 0) = 0`, uniform ellipticity of `sigma sigma^T`,
//! finite Lipschitz constants of the coefficients in `x`, and the polynomial
//! growth bound with `p = 2`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Generator, Player, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::{dist1, min_eigenvalue_sym, norm2, outer_square};
use crate::{par, rng};

/// Half-width of the z-box generators are sampled on.
pub const Z_RADIUS: f64 = 10.0;
const GROWTH_EXPONENT: i32 = 2;
const LATTICE_CONTROL_PAIRS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    /// Sampled quantity (Lipschitz ratio, `max |g(t,0)|`, least eigenvalue, growth constant).
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub samples: usize,
    pub lattice_points: usize,
    pub seed: u64,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone)]
struct Sample {
    t: f64,
    x: Vec<f64>,
    x_alt: Vec<f64>,
    v: usize,
    w: usize,
    z: Vec<f64>,
    z_alt: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    lip_g: [f64; 2],
    g_origin: [f64; 2],
    min_eig: f64,
    growth: [f64; 2],
    coef_lip: f64,
}

/// Samples `(t, x, v, w, z)` on a deterministic lattice plus `samples`
/// uniform draws and reports every check. Never fails on a violated
/// assumption; only `samples == 0` is an error.
pub fn validate_assumptions(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<AssumptionReport> {
    if samples == 0 {
        return Err(Error::Precondition("validate_assumptions needs samples >= 1".into()));
    }
    let mut pool = lattice(spec);
    let lattice_points = pool.len();
    let drawn = par::map_range(samples, |i| random_sample(spec, seed, i as u64));
    pool.extend(drawn);

    let evals = par::map_range(pool.len(), |i| evaluate(spec, &pool[i]));

    let mut checks = Vec::new();
    for (slot, player) in Player::BOTH.iter().enumerate() {
        let gen = spec.generator(*player);
        let (lip, at) = arg_max(evals.iter().map(|e| e.lip_g[slot]));
        let lipschitz_ok = if gen.is_globally_lipschitz() {
            lip <= gen.kappa * (1.0 + 1e-9) + 1e-12
        } else {
            false
        };
        checks.push(AssumptionCheck {
            name: alloc::format!("{}_generator_lipschitz", player.as_str()),
            passed: lipschitz_ok,
            estimate: lip,
            threshold: gen.is_globally_lipschitz().then_some(gen.kappa),
            witness: (!lipschitz_ok).then(|| witness(spec, &pool[at], true)),
            note: if gen.is_globally_lipschitz() {
                String::new()
            } else {
                String::from("scaled-quadratic is not globally Lipschitz; admitted on bounded z-domains only")
            },
        });

        let (g0, at) = arg_max(evals.iter().map(|e| e.g_origin[slot]));
        checks.push(AssumptionCheck {
            name: alloc::format!("{}_generator_zero_at_origin", player.as_str()),
            passed: g0 == 0.0,
            estimate: g0,
            threshold: Some(0.0),
            witness: (g0 != 0.0).then(|| witness(spec, &pool[at], false)),
            note: String::new(),
        });
    }

    let (neg_eig, at) = arg_max(evals.iter().map(|e| -e.min_eig));
    let min_eig = -neg_eig;
    let elliptic = min_eig >= spec.ellipticity_floor();
    checks.push(AssumptionCheck {
        name: String::from("ellipticity"),
        passed: elliptic,
        estimate: min_eig,
        threshold: Some(spec.ellipticity_floor()),
        witness: (!elliptic).then(|| witness(spec, &pool[at], false)),
        note: String::new(),
    });

    let (lip, at) = arg_max(evals.iter().map(|e| e.coef_lip));
    checks.push(AssumptionCheck {
        name: String::from("coefficient_lipschitz"),
        passed: lip.is_finite(),
        estimate: lip,
        threshold: None,
        witness: (!lip.is_finite()).then(|| witness(spec, &pool[at], false)),
        note: String::new(),
    });

    for (slot, player) in Player::BOTH.iter().enumerate() {
        let (k, at) = arg_max(evals.iter().map(|e| e.growth[slot]));
        checks.push(AssumptionCheck {
            name: alloc::format!("{}_growth", player.as_str()),
            passed: k.is_finite(),
            estimate: k,
            threshold: None,
            witness: (!k.is_finite()).then(|| witness(spec, &pool[at], false)),
            note: String::from("sampled growth constant K with p = 2"),
        });
    }

    Ok(AssumptionReport {
        samples,
        lattice_points,
        seed,
        checks,
    })
}

/// Largest value and its first index. NaN counts as +infinity.
fn arg_max(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut at = 0;
    for (i, v) in values.enumerate() {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > best {
            best = v;
            at = i;
        }
    }
    (best, at)
}

fn witness(spec: &ProblemSpec, s: &Sample, with_z: bool) -> Witness {
    Witness {
        t: s.t,
        x: s.x.clone(),
        v: spec.controls(Player::Leader).point(s.v).to_vec(),
        w: spec.controls(Player::Follower).point(s.w).to_vec(),
        z: if with_z { s.z.clone() } else { Vec::new() },
    }
}

fn lattice(spec: &ProblemSpec) -> Vec<Sample> {
    let d = spec.dim();
    let b = spec.domain_box();
    let mut xs: Vec<Vec<f64>> = Vec::new();
    for corner in 0..(1usize << d) {
        xs.push(
            (0..d)
                .map(|i| {
                    if corner >> i & 1 == 0 {
                        b.lower()[i]
                    } else {
                        b.upper()[i]
                    }
                })
                .collect(),
        );
    }
    xs.push((0..d).map(|i| 0.5 * (b.lower()[i] + b.upper()[i])).collect());

    let nv = spec.controls(Player::Leader).len();
    let nw = spec.controls(Player::Follower).len();
    let pairs = nv * nw;
    let stride = pairs.div_ceil(LATTICE_CONTROL_PAIRS).max(1);

    let ts = [0.0, 0.5 * spec.horizon(), spec.horizon()];
    let mut out = Vec::new();
    let mut zi = 0usize;
    for &t in &ts {
        for (xi, x) in xs.iter().enumerate() {
            let x_alt = xs[(xi + 1) % xs.len()].clone();
            for pair in (0..pairs).step_by(stride) {
                // z cycles through a coarse lattice on the z-box, including the origin
                let z: Vec<f64> = (0..d)
                    .map(|k| {
                        let level = (zi / 5usize.pow(k as u32)) % 5;
                        Z_RADIUS * (level as f64 - 2.0) / 2.0
                    })
                    .collect();
                let z_alt: Vec<f64> = z.iter().map(|v| -0.5 * v + 1.0).collect();
                zi += 1;
                out.push(Sample {
                    t,
                    x: x.clone(),
                    x_alt: x_alt.clone(),
                    v: pair / nw,
                    w: pair % nw,
                    z,
                    z_alt,
                });
            }
        }
    }
    out
}

fn random_sample(spec: &ProblemSpec, seed: u64, index: u64) -> Sample {
    let mut r = rng::stream(seed, index);
    let d = spec.dim();
    let b = spec.domain_box();
    let t = rng::uniform(&mut r, 0.0, spec.horizon());
    let x = (0..d)
        .map(|i| rng::uniform(&mut r, b.lower()[i], b.upper()[i]))
        .collect();
    let x_alt = (0..d)
        .map(|i| rng::uniform(&mut r, b.lower()[i], b.upper()[i]))
        .collect();
    let v = rng::index(&mut r, spec.controls(Player::Leader).len());
    let w = rng::index(&mut r, spec.controls(Player::Follower).len());
    let z = (0..d).map(|_| rng::uniform(&mut r, -Z_RADIUS, Z_RADIUS)).collect();
    let z_alt = (0..d).map(|_| rng::uniform(&mut r, -Z_RADIUS, Z_RADIUS)).collect();
    Sample {
        t,
        x,
        x_alt,
        v,
        w,
        z,
        z_alt,
    }
}

fn generator_ratio(g: &Generator, t: f64, z: &[f64], z_alt: &[f64]) -> f64 {
    let dz = dist1(z, z_alt);
    if dz == 0.0 {
        return 0.0;
    }
    (g.eval(t, z) - g.eval(t, z_alt)).abs() / dz
}

fn evaluate(spec: &ProblemSpec, s: &Sample) -> Eval {
    let d = spec.dim();
    let v = spec.controls(Player::Leader).point(s.v);
    let w = spec.controls(Player::Follower).point(s.w);
    let zero = [0.0; 2];

    let mut f = [0.0; 2];
    let mut f_alt = [0.0; 2];
    let mut sig = [0.0; 4];
    let mut sig_alt = [0.0; 4];
    let mut a = [0.0; 4];
    spec.drift(s.t, &s.x, v, w, &mut f);
    spec.diffusion(s.t, &s.x, v, w, &mut sig);
    spec.drift(s.t, &s.x_alt, v, w, &mut f_alt);
    spec.diffusion(s.t, &s.x_alt, v, w, &mut sig_alt);
    outer_square(&sig, d, &mut a);

    let dd = d * d;
    let f_norm = norm2(&f[..d]);
    let sig_norm = norm2(&sig[..dd]);
    let base = 1.0 + libm::pow(norm2(&s.x), GROWTH_EXPONENT as f64) + norm2(v) + norm2(w);
    let growth = Player::BOTH.map(|p| {
        let c = spec.running_cost(p, s.t, &s.x, v, w).abs();
        let psi = spec.terminal_cost(p, &s.x).abs();
        (f_norm + sig_norm + c + psi) / base
    });

    let dx = dist1(&s.x, &s.x_alt);
    let coef_lip = if dx == 0.0 {
        0.0
    } else {
        let df = dist1(&f[..d], &f_alt[..d]);
        let ds = dist1(&sig[..dd], &sig_alt[..dd]);
        let mut worst = df.max(ds);
        for p in Player::BOTH {
            let dc = (spec.running_cost(p, s.t, &s.x, v, w) - spec.running_cost(p, s.t, &s.x_alt, v, w)).abs();
            let dpsi = (spec.terminal_cost(p, &s.x) - spec.terminal_cost(p, &s.x_alt)).abs();
            worst = worst.max(dc).max(dpsi);
        }
        worst / dx
    };

    let gens = Player::BOTH.map(|p| *spec.generator(p));
    Eval {
        lip_g: gens.map(|g| generator_ratio(&g, s.t, &s.z, &s.z_alt)),
        g_origin: gens.map(|g| g.eval(s.t, &zero[..d]).abs()),
        min_eig: min_eigenvalue_sym(&a[..dd], d),
        growth,
        coef_lip: if coef_lip.is_finite() { coef_lip } else { f64::INFINITY },
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_problem, catalog, FunctionPreset, Generator};
    use super::*;

    #[test]
    fn zero_generator_vanishes() {
        let spec = build_problem(&catalog::zero_cost(1)).unwrap();
        let r = validate_assumptions(&spec, 200, 1).unwrap();
        let c = r.check("leader_generator_zero_at_origin").unwrap();
        assert!(c.passed);
        assert_eq!(c.estimate, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn l1_lipschitz_estimate() {
        let mut cfg = catalog::zero_cost(2);
        cfg.leader_generator = Generator::scaled_l1(0.5);
        let spec = build_problem(&cfg).unwrap();
        let r = validate_assumptions(&spec, 500, 3).unwrap();
        let c = r.check("leader_generator_lipschitz").unwrap();
        assert!(c.passed);
        assert!(c.estimate <= 0.5 + 1e-9, "{}", c.estimate);
        assert!(c.estimate > 0.1);
    }

    #[test]
    fn quadratic_generator_flagged() {
        let mut cfg = catalog::zero_cost(1);
        cfg.follower_generator = Generator::scaled_quadratic(1.0);
        let spec = build_problem(&cfg).unwrap();
        let r = validate_assumptions(&spec, 100, 3).unwrap();
        let c = r.check("follower_generator_lipschitz").unwrap();
        assert!(!c.passed);
        assert!(c.witness.is_some());
        assert!(!r.passed());
    }

    #[test]
    fn identity_passes_half_floor() {
        let mut cfg = catalog::zero_cost(2);
        cfg.ellipticity_floor = 0.5;
        let spec = build_problem(&cfg).unwrap();
        let r = validate_assumptions(&spec, 50, 0).unwrap();
        let c = r.check("ellipticity").unwrap();
        assert!(c.passed);
        assert_eq!(c.estimate, 1.0);
    }

    #[test]
    fn ellipticity_failure_has_witness() {
        let mut cfg = catalog::zero_cost(2);
        cfg.ellipticity_floor = 2.0;
        let spec = build_problem(&cfg).unwrap();
        let r = validate_assumptions(&spec, 50, 0).unwrap();
        let c = r.check("ellipticity").unwrap();
        assert!(!c.passed);
        assert_eq!(c.estimate, 1.0);
        assert!(c.witness.is_some());
        for f in r.failures() {
            assert!(f.witness.is_some(), "{} failed without witness", f.name);
        }
    }

    #[test]
    fn growth_constant_finite_for_lq() {
        let spec = build_problem(&catalog::lq_decoupled(0.2)).unwrap();
        let r = validate_assumptions(&spec, 300, 9).unwrap();
        for name in ["leader_growth", "follower_growth", "coefficient_lipschitz"] {
            let c = r.check(name).unwrap();
            assert!(c.passed && c.estimate.is_finite() && c.estimate > 0.0, "{name}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = build_problem(&catalog::lq_decoupled(0.2)).unwrap();
        assert_eq!(
            validate_assumptions(&spec, 100, 5).unwrap(),
            validate_assumptions(&spec, 100, 5).unwrap()
        );
    }

    #[test]
    fn zero_samples_rejected() {
        let spec = build_problem(&catalog::zero_cost(1)).unwrap();
        assert!(validate_assumptions(&spec, 0, 5).is_err());
    }

    #[test]
    fn degenerate_diffusion_reported_not_thrown() {
        let mut cfg = catalog::zero_cost(1);
        cfg.diffusion = FunctionPreset::scaled_identity_diffusion(1, 0.0);
        let spec = build_problem(&cfg).unwrap();
        let r = validate_assumptions(&spec, 10, 0).unwrap();
        assert!(!r.check("ellipticity").unwrap().passed);
    }
}
