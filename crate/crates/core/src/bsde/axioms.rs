//! Seeded trials of the risk-measure axioms (normalization, monotonicity,
//! translation invariance, convexity, positive homogeneity) and the
//! comparison theorem on Brownian bundles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{comparison_check, ordering_tolerance, risk_measure_with_error, RegressionBasis};
use crate::error::Result;
use crate::problem::{Generator, GeneratorKind};
use crate::rng;
use crate::sde::{brownian_only, PathBundle};

/// Absolute tolerance of the translation check.
pub const TRANSLATION_TOL: f64 = 1e-6;
/// Relative tolerance of the homogeneity check.
pub const HOMOGENEITY_RTOL: f64 = 1e-3;
pub const CONVEXITY_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.75];
pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 10.0];

/// Offset separating coefficient streams from path streams.
const COEFF_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomSettings {
    pub trials: usize,
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub dim: usize,
    pub seed: u64,
    pub basis: RegressionBasis,
}

impl Default for AxiomSettings {
    fn default() -> Self {
        Self {
            trials: 100,
            n_paths: 4096,
            n_steps: 32,
            horizon: 1.0,
            dim: 1,
            seed: 42,
            basis: RegressionBasis::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Normalization,
    Monotonicity,
    TranslationInvariance,
    Convexity,
    PositiveHomogeneity,
    Comparison,
}

impl Axiom {
    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::Normalization => "normalization",
            Axiom::Monotonicity => "monotonicity",
            Axiom::TranslationInvariance => "translation-invariance",
            Axiom::Convexity => "convexity",
            Axiom::PositiveHomogeneity => "positive-homogeneity",
            Axiom::Comparison => "comparison",
        }
    }
}

/// Whether the generator is expected to satisfy the axiom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Holds,
    Fails,
    NotApplicable,
}

/// A trial on which the axiom inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomWitness {
    pub trial: usize,
    pub path_seed: u64,
    pub parameter: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub payoff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomOutcome {
    pub axiom: Axiom,
    pub expectation: Expectation,
    pub checks: usize,
    pub violations: usize,
    /// Smallest `tolerance - |violation|` seen; negative on violation.
    pub worst_slack: f64,
    pub witness: Option<AxiomWitness>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub generator: Generator,
    pub settings: AxiomSettings,
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn outcome(&self, axiom: Axiom) -> Option<&AxiomOutcome> {
        self.outcomes.iter().find(|o| o.axiom == axiom)
    }
}

/// Random payoff `a + b.x + c.x^2 + e |x_1 - m|` of the terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoff {
    a: f64,
    b: Vec<f64>,
    c: Vec<f64>,
    e: f64,
    m: f64,
}

impl Payoff {
    pub fn sample(r: &mut rng::StreamRng, dim: usize) -> Self {
        Self {
            a: rng::uniform(r, -1.0, 1.0),
            b: (0..dim).map(|_| rng::uniform(r, -1.0, 1.0)).collect(),
            c: (0..dim).map(|_| rng::uniform(r, -0.5, 0.5)).collect(),
            e: rng::uniform(r, 0.0, 1.0),
            m: rng::uniform(r, -0.5, 0.5),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = self.a;
        for i in 0..x.len() {
            s += self.b[i] * x[i] + self.c[i] * x[i] * x[i];
        }
        s + self.e * (x[0] - self.m).abs()
    }
}

impl fmt::Display for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6} + {:?}.x + {:?}.x^2 + {:.6}|x_1 - {:.6}|",
            self.a, self.b, self.c, self.e, self.m
        )
    }
}

impl fmt::Display for Lift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6}(x_1 - {:.6})^2 + {:.6}max(x_1 - {:.6}, 0)",
            self.p, self.q, self.r, self.s
        )
    }
}

/// Nonnegative lift `p (x_1 - q)^2 + r max(x_1 - s, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    p: f64,
    q: f64,
    r: f64,
    s: f64,
}

impl Lift {
    pub fn sample(g: &mut rng::StreamRng) -> Self {
        Self {
            p: rng::uniform(g, 0.0, 1.0),
            q: rng::uniform(g, -1.0, 1.0),
            r: rng::uniform(g, 0.0, 1.0),
            s: rng::uniform(g, -1.0, 1.0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let u = x[0] - self.q;
        self.p * u * u + self.r * (x[0] - self.s).max(0.0)
    }
}

/// `f(X_T)` on every path.
pub fn terminal_values(bundle: &PathBundle, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let k = bundle.n_steps();
    (0..bundle.n_paths()).map(|p| f(bundle.state(p, k))).collect()
}

struct Tally {
    axiom: Axiom,
    expectation: Expectation,
    checks: usize,
    violations: usize,
    worst_slack: f64,
    witness: Option<AxiomWitness>,
}

impl Tally {
    fn new(axiom: Axiom, expectation: Expectation) -> Self {
        Self {
            axiom,
            expectation,
            checks: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
            witness: None,
        }
    }

    /// Records `lhs <= rhs + tolerance`.
    fn record(&mut self, slack: f64, witness: impl FnOnce() -> AxiomWitness) {
        self.checks += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if !(slack >= 0.0) {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> AxiomOutcome {
        let passed = match self.expectation {
            Expectation::Holds => self.violations == 0,
            Expectation::Fails => self.violations > 0,
            Expectation::NotApplicable => true,
        };
        AxiomOutcome {
            axiom: self.axiom,
            expectation: self.expectation,
            checks: self.checks,
            violations: self.violations,
            worst_slack: self.worst_slack,
            witness: self.witness,
            passed,
        }
    }
}

/// Same family as `gen` with `kappa` scaled by `u` in `[0, 1]`.
fn weaker(gen: &Generator, u: f64) -> Generator {
    match gen.preset {
        GeneratorKind::Zero => Generator::ZERO,
        GeneratorKind::ScaledL1 => Generator::scaled_l1(gen.kappa * u),
        GeneratorKind::ScaledQuadratic => Generator::scaled_quadratic(gen.kappa * u),
    }
}

/// Runs every axiom over `settings.trials` seeded trials.
pub fn run_axiom_suite(gen: &Generator, settings: &AxiomSettings) -> Result<AxiomReport> {
    let basis = settings.basis;
    let dt = settings.horizon / settings.n_steps as f64;
    let convex = if gen.is_convex() {
        Expectation::Holds
    } else {
        Expectation::NotApplicable
    };
    let homogeneous = if gen.is_positively_homogeneous() {
        Expectation::Holds
    } else {
        Expectation::Fails
    };
    let mut p1 = Tally::new(Axiom::Normalization, Expectation::Holds);
    let mut p2 = Tally::new(Axiom::Monotonicity, Expectation::Holds);
    let mut p3 = Tally::new(Axiom::TranslationInvariance, Expectation::Holds);
    let mut p4 = Tally::new(Axiom::Convexity, convex);
    let mut p5 = Tally::new(Axiom::PositiveHomogeneity, homogeneous);
    let mut cmp = Tally::new(Axiom::Comparison, Expectation::Holds);

    for trial in 0..settings.trials {
        let path_seed = settings.seed.wrapping_add(trial as u64);
        let bundle = brownian_only(settings.dim, settings.horizon, dt, settings.n_paths, path_seed)?;
        let mut r = rng::stream(settings.seed, COEFF_STREAM + trial as u64);
        let base = Payoff::sample(&mut r, settings.dim);
        let lift = Lift::sample(&mut r);
        let nu = rng::uniform(&mut r, -5.0, 5.0);
        let u = rng::unit(&mut r);
        let xi2 = terminal_values(&bundle, |x| base.eval(x));
        let xi1 = terminal_values(&bundle, |x| base.eval(x) + lift.eval(x));
        let label = || format!("xi2 = {base}, xi1 = xi2 + {lift}");
        let witness = |parameter: Option<f64>, lhs: f64, rhs: f64, tolerance: f64| AxiomWitness {
            trial,
            path_seed,
            parameter,
            lhs,
            rhs,
            tolerance,
            payoff: label(),
        };

        let zero = alloc::vec![0.0; settings.n_paths];
        let (y_zero, _) = risk_measure_with_error(&bundle, gen, &zero, basis)?;
        p1.record(0.0 - y_zero.abs(), || witness(None, y_zero, 0.0, 0.0));

        let (y1, e1) = risk_measure_with_error(&bundle, gen, &xi1, basis)?;
        let (y2, e2) = risk_measure_with_error(&bundle, gen, &xi2, basis)?;
        let tol = ordering_tolerance(e1 + e2);
        p2.record(y1 - y2 + tol, || witness(None, y2, y1, tol));

        let shifted: Vec<f64> = xi2.iter().map(|v| v + nu).collect();
        let (ys, _) = risk_measure_with_error(&bundle, gen, &shifted, basis)?;
        let gap = (ys - y2 - nu).abs();
        p3.record(TRANSLATION_TOL - gap, || {
            witness(Some(nu), ys, y2 + nu, TRANSLATION_TOL)
        });

        if convex == Expectation::Holds {
            for lambda in CONVEXITY_WEIGHTS {
                let mix: Vec<f64> = xi1
                    .iter()
                    .zip(&xi2)
                    .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                    .collect();
                let (ym, em) = risk_measure_with_error(&bundle, gen, &mix, basis)?;
                let rhs = lambda * y1 + (1.0 - lambda) * y2;
                let tol = ordering_tolerance(em + e1 + e2);
                p4.record(rhs + tol - ym, || witness(Some(lambda), ym, rhs, tol));
            }
        }

        for lambda in HOMOGENEITY_SCALES {
            let scaled: Vec<f64> = xi2.iter().map(|v| lambda * v).collect();
            let (yl, _) = risk_measure_with_error(&bundle, gen, &scaled, basis)?;
            let rhs = lambda * y2;
            let tol = HOMOGENEITY_RTOL * rhs.abs().max(1e-9);
            p5.record(tol - (yl - rhs).abs(), || witness(Some(lambda), yl, rhs, tol));
        }

        let gen_b = weaker(gen, u);
        let rep = comparison_check(&bundle, gen, &gen_b, &xi1, &xi2, basis)?;
        cmp.record(rep.y_a0 - rep.y_b0 + rep.tolerance, || {
            witness(Some(gen_b.kappa), rep.y_a0, rep.y_b0, rep.tolerance)
        });
    }

    Ok(AxiomReport {
        generator: *gen,
        settings: *settings,
        outcomes: [p1, p2, p3, p4, p5, cmp].into_iter().map(Tally::finish).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> AxiomSettings {
        AxiomSettings {
            trials: 3,
            n_paths: 512,
            n_steps: 8,
            ..AxiomSettings::default()
        }
    }

    #[test]
    fn zero_generator_passes() {
        let r = run_axiom_suite(&Generator::ZERO, &small()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn quadratic_homogeneity_witness() {
        let r = run_axiom_suite(&Generator::scaled_quadratic(0.5), &small()).unwrap();
        let p5 = r.outcome(Axiom::PositiveHomogeneity).unwrap();
        assert_eq!(p5.expectation, Expectation::Fails);
        assert!(p5.witness.is_some());
        assert!(p5.passed);
    }
}
