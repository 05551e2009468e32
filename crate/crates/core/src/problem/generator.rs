use serde::{Deserialize, Serialize};

use super::validate::Z_RADIUS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Zero,
    ScaledL1,
    ScaledQuadratic,
}

/// BSDE driver `g(t, z)`. The `y` argument is never used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub preset: GeneratorKind,
    #[serde(default)]
    pub kappa: f64,
}

impl Generator {
    pub const ZERO: Generator = Generator {
        preset: GeneratorKind::Zero,
        kappa: 0.0,
    };

    pub fn scaled_l1(kappa: f64) -> Self {
        Self {
            preset: GeneratorKind::ScaledL1,
            kappa,
        }
    }

    pub fn scaled_quadratic(kappa: f64) -> Self {
        Self {
            preset: GeneratorKind::ScaledQuadratic,
            kappa,
        }
    }

    /// Evaluates `g(t, z)` without checking the length of `z`.
    #[inline]
    pub fn eval(&self, _t: f64, z: &[f64]) -> f64 {
        match self.preset {
            GeneratorKind::Zero => 0.0,
            GeneratorKind::ScaledL1 => {
                let mut s = 0.0;
                for zi in z {
                    s += zi.abs();
                }
                self.kappa * s
            }
            GeneratorKind::ScaledQuadratic => {
                let mut s = 0.0;
                for zi in z {
                    s += zi * zi;
                }
                0.5 * self.kappa * s
            }
        }
    }

    /// The value used by the numerical schemes: `g(t, z)` for globally
    /// Lipschitz generators, `g(t, clamp(z))` with each `z_i` clamped to
    /// `[-Z_RADIUS, Z_RADIUS]` otherwise.
    #[inline]
    pub fn eval_bounded(&self, t: f64, z: &[f64]) -> f64 {
        match self.preset {
            GeneratorKind::ScaledQuadratic => {
                let mut s = 0.0;
                for zi in z {
                    let c = zi.clamp(-Z_RADIUS, Z_RADIUS);
                    s += c * c;
                }
                0.5 * self.kappa * s
            }
            _ => self.eval(t, z),
        }
    }

    /// `g(t, lambda z) = lambda g(t, z)` for every `lambda > 0`.
    pub fn is_positively_homogeneous(&self) -> bool {
        match self.preset {
            GeneratorKind::Zero | GeneratorKind::ScaledL1 => true,
            GeneratorKind::ScaledQuadratic => self.kappa == 0.0,
        }
    }

    /// All catalog generators are convex for `kappa >= 0`.
    pub fn is_convex(&self) -> bool {
        self.kappa >= 0.0 || self.preset == GeneratorKind::Zero
    }

    /// Globally Lipschitz in `z` (w.r.t. the l1 norm).
    pub fn is_globally_lipschitz(&self) -> bool {
        self.is_positively_homogeneous()
    }

    /// Lipschitz constant w.r.t. the l1 norm on the box `|z_i| <= radius`.
    pub fn lipschitz_on(&self, radius: f64) -> f64 {
        match self.preset {
            GeneratorKind::Zero => 0.0,
            GeneratorKind::ScaledL1 => self.kappa,
            GeneratorKind::ScaledQuadratic => self.kappa * radius,
        }
    }

    pub(crate) fn validate(&self) -> core::result::Result<(), &'static str> {
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return Err("kappa must be finite and nonnegative");
        }
        Ok(())
    }
}

/// `g(t, z)` with a dimension check against the state dimension.
pub fn eval_generator(gen: &Generator, t: f64, z: &[f64], dim: usize) -> Result<f64> {
    if z.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "generator argument z",
            expected: dim,
            got: z.len(),
        });
    }
    Ok(gen.eval(t, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_values() {
        assert_eq!(eval_generator(&Generator::ZERO, 0.3, &[1.0, -2.0], 2).unwrap(), 0.0);
        assert_eq!(
            eval_generator(&Generator::scaled_l1(0.5), 0.0, &[3.0, 4.0], 2).unwrap(),
            3.5
        );
        assert_eq!(
            eval_generator(&Generator::scaled_quadratic(1.0), 0.0, &[3.0, 4.0], 2).unwrap(),
            12.5
        );
    }

    #[test]
    fn dimension_mismatch() {
        let err = eval_generator(&Generator::ZERO, 0.0, &[1.0], 2).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 1,
                ..
            }
        ));
    }

    #[test]
    fn homogeneity_flags() {
        assert!(Generator::scaled_l1(2.0).is_positively_homogeneous());
        assert!(!Generator::scaled_quadratic(2.0).is_positively_homogeneous());
        assert!(!Generator::scaled_quadratic(2.0).is_globally_lipschitz());
    }

    #[test]
    fn kappa_validation() {
        assert!(Generator::scaled_l1(-1.0).validate().is_err());
        assert!(Generator::scaled_l1(f64::NAN).validate().is_err());
        assert!(Generator::scaled_l1(0.0).validate().is_ok());
    }

    fn gens() -> impl Strategy<Value = Generator> {
        (0.0f64..3.0).prop_flat_map(|k| {
            prop_oneof![
                Just(Generator::ZERO),
                Just(Generator::scaled_l1(k)),
                Just(Generator::scaled_quadratic(k)),
            ]
        })
    }

    fn zvec() -> impl Strategy<Value = (f64, f64)> {
        (-10.0f64..10.0, -10.0f64..10.0)
    }

    proptest! {
        #[test]
        fn vanishes_at_origin(g in gens(), t in 0.0f64..5.0) {
            prop_assert_eq!(g.eval(t, &[0.0, 0.0]), 0.0);
        }

        #[test]
        fn l1_lipschitz(k in 0.0f64..3.0, a in zvec(), b in zvec()) {
            let g = Generator::scaled_l1(k);
            let lhs = (g.eval(0.0, &[a.0, a.1]) - g.eval(0.0, &[b.0, b.1])).abs();
            let rhs = k * ((a.0 - b.0).abs() + (a.1 - b.1).abs());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn l1_positive_homogeneity(k in 0.0f64..3.0, a in zvec(), lambda in prop::sample::select(vec![0.25, 0.5, 2.0, 4.0, 8.0])) {
            // powers of two keep the scaling exact in floating point
            let g = Generator::scaled_l1(k);
            prop_assert_eq!(g.eval(0.0, &[lambda * a.0, lambda * a.1]), lambda * g.eval(0.0, &[a.0, a.1]));
        }

        #[test]
        fn convexity(g in gens(), a in zvec(), b in zvec(), theta in 0.0f64..=1.0) {
            let mix = [theta * a.0 + (1.0 - theta) * b.0, theta * a.1 + (1.0 - theta) * b.1];
            let lhs = g.eval(0.0, &mix);
            let rhs = theta * g.eval(0.0, &[a.0, a.1]) + (1.0 - theta) * g.eval(0.0, &[b.0, b.1]);
            prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
