use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Condition number above which a per-step regression is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Polynomials of bounded total degree in the state coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionBasis {
    pub degree: usize,
}

impl Default for RegressionBasis {
    fn default() -> Self {
        Self { degree: 2 }
    }
}

impl RegressionBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    /// Number of basis functions (constant included) in `dim` variables.
    pub fn size(&self, dim: usize) -> usize {
        // binomial(dim + degree, degree)
        let mut s = 1usize;
        for i in 1..=dim {
            s = s * (self.degree + i) / i;
        }
        s
    }
}

/// Least-squares projector onto the basis evaluated at one time step.
///
/// Coordinates are standardized; coordinates with (numerically) zero spread
/// are dropped, so a deterministic state leaves only the constant. The
/// intercept is the sample mean and the slopes solve the centered normal
/// equations.
pub(crate) struct Regressor {
    n: usize,
    m: usize,
    feats: Vec<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    pub condition: f64,
}

impl Regressor {
    pub fn fit(x: &[f64], n: usize, d: usize, degree: usize, step: usize) -> Result<Self> {
        let nf = n as f64;
        let sums = par::block_sum(n, d, |p, acc| {
            for a in 0..d {
                acc[a] += x[p * d + a];
            }
        });
        let mean: Vec<f64> = sums.iter().map(|s| s / nf).collect();
        let sq = par::block_sum(n, d, |p, acc| {
            for a in 0..d {
                let e = x[p * d + a] - mean[a];
                acc[a] += e * e;
            }
        });
        let sd: Vec<f64> = sq.iter().map(|s| libm::sqrt(s / nf)).collect();
        let active: Vec<usize> = (0..d).filter(|&a| sd[a] > 1e-12 * mean[a].abs().max(1.0)).collect();

        let exps = exponents(active.len(), degree);
        let m = exps.len();
        if m == 0 {
            return Ok(Self {
                n,
                m,
                feats: Vec::new(),
                chol: None,
                condition: 1.0,
            });
        }

        let k = active.len();
        let blocks = par::map_range(par::block_count(n), |b| {
            let range = b * par::BLOCK..((b + 1) * par::BLOCK).min(n);
            let mut out = Vec::with_capacity(range.len() * m);
            let mut z = [0.0f64; 8];
            for p in range {
                for (i, &a) in active.iter().enumerate() {
                    z[i] = (x[p * d + a] - mean[a]) / sd[a];
                }
                for e in &exps {
                    let mut v = 1.0;
                    for i in 0..k {
                        v *= ipow(z[i], e[i]);
                    }
                    out.push(v);
                }
            }
            out
        });
        let mut feats = blocks.concat();
        let fmean: Vec<f64> = par::block_sum(n, m, |p, acc| {
            for f in 0..m {
                acc[f] += feats[p * m + f];
            }
        })
        .into_iter()
        .map(|s| s / nf)
        .collect();
        for row in feats.chunks_exact_mut(m) {
            for (v, mu) in row.iter_mut().zip(&fmean) {
                *v -= mu;
            }
        }

        let gram = par::block_sum(n, m * m, |p, acc| {
            let row = &feats[p * m..(p + 1) * m];
            for i in 0..m {
                for j in 0..m {
                    acc[i * m + j] += row[i] * row[j];
                }
            }
        });
        let g = DMatrix::from_row_slice(m, m, &gram.iter().map(|v| v / nf).collect::<Vec<_>>());
        let eig = g.clone().symmetric_eigenvalues();
        let (lo, hi) = eig
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::RankDeficient { step, condition });
        }
        let chol = Cholesky::new(g).ok_or(Error::RankDeficient { step, condition })?;
        Ok(Self {
            n,
            m,
            feats,
            chol: Some(chol),
            condition,
        })
    }

    #[cfg(test)]
    /// Number of non-constant basis functions in use.
    pub fn features(&self) -> usize {
        self.m
    }

    /// Fitted values of `y` and the root-mean-square residual.
    pub fn project(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let n = self.n;
        let nf = n as f64;
        let mean = super::shifted_mean(y);
        let fitted = match &self.chol {
            None => vec![mean; n],
            Some(chol) => {
                let m = self.m;
                let feats = &self.feats;
                let rhs = par::block_sum(n, m, |p, acc| {
                    let e = y[p] - mean;
                    for f in 0..m {
                        acc[f] += feats[p * m + f] * e;
                    }
                });
                let beta = chol.solve(&DVector::from_iterator(m, rhs.into_iter().map(|v| v / nf)));
                par::map_range(n, |p| {
                    let mut s = 0.0;
                    for f in 0..m {
                        s += beta[f] * feats[p * m + f];
                    }
                    mean + s
                })
            }
        };
        let sse = par::block_sum(n, 1, |p, acc| {
            let e = y[p] - fitted[p];
            acc[0] += e * e;
        })[0];
        (fitted, libm::sqrt(sse / nf))
    }
}

fn ipow(x: f64, k: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..k {
        r *= x;
    }
    r
}

/// Multi-indices of total degree `1..=degree` in `k` variables, graded.
fn exponents(k: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 1..=degree {
        let mut cur = vec![0u32; k];
        push_with_total(&mut out, &mut cur, 0, total as u32);
    }
    out
}

fn push_with_total(out: &mut Vec<Vec<u32>>, cur: &mut [u32], i: usize, left: u32) {
    if cur.is_empty() {
        return;
    }
    if i == cur.len() - 1 {
        cur[i] = left;
        out.push(cur.to_vec());
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e;
        push_with_total(out, cur, i + 1, left - e);
    }
    cur[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(RegressionBasis::new(2).size(1), 3);
        assert_eq!(RegressionBasis::new(2).size(2), 6);
        assert_eq!(exponents(2, 2).len(), 5);
        assert_eq!(exponents(0, 2).len(), 0);
    }

    #[test]
    fn quadratic_target_is_reproduced() {
        let n = 200;
        let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - v + 0.5 * v * v).collect();
        let r = Regressor::fit(&x, n, 1, 2, 0).unwrap();
        let (fit, rms) = r.project(&y);
        assert!(rms < 1e-12);
        assert!((fit[17] - y[17]).abs() < 1e-12);
    }

    #[test]
    fn constant_state_leaves_mean_only() {
        let x = vec![0.5; 40];
        let y: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let r = Regressor::fit(&x, 40, 1, 2, 0).unwrap();
        assert_eq!(r.features(), 0);
        assert_eq!(r.project(&y).0[3], 19.5);
    }

    #[test]
    fn collinear_features_rejected() {
        // two distinct values make x and x^2 collinear
        let x: Vec<f64> = (0..50).map(|i| (i % 2) as f64).collect();
        match Regressor::fit(&x, 50, 1, 2, 7) {
            Err(Error::RankDeficient { step, .. }) => assert_eq!(step, 7),
            _ => panic!("expected rank deficiency"),
        }
    }
}
