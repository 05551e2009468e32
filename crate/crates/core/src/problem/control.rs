use alloc::format;
use alloc::vec::Vec;

use super::config::{BoxConfig, ControlSetConfig};
use crate::error::FieldError;

/// Finite uniform discretization of a control box, enumerated in
/// lexicographic order (first coordinate slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
    points: Vec<f64>,
}

impl ControlSet {
    pub fn from_config(cfg: &ControlSetConfig, field: &str) -> Result<Self, Vec<FieldError>> {
        let mut errors = Vec::new();
        let m = cfg.lower.len();
        if m == 0 {
            errors.push(FieldError::new(
                format!("{field}.lower"),
                "control set must have at least one coordinate",
            ));
        }
        if cfg.upper.len() != m {
            errors.push(FieldError::new(
                format!("{field}.upper"),
                format!("expected {m} entries, got {}", cfg.upper.len()),
            ));
        }
        if cfg.points.len() != m {
            errors.push(FieldError::new(
                format!("{field}.points"),
                format!("expected {m} entries, got {}", cfg.points.len()),
            ));
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        for i in 0..m {
            let (lo, hi, n) = (cfg.lower[i], cfg.upper[i], cfg.points[i]);
            if !lo.is_finite() || !hi.is_finite() {
                errors.push(FieldError::new(format!("{field}[{i}]"), "bounds must be finite"));
            } else if hi < lo {
                errors.push(FieldError::new(
                    format!("{field}[{i}]"),
                    "upper bound below lower bound",
                ));
            }
            if n == 0 {
                errors.push(FieldError::new(format!("{field}.points[{i}]"), "control set is empty"));
            } else if n > 1 && hi == lo {
                errors.push(FieldError::new(
                    format!("{field}.points[{i}]"),
                    "degenerate interval admits a single point only",
                ));
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let total: usize = cfg.points.iter().product();
        if total > u32::MAX as usize {
            return Err(alloc::vec![FieldError::new(
                format!("{field}.points"),
                "control set too large"
            )]);
        }

        let axes: Vec<Vec<f64>> = (0..m)
            .map(|i| axis_points(cfg.lower[i], cfg.upper[i], cfg.points[i]))
            .collect();
        let mut points = Vec::with_capacity(total * m);
        let mut idx = alloc::vec![0usize; m];
        for _ in 0..total {
            for i in 0..m {
                points.push(axes[i][idx[i]]);
            }
            // odometer increment, last coordinate fastest
            for i in (0..m).rev() {
                idx[i] += 1;
                if idx[i] < cfg.points[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        Ok(Self {
            lower: cfg.lower.clone(),
            upper: cfg.upper.clone(),
            counts: cfg.points.clone(),
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn point(&self, index: usize) -> &[f64] {
        let m = self.dim();
        &self.points[index * m..(index + 1) * m]
    }

    /// Flat `[len x dim]` point list.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim())
    }

    /// Index of `p` if it is one of the enumerated points.
    pub fn index_of(&self, p: &[f64]) -> Option<usize> {
        self.iter().position(|q| q == p)
    }

    /// Closest enumerated point (Euclidean); lowest index on ties.
    pub fn nearest_index(&self, p: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.iter().enumerate() {
            let d: f64 = q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

fn axis_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let mut out: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * (j as f64) / ((n - 1) as f64)).collect();
    out[n - 1] = hi;
    out
}

/// Axis-aligned truncation box of the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn from_config(cfg: &BoxConfig, dim: usize) -> Result<Self, Vec<FieldError>> {
        let mut errors = Vec::new();
        if cfg.lower.len() != dim {
            errors.push(FieldError::new(
                "domain_box.lower",
                format!("shape mismatch: expected {dim} entries, got {}", cfg.lower.len()),
            ));
        }
        if cfg.upper.len() != dim {
            errors.push(FieldError::new(
                "domain_box.upper",
                format!("shape mismatch: expected {dim} entries, got {}", cfg.upper.len()),
            ));
        }
        if errors.is_empty() {
            for i in 0..dim {
                let (lo, hi) = (cfg.lower[i], cfg.upper[i]);
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    errors.push(FieldError::new(
                        format!("domain_box[{i}]"),
                        "box must have positive volume with finite bounds",
                    ));
                }
            }
        }
        if errors.is_empty() {
            Ok(Self {
                lower: cfg.lower.clone(),
                upper: cfg.upper.clone(),
            })
        } else {
            Err(errors)
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
    }

    /// Smallest distance to the boundary along any axis, as a fraction of that axis' width.
    pub fn relative_margin(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| {
                let m = (x[i] - self.lower[i]).min(self.upper[i] - x[i]);
                m / self.width(i)
            })
            .fold(f64::INFINITY, f64::min)
    }
}
