use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hjb::LatticeGrid;
use crate::problem::ControlSet;

/// Control indices tabulated on a lattice, read back by nearest node.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPolicy {
    grid: LatticeGrid,
    controls: ControlSet,
    indices: Vec<u32>,
}

impl TabulatedPolicy {
    /// `indices` is `[n_t x nodes]`, each entry an index into `controls`.
    pub fn new(grid: LatticeGrid, controls: ControlSet, indices: Vec<u32>) -> Result<Self> {
        let expected = grid.n_t() * grid.n_nodes();
        if indices.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "tabulated policy indices",
                expected,
                got: indices.len(),
            });
        }
        if let Some(pos) = indices.iter().position(|&i| i as usize >= controls.len()) {
            return Err(Error::Precondition(format!(
                "policy entry {pos} holds index {} outside a control set of size {}",
                indices[pos],
                controls.len()
            )));
        }
        Ok(Self {
            grid,
            controls,
            indices,
        })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    /// Index into [`Self::controls`] at `(t, x)`.
    #[inline]
    pub fn index_at(&self, t: f64, x: &[f64]) -> u32 {
        let k = self.grid.step_at(t);
        self.indices[k * self.grid.n_nodes() + self.grid.nearest_node(x)]
    }
}

/// Markov feedback policy `(t, x) -> u`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeedbackPolicy {
    Constant(Vec<f64>),
    Tabulated(Arc<TabulatedPolicy>),
}

impl FeedbackPolicy {
    pub fn constant(point: &[f64]) -> Self {
        FeedbackPolicy::Constant(point.to_vec())
    }

    pub fn tabulated(policy: TabulatedPolicy) -> Self {
        FeedbackPolicy::Tabulated(Arc::new(policy))
    }

    /// Control dimension.
    pub fn dim(&self) -> usize {
        match self {
            FeedbackPolicy::Constant(p) => p.len(),
            FeedbackPolicy::Tabulated(t) => t.controls.dim(),
        }
    }

    /// Constant policies must lie in the box spanned by `set`; tabulated
    /// policies must draw from a set of the same shape.
    pub fn check_against(&self, set: &ControlSet, who: &str) -> Result<()> {
        if self.dim() != set.dim() {
            return Err(Error::DimensionMismatch {
                what: "policy control dimension",
                expected: set.dim(),
                got: self.dim(),
            });
        }
        match self {
            FeedbackPolicy::Constant(p) => {
                let inside = p
                    .iter()
                    .zip(set.lower().iter().zip(set.upper()))
                    .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi);
                if !inside {
                    return Err(Error::Precondition(format!(
                        "{who} constant control {p:?} lies outside the control set"
                    )));
                }
            }
            FeedbackPolicy::Tabulated(t) => {
                if t.controls.points() != set.points() {
                    return Err(Error::Precondition(format!(
                        "{who} tabulated policy uses a different control set"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Palette of control values a bundle stores indices into.
    pub(crate) fn palette(&self) -> Vec<f64> {
        match self {
            FeedbackPolicy::Constant(p) => p.clone(),
            FeedbackPolicy::Tabulated(t) => t.controls.points().to_vec(),
        }
    }

    /// Palette index at `(t, x)`.
    #[inline]
    pub fn index_at(&self, t: f64, x: &[f64]) -> u32 {
        match self {
            FeedbackPolicy::Constant(_) => 0,
            FeedbackPolicy::Tabulated(p) => p.index_at(t, x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, FeedbackPolicy::Constant(_))
    }
}
