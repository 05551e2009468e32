//! Numerical toolkit for hierarchical (leader/follower) risk-averse control
//! of controlled diffusions.
//!
//! - [`problem`]: declarative problem instances and sampled assumption checks.
//! - [`sde`]: Euler–Maruyama path bundles under Markov feedback policies and
//!   pathwise accumulated costs.
//! - [`bsde`]: regression Monte Carlo for z-only BSDEs, g-expectations, the
//!   induced dynamic risk measure and the risk-axiom harness.
//! - [`hjb`]: monotone explicit sweeps of the coupled risk-averse HJB
//!   equations, the follower best-response map, DPP residuals and
//!   grid/Monte Carlo cross-validation.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; `std` only enables rayon-parallel loops.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bsde;
pub mod error;
pub mod hjb;
pub mod linalg;
mod par;
pub mod problem;
pub mod rng;
pub mod sde;

pub use error::{Error, FieldError, Result};
pub use problem::{build_problem, Generator, Player, ProblemConfig, ProblemSpec};
