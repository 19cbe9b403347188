//! Mirror descent with Armijo backtracking over Bregman geometries.
//!
//! The crate provides:
//!
//! - [`geometry`]: simplex and density-matrix point types, Bregman
//!   divergences, and closed-form mirror-descent updates for the Euclidean,
//!   Shannon, von Neumann, and log-barrier (Burg) generators;
//! - [`objectives`]: maximum-likelihood tomography and log-wealth portfolio
//!   objectives with analytic gradients;
//! - [`solver`]: the backtracking mirror-descent loop with duality-gap
//!   stopping and iteration traces;
//! - [`baselines`]: multiplicative-update EM, fixed-point likelihood
//!   iterations with and without exact line search, and conditional
//!   gradient, sharing the solver's trace format;
//! - [`diagnostics`]: numeric probes (gradient checks, gap certificates,
//!   entropy inequalities, relative-smoothness experiments).

pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod objectives;
pub mod solver;

pub use error::{Error, Result};
