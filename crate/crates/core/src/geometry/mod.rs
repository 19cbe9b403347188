//! Domain point types, Hermitian linear-algebra kernels, Bregman divergences,
//! and the closed-form proximal update for each supported mirror map.
//!
//! Two constraint sets are supported: the probability simplex in `R^d`
//! ([`SimplexVector`]) and the set of unit-trace positive semidefinite
//! Hermitian matrices ([`DensityMatrix`]). A [`MirrorMap`] bundles a strictly
//! convex generator `h` with its Bregman divergence and the solved update
//!
//! ```text
//! x(alpha) = argmin { alpha * <g, z - x> + D_h(z, x) : z feasible }
//! ```
//!
//! which has a closed form for every map implemented here.

pub mod density;
pub mod mirror;
pub mod simplex;

pub use density::{matrix_exp, matrix_log, DensityMatrix, HermitianMatrix};
pub use mirror::{DensityMirror, MirrorKind, SimplexMirror};
pub use simplex::{euclidean_simplex_projection, SimplexVector};

use crate::error::Result;

/// Default tolerances for type invariants and normalization solves.
///
/// These are the module-wide constants; constructors with a `_with_tol`
/// suffix accept overrides.
pub mod tol {
    /// Allowed deviation of a simplex vector's entry sum from one.
    pub const SIMPLEX_SUM: f64 = 1e-12;
    /// Allowed Hermitian deviation `max|m - m^H|`.
    pub const HERMITIAN_DEV: f64 = 1e-10;
    /// Allowed negative part of the spectrum of a PSD matrix.
    pub const PSD_FLOOR: f64 = 1e-10;
    /// Allowed deviation of a density matrix's trace from one.
    pub const TRACE_DEV: f64 = 1e-10;
    /// Default eigenvalue clamp applied before matrix logarithms.
    pub const LOG_CLAMP: f64 = 1e-300;
    /// Trace residual at which the inverse-map normalization solve stops.
    pub const NORMALIZATION_RESIDUAL: f64 = 1e-12;
    /// Bisection budget for the inverse-map normalization solve.
    pub const NORMALIZATION_MAX_BISECTIONS: usize = 200;
}

/// A point of one of the supported constraint sets, together with the linear
/// pairing and support machinery shared by the solver, the conditional-gradient
/// baseline, and the duality-gap certificate.
pub trait FeasiblePoint: Clone + std::fmt::Debug {
    /// Gradients and ambient directions associated with this point type.
    type Grad: Clone + std::fmt::Debug;

    fn dim(&self) -> usize;

    /// The real inner product `<grad, x>` of the ambient space.
    fn pair(grad: &Self::Grad, x: &Self) -> f64;

    /// Inner product of two ambient directions.
    fn grad_inner(a: &Self::Grad, b: &Self::Grad) -> f64;

    /// Euclidean (Frobenius) distance between two points.
    fn dist(&self, other: &Self) -> f64;

    /// An extreme point minimizing `<grad, z>` over the constraint set.
    fn linear_minimizer(grad: &Self::Grad) -> Result<Self>;

    /// `min { <grad, z> : z feasible }`, the support value at the minimizer.
    fn support_min(grad: &Self::Grad) -> Result<f64> {
        Ok(Self::pair(grad, &Self::linear_minimizer(grad)?))
    }
}

/// Gradient type associated with a point type.
pub type Grad<P> = <P as FeasiblePoint>::Grad;

/// A strictly convex generator `h` over one of the constraint sets: Bregman
/// divergence, gradient of `h`, and the solved proximal update.
pub trait MirrorMap {
    type Point: FeasiblePoint;

    fn kind(&self) -> MirrorKind;

    /// `D_h(z2, z1) = h(z2) - h(z1) - <grad h(z1), z2 - z1> >= 0`.
    ///
    /// `z1` must be interior for the entropy-type maps.
    fn bregman(&self, z2: &Self::Point, z1: &Self::Point) -> Result<f64>;

    /// The minimizer of `alpha * <grad, z - x> + D_h(z, x)` over the
    /// constraint set. A zero step returns `x` unchanged.
    fn update(&self, x: &Self::Point, grad: &Grad<Self::Point>, alpha: f64)
        -> Result<Self::Point>;

    /// Gradient of the generator at an interior point.
    fn grad_h(&self, x: &Self::Point) -> Result<Grad<Self::Point>>;
}
