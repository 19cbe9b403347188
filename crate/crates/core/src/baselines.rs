//! Comparison algorithms sharing the solver's trace format: multiplicative
//! EM for portfolios, the fixed-point likelihood iteration for tomography
//! (plain and damped by exact line search), and conditional gradient.
//!
//! None of these is a descent method by construction except through its line
//! search, so the shared driver stops a run before emitting a record that
//! would increase the objective.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::density::C64;
use crate::geometry::{DensityMatrix, FeasiblePoint, HermitianMatrix, SimplexVector};
use crate::objectives::{Objective, PortfolioInstance, QstInstance};
use crate::solver::{
    certificate_gap, IterationRecord, IterationTrace, Solution, SolveConfig, TerminalStatus,
    TraceSink, FIXED_POINT_TOL, STALL_WINDOW,
};

/// Largest damping factor searched by the damped likelihood iteration.
pub const DEFAULT_BETA_MAX: f64 = 1e3;

/// Default cap keeping conditional-gradient iterates inside the likelihood
/// domain when the vertex itself is infeasible.
pub const DEFAULT_GAMMA_CAP: f64 = 1.0 - 1e-3;

/// Objective increases beyond this slack terminate a baseline run.
const MONOTONE_SLACK: f64 = 1e-12;

/// Derivative-free exact line search parameters.
#[derive(Debug, Clone, Copy)]
pub struct GoldenSectionParams {
    /// Interval width at which the search stops.
    pub width_tol: f64,
    /// Budget of objective evaluations.
    pub max_evals: usize,
}

impl Default for GoldenSectionParams {
    fn default() -> Self {
        Self {
            width_tol: 1e-10,
            max_evals: 200,
        }
    }
}

/// The comparison algorithms, with their per-kind parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineKind {
    /// Multiplicative EM update for portfolios.
    CoverEm,
    /// Fixed-point likelihood iteration for tomography.
    Rhor,
    /// Damped fixed-point iteration; the damping factor comes from exact
    /// line search over `[0, beta_max]`.
    DilutedRhor { beta_max: f64 },
    /// Conditional gradient with exact line search over `[0, gamma_cap]`.
    FrankWolfe { gamma_cap: f64 },
}

impl BaselineKind {
    pub fn diluted_rhor() -> Self {
        BaselineKind::DilutedRhor {
            beta_max: DEFAULT_BETA_MAX,
        }
    }

    pub fn frank_wolfe() -> Self {
        BaselineKind::FrankWolfe {
            gamma_cap: DEFAULT_GAMMA_CAP,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::CoverEm => "cover-em",
            BaselineKind::Rhor => "rhor",
            BaselineKind::DilutedRhor { .. } => "diluted-rhor",
            BaselineKind::FrankWolfe { .. } => "frank-wolfe",
        }
    }
}

/// Minimizes a unimodal function over `[0, hi]` by golden-section search.
/// Returns the best probed abscissa and its value; the endpoint `0` is always
/// among the probes, so the result never exceeds `phi(0)`.
fn golden_section(
    phi: impl Fn(f64) -> f64,
    hi: f64,
    params: &GoldenSectionParams,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let f0 = phi(0.0);
    let (mut a, mut b) = (0.0f64, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    let mut best = (0.0, f0);
    let mut evals = 3usize;
    let consider = |t: f64, ft: f64, best: &mut (f64, f64)| {
        if ft < best.1 {
            *best = (t, ft);
        }
    };
    consider(x1, f1, &mut best);
    consider(x2, f2, &mut best);
    while b - a > params.width_tol && evals < params.max_evals {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = phi(x1);
            consider(x1, f1, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = phi(x2);
            consider(x2, f2, &mut best);
        }
        evals += 1;
    }
    if !best.1.is_finite() {
        return Err(Error::LineSearchBracketFailure(
            "every probed point evaluated to a non-finite objective".into(),
        ));
    }
    Ok(best)
}

/// The averaged reweighting operator `R(x) = -grad f(x) / n`; positive
/// semidefinite, and the identity at a maximum-likelihood stationary point.
fn reweighting_operator(inst: &QstInstance, x: &DensityMatrix) -> Result<HermitianMatrix> {
    Ok(inst.gradient(x)?.scaled(-1.0 / inst.len() as f64))
}

fn normalized_density(m: DMatrix<C64>) -> Result<DensityMatrix> {
    let trace: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    if !trace.is_finite() || trace <= 0.0 {
        return Err(Error::NormalizationFailure(format!(
            "candidate trace {trace} is not positive"
        )));
    }
    Ok(DensityMatrix::from_psd_unchecked(
        m / Complex::new(trace, 0.0),
    ))
}

/// One multiplicative EM update: reweights each asset by its averaged
/// return-over-wealth ratio, which lands exactly on the simplex.
pub fn cover_em_step(inst: &PortfolioInstance, x: &SimplexVector) -> Result<SimplexVector> {
    let grad = inst.gradient(x)?;
    let days = inst.days() as f64;
    let weights = x.as_vector().zip_map(&grad, |xi, gi| xi * (-gi) / days);
    SimplexVector::from_unnormalized(weights)
}

/// One fixed-point likelihood update `x <- R(x) x R(x) / tr`.
pub fn rhor_step(inst: &QstInstance, x: &DensityMatrix) -> Result<DensityMatrix> {
    let r = reweighting_operator(inst, x)?;
    let y = r.as_matrix() * x.as_matrix() * r.as_matrix();
    normalized_density(y)
}

/// One damped fixed-point update: conjugates `x` by `I + beta R(x)` with the
/// damping `beta` minimizing the objective by exact line search.
pub fn diluted_rhor_step(
    inst: &QstInstance,
    x: &DensityMatrix,
    beta_max: f64,
    params: &GoldenSectionParams,
) -> Result<(DensityMatrix, f64)> {
    let r = reweighting_operator(inst, x)?;
    let candidate = |beta: f64| -> Result<DensityMatrix> {
        let a = DMatrix::identity(x.dim(), x.dim()) + r.as_matrix() * Complex::new(beta, 0.0);
        // A is Hermitian and the congruence A x A^H preserves PSD-ness.
        normalized_density(&a * x.as_matrix() * &a)
    };
    let phi = |beta: f64| -> f64 {
        candidate(beta)
            .and_then(|c| inst.value(&c))
            .unwrap_or(f64::INFINITY)
    };
    // Grow the search interval while the objective keeps improving.
    let mut hi = 1.0f64.min(beta_max);
    while hi < beta_max && phi(2.0 * hi) < phi(hi) {
        hi = (2.0 * hi).min(beta_max);
    }
    let (beta, _) = golden_section(phi, hi, params)?;
    Ok((candidate(beta)?, beta))
}

/// One conditional-gradient step: moves toward the ground-state projector of
/// the gradient, with the step from exact line search over `[0, gamma_cap]`.
pub fn frank_wolfe_step(
    inst: &QstInstance,
    x: &DensityMatrix,
    gamma_cap: f64,
    params: &GoldenSectionParams,
) -> Result<(DensityMatrix, f64)> {
    let grad = inst.gradient(x)?;
    let vertex = DensityMatrix::linear_minimizer(&grad)?;
    let candidate = |gamma: f64| -> DensityMatrix {
        DensityMatrix::from_psd_unchecked(
            x.as_matrix() * Complex::new(1.0 - gamma, 0.0)
                + vertex.as_matrix() * Complex::new(gamma, 0.0),
        )
    };
    let phi = |gamma: f64| -> f64 { inst.value(&candidate(gamma)).unwrap_or(f64::INFINITY) };
    let (gamma, _) = golden_section(phi, gamma_cap, params)?;
    Ok((candidate(gamma), gamma))
}

/// Runs a step map until a stopping rule fires, sharing the solver's trace
/// format. `step_size` is recorded in the trace's `alpha` column (the damping
/// or mixing factor for line-searched kinds, 1 for pure fixed-point kinds).
fn run_driver<O: Objective>(
    obj: &O,
    x0: O::Point,
    cfg: &SolveConfig,
    sink: &mut dyn TraceSink,
    mut step_fn: impl FnMut(&O::Point) -> Result<(O::Point, f64)>,
) -> Result<Solution<O::Point>> {
    cfg.validate()?;
    if !obj.in_domain(&x0) {
        return Err(Error::InvalidStart(
            "start point lies outside the objective's domain".into(),
        ));
    }
    let clock = std::time::Instant::now();
    let mut records = Vec::new();
    let mut x = x0;
    let mut fx = obj.value(&x)?;
    let mut gap = certificate_gap::<O::Point>(&obj.gradient(&x)?, &x)?;
    let mut emit = |k: usize, f: f64, alpha: f64, gap: f64, records: &mut Vec<IterationRecord>| {
        let rec = IterationRecord {
            k,
            f,
            alpha,
            backtracks: 0,
            fw_gap: Some(gap),
            elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        };
        sink.record(&rec);
        records.push(rec);
    };
    emit(0, fx, 0.0, gap, &mut records);

    let mut status = TerminalStatus::MaxIters;
    let mut stall_count = 0usize;
    for k in 1..=cfg.max_iters {
        let (next, step_size) = step_fn(&x)?;
        let f_next = obj.value(&next)?;
        if f_next > fx + MONOTONE_SLACK {
            // The update is not guaranteed to descend; stop at the last
            // good iterate rather than record an increase.
            status = TerminalStatus::ObjStalled;
            break;
        }
        gap = certificate_gap::<O::Point>(&obj.gradient(&next)?, &next)?;
        emit(k, f_next, step_size, gap, &mut records);
        let moved = next.dist(&x);
        let f_change = fx - f_next;
        x = next;
        fx = f_next;
        if moved <= FIXED_POINT_TOL {
            status = TerminalStatus::FixedPoint;
            break;
        }
        if gap <= cfg.gap_tol {
            status = TerminalStatus::GapConverged;
            break;
        }
        if f_change.abs() <= cfg.rel_obj_tol * fx.abs().max(1.0) {
            stall_count += 1;
            if stall_count >= STALL_WINDOW {
                status = TerminalStatus::ObjStalled;
                break;
            }
        } else {
            stall_count = 0;
        }
    }
    Ok(Solution {
        point: x,
        trace: IterationTrace { records, status },
    })
}

/// Multiplicative EM driver for portfolio instances.
pub fn run_cover_em(
    inst: &PortfolioInstance,
    x0: SimplexVector,
    cfg: &SolveConfig,
    sink: &mut dyn TraceSink,
) -> Result<Solution<SimplexVector>> {
    run_driver(inst, x0, cfg, sink, |x| {
        cover_em_step(inst, x).map(|next| (next, 1.0))
    })
}

/// Tomography baseline driver for the given kind.
pub fn run_qst_baseline(
    kind: BaselineKind,
    inst: &QstInstance,
    x0: DensityMatrix,
    cfg: &SolveConfig,
    sink: &mut dyn TraceSink,
) -> Result<Solution<DensityMatrix>> {
    let params = GoldenSectionParams::default();
    match kind {
        BaselineKind::Rhor => run_driver(inst, x0, cfg, sink, |x| {
            rhor_step(inst, x).map(|next| (next, 1.0))
        }),
        BaselineKind::DilutedRhor { beta_max } => run_driver(inst, x0, cfg, sink, |x| {
            diluted_rhor_step(inst, x, beta_max, &params)
        }),
        BaselineKind::FrankWolfe { gamma_cap } => run_driver(inst, x0, cfg, sink, |x| {
            frank_wolfe_step(inst, x, gamma_cap, &params)
        }),
        BaselineKind::CoverEm => Err(Error::Domain(
            "the multiplicative EM baseline runs on portfolio instances only".into(),
        )),
    }
}
