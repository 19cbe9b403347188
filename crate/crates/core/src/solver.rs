//! Mirror descent with Armijo backtracking line search.
//!
//! Each outer iteration evaluates the gradient once, then probes steps
//! `alpha_bar, r*alpha_bar, r^2*alpha_bar, ...` until the sufficient-decrease
//! test
//!
//! ```text
//! f(x(alpha)) <= f(x) + tau * <grad f(x), x(alpha) - x>
//! ```
//!
//! accepts (non-strictly, so an exactly stationary probe is accepted).
//! Candidate points outside the objective's domain count as rejections and
//! trigger further backtracking. Runs stop on a duality-gap certificate, an
//! objective stall, a detected fixed point, the iteration budget, or the
//! step-size floor.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FeasiblePoint, MirrorMap};
use crate::objectives::Objective;

/// Iterates closer than this are treated as a fixed point, which certifies
/// optimality for a mirror-descent update.
pub const FIXED_POINT_TOL: f64 = 1e-14;

/// Consecutive near-equal objective values required to declare a stall.
pub const STALL_WINDOW: usize = 5;

/// Rounding slack for the non-strict acceptance test, scaled by the
/// objective magnitude. At a stationary point both sides of the test agree
/// exactly in real arithmetic; without the slack, last-bit noise would force
/// a pointless backtrack.
const ACCEPT_SLACK: f64 = 1e-14;

/// Backtracking line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoConfig {
    /// Initial step probed at every iteration.
    pub alpha_bar: f64,
    /// Backtrack factor in (0, 1).
    pub r: f64,
    /// Sufficient-decrease fraction in (0, 1).
    pub tau: f64,
    /// Floor below which backtracking gives up with a terminal status.
    pub alpha_min: f64,
    /// Hard cap on backtracks per iteration.
    pub max_backtracks: u32,
}

impl ArmijoConfig {
    pub fn new(alpha_bar: f64, r: f64, tau: f64) -> Result<Self> {
        let cfg = Self {
            alpha_bar,
            r,
            tau,
            alpha_min: 1e-12,
            max_backtracks: 100,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvariantViolation(format!(
                "backtrack factor r = {} must lie in (0, 1)",
                self.r
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvariantViolation(format!(
                "sufficient-decrease fraction tau = {} must lie in (0, 1)",
                self.tau
            )));
        }
        if !(self.alpha_min > 0.0 && self.alpha_bar > self.alpha_min) {
            return Err(Error::InvariantViolation(format!(
                "need alpha_bar ({}) > alpha_min ({}) > 0",
                self.alpha_bar, self.alpha_min
            )));
        }
        Ok(())
    }
}

/// Full solve parameters: line search plus stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub armijo: ArmijoConfig,
    pub max_iters: usize,
    /// Stop once the duality-gap certificate drops to this value.
    pub gap_tol: f64,
    /// Relative objective-change threshold for the stall stop.
    pub rel_obj_tol: f64,
    /// Seed forwarded to any randomized initialization; runs are otherwise
    /// deterministic in (instance, start point, config).
    pub seed: u64,
}

impl SolveConfig {
    /// Defaults for portfolio problems: aggressive initial step with a
    /// demanding decrease fraction.
    pub fn portfolio() -> Self {
        Self {
            armijo: ArmijoConfig::new(10.0, 0.5, 0.8).expect("valid constants"),
            max_iters: 200,
            gap_tol: 1e-6,
            rel_obj_tol: 1e-12,
            seed: 0,
        }
    }

    /// Defaults for tomography problems.
    pub fn tomography() -> Self {
        Self {
            armijo: ArmijoConfig::new(10.0, 0.5, 0.5).expect("valid constants"),
            max_iters: 200,
            gap_tol: 1e-6,
            rel_obj_tol: 1e-12,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.armijo.validate()?;
        if self.max_iters == 0 {
            return Err(Error::InvariantViolation("max_iters must be >= 1".into()));
        }
        if !(self.gap_tol > 0.0 && self.rel_obj_tol > 0.0) {
            return Err(Error::InvariantViolation(
                "stopping tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    GapConverged,
    ObjStalled,
    MaxIters,
    FixedPoint,
    ArmijoFloor,
}

/// One line of a run trace. Serializes to the JSONL schema
/// `{"k":..,"f":..,"alpha":..,"backtracks":..,"fw_gap":..,"elapsed_ms":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub alpha: f64,
    pub backtracks: u32,
    pub fw_gap: Option<f64>,
    pub elapsed_ms: f64,
}

/// A full run trace: one record per iteration (including the start point at
/// `k = 0`) and the terminal status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: TerminalStatus,
}

impl IterationTrace {
    pub fn terminal_f(&self) -> Option<f64> {
        self.records.last().map(|r| r.f)
    }

    pub fn terminal_gap(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.fw_gap)
    }

    /// Smallest accepted step over the run (records after `k = 0`).
    pub fn min_alpha(&self) -> Option<f64> {
        self.records
            .iter()
            .skip(1)
            .map(|r| r.alpha)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// True when the objective never increases by more than `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].f <= w[0].f + slack)
    }

    /// First iteration whose gap certificate is at or below `threshold`.
    pub fn iterations_to_gap(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.fw_gap.is_some_and(|g| g <= threshold))
            .map(|r| r.k)
    }
}

/// Streaming consumer of iteration records.
pub trait TraceSink {
    fn record(&mut self, record: &IterationRecord);
}

/// Discards records; the returned trace still holds them.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _record: &IterationRecord) {}
}

/// Adapts a closure into a sink.
pub struct FnSink<F: FnMut(&IterationRecord)>(pub F);

impl<F: FnMut(&IterationRecord)> TraceSink for FnSink<F> {
    fn record(&mut self, record: &IterationRecord) {
        (self.0)(record)
    }
}

/// An accepted backtracking step.
#[derive(Debug, Clone)]
pub struct ArmijoStep<P: FeasiblePoint> {
    pub alpha: f64,
    pub point: P,
    pub value: f64,
    pub backtracks: u32,
}

/// Runs the backtracking search at `x`, evaluating `f` and its gradient.
pub fn armijo_step<O, M>(
    obj: &O,
    map: &M,
    x: &O::Point,
    cfg: &ArmijoConfig,
) -> Result<ArmijoStep<O::Point>>
where
    O: Objective,
    M: MirrorMap<Point = O::Point>,
{
    let fx = obj.value(x)?;
    let grad = obj.gradient(x)?;
    armijo_step_with(obj, map, x, fx, &grad, cfg)
}

/// Backtracking search with the value and gradient at `x` already in hand;
/// the gradient is reused across all backtracks.
pub fn armijo_step_with<O, M>(
    obj: &O,
    map: &M,
    x: &O::Point,
    fx: f64,
    grad: &<O::Point as FeasiblePoint>::Grad,
    cfg: &ArmijoConfig,
) -> Result<ArmijoStep<O::Point>>
where
    O: Objective,
    M: MirrorMap<Point = O::Point>,
{
    cfg.validate()?;
    let pair_x = O::Point::pair(grad, x);
    let slack = ACCEPT_SLACK * fx.abs().max(1.0);
    let try_alpha = |alpha: f64| -> Result<std::result::Result<ArmijoStep<O::Point>, ()>> {
        let candidate = map.update(x, grad, alpha)?;
        match obj.value(&candidate) {
            Ok(fc) => {
                let decrease = O::Point::pair(grad, &candidate) - pair_x;
                if fc <= fx + cfg.tau * decrease + slack {
                    Ok(Ok(ArmijoStep {
                        alpha,
                        point: candidate,
                        value: fc,
                        backtracks: 0,
                    }))
                } else {
                    Ok(Err(()))
                }
            }
            // An infeasible candidate is a rejection, not a failure.
            Err(Error::Domain(_)) => Ok(Err(())),
            Err(e) => Err(e),
        }
    };

    let mut alpha = cfg.alpha_bar;
    let mut backtracks = 0u32;
    loop {
        if let Ok(mut step) = try_alpha(alpha)? {
            step.backtracks = backtracks;
            return Ok(step);
        }
        backtracks += 1;
        alpha *= cfg.r;
        if alpha < cfg.alpha_min || backtracks > cfg.max_backtracks {
            // Last chance exactly at the floor; an infeasible floor candidate
            // surfaces the underlying domain error instead.
            let candidate = map.update(x, grad, cfg.alpha_min)?;
            let fc = obj.value(&candidate)?;
            let decrease = O::Point::pair(grad, &candidate) - pair_x;
            if fc <= fx + cfg.tau * decrease + slack {
                return Ok(ArmijoStep {
                    alpha: cfg.alpha_min,
                    point: candidate,
                    value: fc,
                    backtracks,
                });
            }
            return Err(Error::ArmijoFloorReached {
                alpha,
                floor: cfg.alpha_min,
                backtracks,
            });
        }
    }
}

/// Result of a full run: final iterate and the trace.
#[derive(Debug, Clone)]
pub struct Solution<P: FeasiblePoint> {
    pub point: P,
    pub trace: IterationTrace,
}

/// Runs mirror descent with backtracking from `x0` until a stopping rule
/// fires, streaming each record into `sink`.
pub fn solve<O, M>(
    obj: &O,
    map: &M,
    x0: O::Point,
    cfg: &SolveConfig,
    sink: &mut dyn TraceSink,
) -> Result<Solution<O::Point>>
where
    O: Objective,
    M: MirrorMap<Point = O::Point>,
{
    cfg.validate()?;
    if !obj.in_domain(&x0) {
        return Err(Error::InvalidStart(
            "start point lies outside the objective's domain".into(),
        ));
    }
    let clock = Instant::now();
    let mut records = Vec::with_capacity(cfg.max_iters + 1);
    let mut emit = |rec: IterationRecord, records: &mut Vec<IterationRecord>| {
        sink.record(&rec);
        records.push(rec);
    };

    let mut x = x0;
    let mut fx = obj.value(&x)?;
    let mut grad = obj.gradient(&x)?;
    let mut gap = certificate_gap::<O::Point>(&grad, &x)?;
    emit(
        IterationRecord {
            k: 0,
            f: fx,
            alpha: 0.0,
            backtracks: 0,
            fw_gap: Some(gap),
            elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        },
        &mut records,
    );

    // A fixed point certifies optimality, so always attempt at least one
    // step: a run started at its minimizer reports FixedPoint, not a gap
    // stop at k = 0.
    let mut status = TerminalStatus::MaxIters;
    let mut stall_count = 0usize;
    for k in 1..=cfg.max_iters {
        let step = match armijo_step_with(obj, map, &x, fx, &grad, &cfg.armijo) {
            Ok(step) => step,
            Err(Error::ArmijoFloorReached { .. }) => {
                status = TerminalStatus::ArmijoFloor;
                break;
            }
            Err(e) => return Err(e),
        };
        grad = obj.gradient(&step.point)?;
        gap = certificate_gap::<O::Point>(&grad, &step.point)?;
        emit(
            IterationRecord {
                k,
                f: step.value,
                alpha: step.alpha,
                backtracks: step.backtracks,
                fw_gap: Some(gap),
                elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
            },
            &mut records,
        );
        let moved = step.point.dist(&x);
        let f_change = (fx - step.value).abs();
        x = step.point;
        fx = step.value;
        if moved <= FIXED_POINT_TOL {
            status = TerminalStatus::FixedPoint;
            break;
        }
        if gap <= cfg.gap_tol {
            status = TerminalStatus::GapConverged;
            break;
        }
        if f_change <= cfg.rel_obj_tol * fx.abs().max(1.0) {
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

/// `<grad, x> - min_z <grad, z>` over the constraint set; upper-bounds the
/// suboptimality `f(x) - f*` of a convex objective.
pub fn certificate_gap<P: FeasiblePoint>(grad: &P::Grad, x: &P) -> Result<f64> {
    Ok(P::pair(grad, x) - P::support_min(grad)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{SimplexMirror, SimplexVector};
    use crate::objectives::PortfolioInstance;
    use nalgebra::DVector;

    fn sv(entries: &[f64]) -> SimplexVector {
        SimplexVector::new(DVector::from_row_slice(entries)).unwrap()
    }

    /// `f(x) = ||x - c||^2 / 2` restricted to the simplex; a smooth test
    /// objective whose unconstrained minimizer is interior.
    struct Quadratic {
        center: DVector<f64>,
    }

    impl crate::objectives::Objective for Quadratic {
        type Point = SimplexVector;

        fn value(&self, x: &SimplexVector) -> crate::Result<f64> {
            Ok(0.5 * (x.as_vector() - &self.center).norm_squared())
        }

        fn gradient(&self, x: &SimplexVector) -> crate::Result<DVector<f64>> {
            Ok(x.as_vector() - &self.center)
        }

        fn in_domain(&self, _x: &SimplexVector) -> bool {
            true
        }
    }

    #[test]
    fn accepts_full_step_when_every_point_is_optimal() {
        // One flat trading day: f is identically zero on the simplex.
        let inst = PortfolioInstance::new(vec![DVector::from_row_slice(&[1.0, 1.0])]).unwrap();
        let map = SimplexMirror::shannon();
        let x = sv(&[0.3, 0.7]);
        let cfg = ArmijoConfig::new(10.0, 0.5, 0.8).unwrap();
        let step = armijo_step(&inst, &map, &x, &cfg).unwrap();
        assert_eq!(step.backtracks, 0);
        assert!((step.alpha - 10.0).abs() < 1e-15);
        assert!(step.point.dist(&x) <= 1e-12);
    }

    #[test]
    fn quadratic_accepts_unit_step_without_backtracking() {
        // With alpha = 1 the candidate is the unconstrained minimizer, so the
        // decrease test holds with slack for tau = 0.5.
        let obj = Quadratic {
            center: DVector::from_row_slice(&[0.4, 0.6]),
        };
        let map = SimplexMirror::euclidean();
        let cfg = ArmijoConfig::new(1.0, 0.5, 0.5).unwrap();
        let step = armijo_step(&obj, &map, &sv(&[0.7, 0.3]), &cfg).unwrap();
        assert_eq!(step.backtracks, 0);
        assert!(step.value < 1e-20);
    }

    #[test]
    fn huge_initial_step_still_terminates_with_valid_decrease() {
        let inst = PortfolioInstance::new(vec![
            DVector::from_row_slice(&[1.4, 0.7, 1.0]),
            DVector::from_row_slice(&[0.9, 1.3, 0.8]),
            DVector::from_row_slice(&[1.0, 1.0, 1.2]),
        ])
        .unwrap();
        let map = SimplexMirror::shannon();
        let x = SimplexVector::uniform(3);
        let mut cfg = ArmijoConfig::new(1e6, 0.5, 0.8).unwrap();
        cfg.max_backtracks = 200;
        let step = armijo_step(&inst, &map, &x, &cfg).unwrap();
        // Re-evaluate both sides of the accepted inequality independently.
        use crate::objectives::Objective;
        let fx = inst.value(&x).unwrap();
        let g = inst.gradient(&x).unwrap();
        let lhs = inst.value(&step.point).unwrap();
        let rhs = fx
            + cfg.tau
                * (SimplexVector::pair(&g, &step.point) - SimplexVector::pair(&g, &x));
        assert!(lhs <= rhs + 1e-10);
        assert!(step.alpha > 0.0);
    }

    #[test]
    fn solve_reaches_the_dominant_asset_on_a_single_day() {
        let inst = PortfolioInstance::new(vec![DVector::from_row_slice(&[2.0, 1.0])]).unwrap();
        let map = SimplexMirror::shannon();
        let mut cfg = SolveConfig::portfolio();
        cfg.max_iters = 400;
        let sol = solve(&inst, &map, SimplexVector::uniform(2), &cfg, &mut NullSink).unwrap();
        // The best single-day portfolio is the vertex of the larger return.
        let f_end = sol.trace.terminal_f().unwrap();
        assert!((f_end + 2f64.ln()).abs() < 1e-6, "terminal f = {f_end}");
        assert!(sol.trace.is_monotone(1e-12));
    }

    #[test]
    fn solve_detects_a_fixed_point_at_the_minimizer() {
        // Every simplex point minimizes the flat one-day objective, so the
        // first accepted step returns the start point unchanged.
        let inst = PortfolioInstance::new(vec![DVector::from_row_slice(&[1.0, 1.0])]).unwrap();
        let map = SimplexMirror::shannon();
        let cfg = SolveConfig::portfolio();
        let sol = solve(&inst, &map, sv(&[0.25, 0.75]), &cfg, &mut NullSink).unwrap();
        assert_eq!(sol.trace.status, TerminalStatus::FixedPoint);
        assert!(sol.trace.records.len() <= 2, "stopped by k <= 1");
    }

    #[test]
    fn solve_started_at_the_skewed_minimizer_stops_as_a_fixed_point() {
        use crate::geometry::{DensityMatrix, DensityMirror};
        use crate::objectives::QstInstance;
        let inst = QstInstance::from_basis_projectors(2, &[0, 0, 0, 1]).unwrap();
        let star = DensityMatrix::from_simplex_diagonal(&sv(&[0.75, 0.25]));
        let sol = solve(
            &inst,
            &DensityMirror::von_neumann(),
            star,
            &SolveConfig::tomography(),
            &mut NullSink,
        )
        .unwrap();
        assert_eq!(sol.trace.status, TerminalStatus::FixedPoint);
        assert!(sol.trace.records.len() <= 2);
    }

    #[test]
    fn solve_rejects_an_infeasible_start() {
        let inst = PortfolioInstance::new(vec![DVector::from_row_slice(&[1.0, 0.0])]).unwrap();
        let map = SimplexMirror::shannon();
        let err = solve(
            &inst,
            &map,
            SimplexVector::vertex(2, 1),
            &SolveConfig::portfolio(),
            &mut NullSink,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidStart(_)));
    }

    #[test]
    fn default_configs_match_documented_constants() {
        let p = SolveConfig::portfolio();
        assert_eq!(
            (p.armijo.alpha_bar, p.armijo.r, p.armijo.tau),
            (10.0, 0.5, 0.8)
        );
        let q = SolveConfig::tomography();
        assert_eq!(
            (q.armijo.alpha_bar, q.armijo.r, q.armijo.tau),
            (10.0, 0.5, 0.5)
        );
        assert_eq!(q.max_iters, 200);
        assert_eq!(q.gap_tol, 1e-6);
        assert_eq!(q.armijo.alpha_min, 1e-12);
    }

    #[test]
    fn record_serializes_to_the_documented_schema() {
        let rec = IterationRecord {
            k: 3,
            f: 1.5,
            alpha: 0.25,
            backtracks: 2,
            fw_gap: None,
            elapsed_ms: 0.5,
        };
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            json,
            r#"{"k":3,"f":1.5,"alpha":0.25,"backtracks":2,"fw_gap":null,"elapsed_ms":0.5}"#
        );
    }
}
