//! Numeric probes: gradient checks against central differences, duality-gap
//! certificates, entropy inequalities, local relative-smoothness estimates,
//! and the log-barrier counterexample showing that no global smoothness
//! constant relative to the entropy exists.
//!
//! Probes are pure and deterministic given their seed; they report sample
//! statistics instead of asserting constants the problem does not provide.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::density::C64;
use crate::geometry::{
    DensityMatrix, FeasiblePoint, HermitianMatrix, MirrorMap, SimplexMirror, SimplexVector,
};
use crate::objectives::{Measurement, Objective, PortfolioInstance, QstInstance};
use crate::solver::certificate_gap;

/// Relative error at which the finite-difference probe passes.
pub const FD_PASS_TOL: f64 = 1e-5;

/// Outcome of a probe: pass/fail plus named sample statistics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
    pub stats: BTreeMap<String, f64>,
}

impl ProbeReport {
    fn new(name: &str, samples: usize, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            pass: true,
            samples,
            seed,
            stats: BTreeMap::new(),
        }
    }

    fn stat(&mut self, key: &str, value: f64) {
        self.stats.insert(key.to_string(), value);
    }
}

type Probe = rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Random samples and instances
// ---------------------------------------------------------------------------

/// Full-support simplex point from normalized exponentials of Gaussians.
pub fn random_simplex(d: usize, rng: &mut impl Rng) -> SimplexVector {
    let v = DVector::from_iterator(
        d,
        (0..d).map(|_| f64::exp(rng.sample::<f64, _>(StandardNormal))),
    );
    SimplexVector::from_unnormalized(v).expect("positive weights")
}

/// Full-rank random density matrix `A A^H / tr` with Gaussian `A`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let a = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &a * a.adjoint();
    let trace: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    DensityMatrix::from_psd_unchecked(m / C64::new(trace, 0.0))
}

/// Haar-like random unit vector with complex Gaussian entries.
pub fn random_unit_vector(d: usize, rng: &mut impl Rng) -> DVector<C64> {
    let v = DVector::from_iterator(
        d,
        (0..d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    );
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Random portfolio instance with strictly positive lognormal relatives.
pub fn random_portfolio_instance(d: usize, t: usize, rng: &mut impl Rng) -> PortfolioInstance {
    let rows = (0..t)
        .map(|_| {
            DVector::from_iterator(
                d,
                (0..d).map(|_| f64::exp(0.1 * rng.sample::<f64, _>(StandardNormal))),
            )
        })
        .collect();
    PortfolioInstance::new(rows).expect("positive relatives")
}

/// Random tomography instance of rank-one projectors onto random directions.
pub fn random_qst_instance(d: usize, n: usize, rng: &mut impl Rng) -> QstInstance {
    let measurements = (0..n)
        .map(|_| Measurement::Rank1(random_unit_vector(d, rng)))
        .collect();
    QstInstance::new(d, measurements).expect("valid instance")
}

// ---------------------------------------------------------------------------
// Tangent directions
// ---------------------------------------------------------------------------

/// Points whose constraint manifold admits tangent sampling; used by the
/// finite-difference and smoothness probes so they never leave the
/// constraint set to first order.
pub trait Tangent: FeasiblePoint {
    /// Unit-norm ambient direction tangent to the constraint (zero-sum
    /// vector / traceless Hermitian matrix).
    fn random_tangent(&self, rng: &mut Probe) -> Self::Grad;

    /// `x + t * dir`, validated as a point of the constraint set.
    fn translate(&self, dir: &Self::Grad, t: f64) -> Result<Self>;

    /// A full-support point within `radius` of `x` (Euclidean/Frobenius).
    fn random_in_ball(&self, radius: f64, rng: &mut Probe) -> Self;
}

impl Tangent for SimplexVector {
    fn random_tangent(&self, rng: &mut Probe) -> DVector<f64> {
        let d = self.len();
        let mut v: DVector<f64> =
            DVector::from_iterator(d, (0..d).map(|_| rng.sample(StandardNormal)));
        let mean = v.sum() / d as f64;
        v.add_scalar_mut(-mean);
        let norm = v.norm();
        v / norm
    }

    fn translate(&self, dir: &DVector<f64>, t: f64) -> Result<Self> {
        SimplexVector::new(self.as_vector() + dir * t)
            .map_err(|e| Error::Domain(format!("tangent step left the simplex: {e}")))
    }

    fn random_in_ball(&self, radius: f64, rng: &mut Probe) -> Self {
        let w = random_simplex(self.len(), rng);
        let gap = w.dist(self);
        let theta: f64 = rng.random::<f64>() * (radius / gap.max(radius)).min(1.0);
        let mixed = self.as_vector() * (1.0 - theta) + w.as_vector() * theta;
        SimplexVector::new(mixed).expect("convex combination stays feasible")
    }
}

impl Tangent for DensityMatrix {
    fn random_tangent(&self, rng: &mut Probe) -> HermitianMatrix {
        let d = self.dim();
        let a = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let mut h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let trace: f64 = (0..d).map(|i| h[(i, i)].re).sum();
        for i in 0..d {
            h[(i, i)] -= C64::new(trace / d as f64, 0.0);
        }
        let norm = h.norm();
        HermitianMatrix::new(h / C64::new(norm, 0.0)).expect("hermitian by construction")
    }

    fn translate(&self, dir: &HermitianMatrix, t: f64) -> Result<Self> {
        DensityMatrix::new(self.as_matrix() + dir.as_matrix() * C64::new(t, 0.0))
            .map_err(|e| Error::Domain(format!("tangent step left the density set: {e}")))
    }

    fn random_in_ball(&self, radius: f64, rng: &mut Probe) -> Self {
        let w = random_density(self.dim(), rng);
        let gap = w.dist(self);
        let theta: f64 = rng.random::<f64>() * (radius / gap.max(radius)).min(1.0);
        let mixed = self.as_matrix() * C64::new(1.0 - theta, 0.0)
            + w.as_matrix() * C64::new(theta, 0.0);
        DensityMatrix::from_psd_unchecked(mixed)
    }
}

// ---------------------------------------------------------------------------
// Probes
// ---------------------------------------------------------------------------

/// Duality-gap certificate `max_z <grad f(x), x - z>` over the constraint
/// set: the gradient pairing against the worst extreme point. Nonnegative,
/// and an upper bound on `f(x) - f*` by convexity.
pub fn fw_gap<O: Objective>(obj: &O, x: &O::Point) -> Result<f64> {
    let grad = obj.gradient(x)?;
    certificate_gap::<O::Point>(&grad, x)
}

/// Central finite differences along random tangent directions against the
/// analytic directional derivative. Passes at relative error
/// [`FD_PASS_TOL`], measured against the direction-derivative scale.
pub fn finite_difference_check<O>(
    obj: &O,
    x: &O::Point,
    directions: usize,
    step: f64,
    seed: u64,
) -> Result<ProbeReport>
where
    O: Objective,
    O::Point: Tangent,
{
    let mut rng = Probe::seed_from_u64(seed);
    let grad = obj.gradient(x)?;
    let mut report = ProbeReport::new("finite_difference_check", directions, seed);
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let dir = x.random_tangent(&mut rng);
        let forward = obj.value(&x.translate(&dir, step)?)?;
        let backward = obj.value(&x.translate(&dir, -step)?)?;
        let fd = (forward - backward) / (2.0 * step);
        let analytic = O::Point::grad_inner(&grad, &dir);
        let rel = (fd - analytic).abs() / analytic.abs().max(1.0);
        worst = worst.max(rel);
    }
    report.stat("max_rel_error", worst);
    report.pass = worst <= FD_PASS_TOL;
    Ok(report)
}

/// Empirical local relative-smoothness constant: the largest Bregman ratio
/// `[f(z2) - f(z1) - <grad f(z1), z2 - z1>] / D_h(z2, z1)` over sampled pairs
/// in a ball around `x`. Reports the sample maximum; passes when every
/// sampled pair stayed inside the objective's domain with a finite ratio.
pub fn local_smoothness_probe<O, M>(
    obj: &O,
    map: &M,
    x: &O::Point,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport>
where
    O: Objective,
    O::Point: Tangent,
    M: MirrorMap<Point = O::Point>,
{
    let mut rng = Probe::seed_from_u64(seed);
    let mut report = ProbeReport::new("local_smoothness_probe", samples, seed);
    let mut l_hat = f64::NEG_INFINITY;
    let mut used = 0usize;
    let mut domain_errors = 0usize;
    for _ in 0..samples {
        let z1 = x.random_in_ball(radius, &mut rng);
        let z2 = x.random_in_ball(radius, &mut rng);
        let divergence = map.bregman(&z2, &z1)?;
        if divergence <= 1e-15 {
            continue;
        }
        let pieces = (|| -> Result<f64> {
            let f1 = obj.value(&z1)?;
            let f2 = obj.value(&z2)?;
            let g1 = obj.gradient(&z1)?;
            let linear = O::Point::pair(&g1, &z2) - O::Point::pair(&g1, &z1);
            Ok(f2 - f1 - linear)
        })();
        match pieces {
            Ok(excess) => {
                let ratio = excess / divergence;
                if !ratio.is_finite() {
                    report.pass = false;
                    continue;
                }
                l_hat = l_hat.max(ratio);
                used += 1;
            }
            Err(Error::Domain(_)) => {
                domain_errors += 1;
                report.pass = false;
            }
            Err(e) => return Err(e),
        }
    }
    report.stat("l_hat", l_hat);
    report.stat("pairs_used", used as f64);
    report.stat("domain_errors", domain_errors as f64);
    Ok(report)
}

/// Entropy inequalities: the Kullback-Leibler divergence dominates half the
/// squared l1 distance on random simplex pairs, and the matrix relative
/// entropy dominates half the squared trace distance on random density
/// pairs.
pub fn pinsker_suite(samples: usize, seed: u64) -> Result<ProbeReport> {
    let mut rng = Probe::seed_from_u64(seed);
    let mut report = ProbeReport::new("pinsker_suite", samples, seed);
    let shannon = SimplexMirror::shannon();
    let von_neumann = crate::geometry::DensityMirror::von_neumann();

    let mut worst_classical = f64::NEG_INFINITY;
    for _ in 0..samples {
        let p = random_simplex(5, &mut rng);
        let q = random_simplex(5, &mut rng);
        let kl = shannon.bregman(&p, &q)?;
        let l1: f64 = p
            .as_vector()
            .iter()
            .zip(q.as_vector().iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        worst_classical = worst_classical.max(0.5 * l1 * l1 - kl);
    }

    let mut worst_quantum = f64::NEG_INFINITY;
    for _ in 0..samples {
        let rho = random_density(4, &mut rng);
        let sigma = random_density(4, &mut rng);
        let d = von_neumann.bregman(&rho, &sigma)?;
        let diff = HermitianMatrix::new(rho.as_matrix() - sigma.as_matrix())?;
        let (w, _) = diff.eigh()?;
        let trace_norm: f64 = w.iter().map(|l| l.abs()).sum();
        worst_quantum = worst_quantum.max(0.5 * trace_norm * trace_norm - d);
    }

    report.stat("max_violation_classical", worst_classical);
    report.stat("max_violation_quantum", worst_quantum);
    report.pass = worst_classical <= 1e-12 && worst_quantum <= 1e-12;
    Ok(report)
}

/// The two-coordinate log-barrier objective `g(x, y) = -log x - log y` used
/// by the smoothness counterexample: a two-day, two-asset portfolio whose
/// days pay a single asset each.
pub fn log_barrier_objective() -> PortfolioInstance {
    PortfolioInstance::new(vec![
        DVector::from_row_slice(&[1.0, 0.0]),
        DVector::from_row_slice(&[0.0, 1.0]),
    ])
    .expect("valid two-day instance")
}

/// For each candidate constant `L`, exhibits
///
/// 1. a coordinate `x < 1/L` where the curvature surplus `L/x - 1/x^2` of
///    `-L h - g` turns negative (so `-L h - g` cannot be convex), and
/// 2. a pair of simplex points violating the two-point `L`-smoothness
///    inequality of `g` relative to the entropy,
///
/// plus the divergence of `||grad g||` toward the boundary. No finite `L`
/// survives, so `g` admits no global smoothness constant relative to the
/// entropy.
pub fn relative_smoothness_counterexample(l_grid: &[f64]) -> ProbeReport {
    let mut report = ProbeReport::new("relative_smoothness_counterexample", l_grid.len(), 0);
    let inst = log_barrier_objective();
    let shannon = SimplexMirror::shannon();
    let mut all_witnessed = true;

    for &l in l_grid {
        // Curvature surplus at x = 1/(2L), inside (0, 1/L).
        let x = 1.0 / (2.0 * l);
        let curvature_gap = l / x - 1.0 / (x * x);
        report.stat(&format!("curvature_gap_L{l}"), curvature_gap);
        report.stat(&format!("curvature_witness_L{l}"), x);

        // Two-point violation near the boundary: z1 = (a, 1-a), z2 = (2a, 1-2a).
        let a = (0.1 / l).min(0.25);
        let z1 = SimplexVector::new(DVector::from_row_slice(&[a, 1.0 - a])).unwrap();
        let z2 = SimplexVector::new(DVector::from_row_slice(&[2.0 * a, 1.0 - 2.0 * a])).unwrap();
        let excess = (|| -> Result<f64> {
            let f1 = inst.value(&z1)?;
            let f2 = inst.value(&z2)?;
            let g1 = inst.gradient(&z1)?;
            let linear = g1.dot(z2.as_vector()) - g1.dot(z1.as_vector());
            Ok(f2 - f1 - linear)
        })()
        .expect("interior points");
        let bound = l * shannon.bregman(&z2, &z1).expect("interior points");
        let margin = excess - bound;
        report.stat(&format!("two_point_margin_L{l}"), margin);
        report.stat(&format!("two_point_witness_L{l}"), a);
        if curvature_gap >= 0.0 || margin <= 0.0 {
            all_witnessed = false;
        }
    }

    // Unbounded gradient toward the boundary of the simplex.
    for eps in [1e-2, 1e-4, 1e-8] {
        let x = SimplexVector::new(DVector::from_row_slice(&[eps, 1.0 - eps])).unwrap();
        let g = inst.gradient(&x).expect("interior point");
        report.stat(&format!("grad_norm_eps{eps:e}"), g.norm());
    }

    report.pass = all_witnessed;
    report
}

/// Runs the full probe battery at desk scale; the operational self-check
/// behind the command-line `check` subcommand.
pub fn standard_suite(seed: u64) -> Result<Vec<ProbeReport>> {
    let mut rng = Probe::seed_from_u64(seed);
    let mut reports = Vec::new();

    let portfolio = random_portfolio_instance(5, 30, &mut rng);
    let x_p = random_simplex(5, &mut rng);
    reports.push(finite_difference_check(&portfolio, &x_p, 20, 1e-6, seed)?);

    let qst = random_qst_instance(4, 60, &mut rng);
    let x_q = DensityMatrix::maximally_mixed(4);
    let mut fd_q = finite_difference_check(&qst, &x_q, 20, 1e-6, seed)?;
    fd_q.name = "finite_difference_check_qst".into();
    reports.push(fd_q);

    let mut smooth_p = local_smoothness_probe(
        &portfolio,
        &SimplexMirror::shannon(),
        &SimplexVector::uniform(5),
        0.01,
        200,
        seed,
    )?;
    smooth_p.name = "local_smoothness_portfolio".into();
    reports.push(smooth_p);

    let mut smooth_q = local_smoothness_probe(
        &qst,
        &crate::geometry::DensityMirror::von_neumann(),
        &x_q,
        0.01,
        200,
        seed,
    )?;
    smooth_q.name = "local_smoothness_qst".into();
    reports.push(smooth_q);

    reports.push(pinsker_suite(1000, seed)?);

    let l_grid: Vec<f64> = (0..=10).map(|k| (1u64 << k) as f64).collect();
    reports.push(relative_smoothness_counterexample(&l_grid));

    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DensityMirror;

    #[test]
    fn gap_vanishes_at_the_known_minimizer() {
        let inst = QstInstance::from_basis_projectors(2, &[0, 0, 0, 1]).unwrap();
        let star = DensityMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.75, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.25, 0.0),
            ],
        ))
        .unwrap();
        let gap = fw_gap(&inst, &star).unwrap();
        assert!(gap.abs() <= 1e-9, "gap {gap}");
    }

    #[test]
    fn gap_is_zero_for_a_linear_objective_at_its_vertex() {
        struct Linear(DVector<f64>);
        impl Objective for Linear {
            type Point = SimplexVector;
            fn value(&self, x: &SimplexVector) -> Result<f64> {
                Ok(self.0.dot(x.as_vector()))
            }
            fn gradient(&self, _x: &SimplexVector) -> Result<DVector<f64>> {
                Ok(self.0.clone())
            }
            fn in_domain(&self, _x: &SimplexVector) -> bool {
                true
            }
        }
        let c = DVector::from_row_slice(&[0.4, -0.3, 1.2]);
        let obj = Linear(c.clone());
        let vertex = SimplexVector::vertex(3, 1);
        assert!(fw_gap(&obj, &vertex).unwrap().abs() < 1e-15);
    }

    #[test]
    fn gap_bounds_suboptimality_against_a_grid_oracle() {
        use rand::SeedableRng;
        let mut rng = Probe::seed_from_u64(5);
        let inst = random_portfolio_instance(3, 12, &mut rng);
        let x = random_simplex(3, &mut rng);
        let gap = fw_gap(&inst, &x).unwrap();
        assert!(gap >= -1e-10);
        // Brute-force grid optimum at resolution 1e-3 (enough for the bound
        // check, which carries a 1e-6 cushion plus grid bias in our favor).
        let n = 1000;
        let mut f_grid = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let p = SimplexVector::new(DVector::from_row_slice(&[
                    i as f64 / n as f64,
                    j as f64 / n as f64,
                    (n - i - j) as f64 / n as f64,
                ]))
                .unwrap();
                if let Ok(f) = inst.value(&p) {
                    f_grid = f_grid.min(f);
                }
            }
        }
        let fx = inst.value(&x).unwrap();
        assert!(fx - f_grid <= gap + 1e-6, "f - f* = {} > gap {gap}", fx - f_grid);
    }

    #[test]
    fn finite_differences_match_analytic_gradients() {
        use rand::SeedableRng;
        let mut rng = Probe::seed_from_u64(9);
        let inst = random_portfolio_instance(5, 25, &mut rng);
        let report = finite_difference_check(&inst, &SimplexVector::uniform(5), 20, 1e-6, 9).unwrap();
        assert!(report.pass, "stats {:?}", report.stats);

        let qst = random_qst_instance(4, 80, &mut rng);
        let report = finite_difference_check(&qst, &DensityMatrix::maximally_mixed(4), 20, 1e-6, 9)
            .unwrap();
        assert!(report.pass, "stats {:?}", report.stats);
    }

    #[test]
    fn finite_differences_are_exact_for_linear_objectives() {
        struct Linear(DVector<f64>);
        impl Objective for Linear {
            type Point = SimplexVector;
            fn value(&self, x: &SimplexVector) -> Result<f64> {
                Ok(self.0.dot(x.as_vector()))
            }
            fn gradient(&self, _x: &SimplexVector) -> Result<DVector<f64>> {
                Ok(self.0.clone())
            }
            fn in_domain(&self, _x: &SimplexVector) -> bool {
                true
            }
        }
        let obj = Linear(DVector::from_row_slice(&[0.3, -0.7, 0.1]));
        // Linear objectives have zero truncation error, so a wide step makes
        // the rounding term (machine eps over step) negligible too.
        let report =
            finite_difference_check(&obj, &SimplexVector::uniform(3), 10, 0.05, 3).unwrap();
        assert!(report.stats["max_rel_error"] <= 1e-12);
    }

    #[test]
    fn smoothness_ratio_is_one_when_objective_equals_generator() {
        // f := negative entropy probed against the entropy map itself.
        struct NegEntropy;
        impl Objective for NegEntropy {
            type Point = SimplexVector;
            fn value(&self, x: &SimplexVector) -> Result<f64> {
                Ok(x.as_vector()
                    .iter()
                    .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
                    .sum())
            }
            fn gradient(&self, x: &SimplexVector) -> Result<DVector<f64>> {
                if x.min_entry() <= 0.0 {
                    return Err(Error::Domain("boundary".into()));
                }
                Ok(x.as_vector().map(|p| p.ln() + 1.0))
            }
            fn in_domain(&self, x: &SimplexVector) -> bool {
                x.min_entry() > 0.0
            }
        }
        let report = local_smoothness_probe(
            &NegEntropy,
            &SimplexMirror::shannon(),
            &SimplexVector::uniform(4),
            0.01,
            200,
            21,
        )
        .unwrap();
        assert!(report.pass);
        let l_hat = report.stats["l_hat"];
        assert!(l_hat <= 1.0 + 1e-6, "l_hat {l_hat}");
        assert!(l_hat >= 1.0 - 1e-3, "l_hat {l_hat}");
    }

    #[test]
    fn quadratic_against_euclidean_map_has_unit_ratio() {
        struct Quadratic(DVector<f64>);
        impl Objective for Quadratic {
            type Point = SimplexVector;
            fn value(&self, x: &SimplexVector) -> Result<f64> {
                Ok(0.5 * (x.as_vector() - &self.0).norm_squared())
            }
            fn gradient(&self, x: &SimplexVector) -> Result<DVector<f64>> {
                Ok(x.as_vector() - &self.0)
            }
            fn in_domain(&self, _x: &SimplexVector) -> bool {
                true
            }
        }
        let obj = Quadratic(DVector::from_row_slice(&[0.2, 0.3, 0.5]));
        let report = local_smoothness_probe(
            &obj,
            &SimplexMirror::euclidean(),
            &SimplexVector::uniform(3),
            0.05,
            100,
            13,
        )
        .unwrap();
        assert!(report.pass);
        assert!((report.stats["l_hat"] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn smoothness_probe_stays_finite_on_both_objectives() {
        use rand::SeedableRng;
        let mut rng = Probe::seed_from_u64(17);
        let inst = random_portfolio_instance(4, 20, &mut rng);
        let report = local_smoothness_probe(
            &inst,
            &SimplexMirror::shannon(),
            &SimplexVector::uniform(4),
            0.01,
            200,
            17,
        )
        .unwrap();
        assert!(report.pass, "stats {:?}", report.stats);
        assert!(report.stats["l_hat"].is_finite());

        let qst = random_qst_instance(3, 50, &mut rng);
        let report = local_smoothness_probe(
            &qst,
            &DensityMirror::von_neumann(),
            &DensityMatrix::maximally_mixed(3),
            0.01,
            200,
            17,
        )
        .unwrap();
        assert!(report.pass, "stats {:?}", report.stats);
    }

    #[test]
    fn pinsker_holds_on_seeded_samples() {
        let report = pinsker_suite(1000, 42).unwrap();
        assert!(report.pass, "stats {:?}", report.stats);
    }

    #[test]
    fn pinsker_hand_example() {
        // KL((1,0) || (.5,.5)) = log 2 >= 0.5 * (l1 = 1)^2.
        let shannon = SimplexMirror::shannon();
        let p = SimplexVector::new(DVector::from_row_slice(&[1.0, 0.0])).unwrap();
        let q = SimplexVector::new(DVector::from_row_slice(&[0.5, 0.5])).unwrap();
        let kl = shannon.bregman(&p, &q).unwrap();
        assert!(kl >= 0.5 - 1e-12);
        assert!((kl - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn counterexample_produces_witnesses_on_the_doubling_grid() {
        let grid: Vec<f64> = (0..=10).map(|k| (1u64 << k) as f64).collect();
        let report = relative_smoothness_counterexample(&grid);
        assert!(report.pass, "stats {:?}", report.stats);
        assert!(report.stats["grad_norm_eps1e-8"] > 1e7);
    }

    #[test]
    fn counterexample_curvature_matches_hand_arithmetic() {
        // L = 2 at x = 0.25: 2/x - 1/x^2 = 8 - 16; L = 10 at x = 0.05:
        // 200 - 400.
        let report = relative_smoothness_counterexample(&[2.0, 10.0]);
        assert!(report.pass);
        assert!((report.stats["curvature_gap_L2"] - (-8.0)).abs() < 1e-12);
        assert!((report.stats["curvature_gap_L10"] - (-200.0)).abs() < 1e-9);
    }

    #[test]
    fn diagonal_instances_share_their_gap_certificate() {
        use rand::SeedableRng;
        let mut rng = Probe::seed_from_u64(23);
        let qst = QstInstance::from_basis_projectors(3, &[0, 0, 1, 2, 2, 2]).unwrap();
        let days = [0usize, 0, 1, 2, 2, 2]
            .iter()
            .map(|&i| {
                let mut a = DVector::zeros(3);
                a[i] = 1.0;
                a
            })
            .collect();
        let bcrp = PortfolioInstance::new(days).unwrap();
        for _ in 0..10 {
            let p = random_simplex(3, &mut rng);
            let rho = DensityMatrix::from_simplex_diagonal(&p);
            let gq = fw_gap(&qst, &rho).unwrap();
            let gb = fw_gap(&bcrp, &p).unwrap();
            assert!((gq - gb).abs() <= 1e-10, "{gq} vs {gb}");
        }
    }
}
