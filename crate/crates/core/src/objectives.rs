//! The two application objectives: negative log-likelihood of quantum
//! measurement outcomes over density matrices, and negative log-wealth of a
//! constant-rebalanced portfolio over the simplex.
//!
//! Both are sums of `-log` of a linear functional of the point, so gradients
//! are analytic and the domain test reduces to strict positivity of every
//! linear term.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::density::C64;
use crate::geometry::{DensityMatrix, FeasiblePoint, Grad, HermitianMatrix, SimplexVector};

/// Linear terms below this floor count as outside the domain; distinguishes
/// a true boundary from harmless underflow.
pub const DOMAIN_FLOOR: f64 = 1e-300;

/// A convex differentiable objective over one of the constraint sets.
pub trait Objective {
    type Point: FeasiblePoint;

    fn value(&self, x: &Self::Point) -> Result<f64>;

    fn gradient(&self, x: &Self::Point) -> Result<Grad<Self::Point>>;

    /// True when every linear term of the sum is strictly positive at `x`.
    fn in_domain(&self, x: &Self::Point) -> bool;
}

// ---------------------------------------------------------------------------
// Tomography likelihood
// ---------------------------------------------------------------------------

/// A measurement operator: either a rank-one factor `v` (the operator is
/// `v v^H`) or a full Hermitian PSD matrix.
#[derive(Debug, Clone)]
pub enum Measurement {
    Rank1(DVector<C64>),
    Full(HermitianMatrix),
}

impl Measurement {
    pub fn dim(&self) -> usize {
        match self {
            Measurement::Rank1(v) => v.len(),
            Measurement::Full(m) => m.dim(),
        }
    }

    /// `tr(M x)`; for rank-one factors this is `v^H x v`, computed without
    /// forming the operator.
    pub fn expectation(&self, x: &DMatrix<C64>) -> f64 {
        match self {
            Measurement::Rank1(v) => {
                let xv = x * v;
                v.dotc(&xv).re
            }
            Measurement::Full(m) => m.pair_with(x),
        }
    }

    /// The operator as a full matrix.
    pub fn to_matrix(&self) -> HermitianMatrix {
        match self {
            Measurement::Rank1(v) => HermitianMatrix::outer(v),
            Measurement::Full(m) => m.clone(),
        }
    }
}

/// A tomography instance: dimension and measurement operators.
#[derive(Debug, Clone)]
pub struct QstInstance {
    dim: usize,
    measurements: Vec<Measurement>,
}

impl QstInstance {
    pub fn new(dim: usize, measurements: Vec<Measurement>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvariantViolation(
                "dimension must be at least 2".into(),
            ));
        }
        if measurements.is_empty() {
            return Err(Error::InvariantViolation(
                "at least one measurement is required".into(),
            ));
        }
        for (i, m) in measurements.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if let Measurement::Full(h) = m {
                let (w, _) = h.eigh()?;
                if w.min() < -crate::geometry::tol::PSD_FLOOR {
                    return Err(Error::InvariantViolation(format!(
                        "measurement {i} is not PSD (min eigenvalue {:.3e})",
                        w.min()
                    )));
                }
            }
        }
        Ok(Self { dim, measurements })
    }

    /// Instance with rank-one projectors onto the standard basis vectors
    /// listed in `indices`; handy for diagonal test problems.
    pub fn from_basis_projectors(dim: usize, indices: &[usize]) -> Result<Self> {
        let measurements = indices
            .iter()
            .map(|&i| {
                let mut v = DVector::zeros(dim);
                v[i] = Complex::new(1.0, 0.0);
                Measurement::Rank1(v)
            })
            .collect();
        Self::new(dim, measurements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }
}

impl Objective for QstInstance {
    type Point = DensityMatrix;

    /// `-sum_i log tr(M_i x)`.
    fn value(&self, x: &DensityMatrix) -> Result<f64> {
        check_point_dim(self.dim, x.dim())?;
        let mut acc = 0.0;
        for (i, m) in self.measurements.iter().enumerate() {
            let p = m.expectation(x.as_matrix());
            if p <= 0.0 {
                return Err(Error::Domain(format!(
                    "measurement {i} has nonpositive expectation {p:.3e}"
                )));
            }
            acc -= p.ln();
        }
        Ok(acc)
    }

    /// `-sum_i M_i / tr(M_i x)`.
    fn gradient(&self, x: &DensityMatrix) -> Result<HermitianMatrix> {
        check_point_dim(self.dim, x.dim())?;
        let mut g: DMatrix<C64> = DMatrix::zeros(self.dim, self.dim);
        for (i, m) in self.measurements.iter().enumerate() {
            let p = m.expectation(x.as_matrix());
            if p <= 0.0 {
                return Err(Error::Domain(format!(
                    "measurement {i} has nonpositive expectation {p:.3e}"
                )));
            }
            let scale = Complex::new(-1.0 / p, 0.0);
            match m {
                Measurement::Rank1(v) => {
                    g.gerc(scale, v, v, Complex::new(1.0, 0.0));
                }
                Measurement::Full(h) => {
                    g += h.as_matrix() * scale;
                }
            }
        }
        HermitianMatrix::new(g)
    }

    fn in_domain(&self, x: &DensityMatrix) -> bool {
        self.dim == x.dim()
            && self
                .measurements
                .iter()
                .all(|m| m.expectation(x.as_matrix()) > DOMAIN_FLOOR)
    }
}

// ---------------------------------------------------------------------------
// Portfolio log-wealth
// ---------------------------------------------------------------------------

/// Daily price relatives: row `t` holds the per-dollar end-of-day returns of
/// the `d` assets on day `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioInstance {
    relatives: Vec<DVector<f64>>,
}

impl PortfolioInstance {
    pub fn new(relatives: Vec<DVector<f64>>) -> Result<Self> {
        if relatives.is_empty() {
            return Err(Error::InvariantViolation("no trading days".into()));
        }
        let d = relatives[0].len();
        if d < 2 {
            return Err(Error::InvariantViolation(
                "at least two assets are required".into(),
            ));
        }
        for (t, row) in relatives.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|&a| !a.is_finite() || a < 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "day {t} has a negative or non-finite price relative"
                )));
            }
            if row.iter().all(|&a| a <= 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "day {t} has no positive price relative; the objective would be +inf everywhere"
                )));
            }
        }
        Ok(Self { relatives })
    }

    pub fn assets(&self) -> usize {
        self.relatives[0].len()
    }

    pub fn days(&self) -> usize {
        self.relatives.len()
    }

    pub fn rows(&self) -> &[DVector<f64>] {
        &self.relatives
    }
}

impl Objective for PortfolioInstance {
    type Point = SimplexVector;

    /// `-sum_t log <a_t, x>`; the negative cumulative log-wealth.
    fn value(&self, x: &SimplexVector) -> Result<f64> {
        check_point_dim(self.assets(), x.len())?;
        let mut acc = 0.0;
        for (t, a) in self.relatives.iter().enumerate() {
            let w = a.dot(x.as_vector());
            if w <= 0.0 {
                return Err(Error::Domain(format!(
                    "day {t} has nonpositive portfolio return {w:.3e}"
                )));
            }
            acc -= w.ln();
        }
        Ok(acc)
    }

    /// `-sum_t a_t / <a_t, x>`.
    fn gradient(&self, x: &SimplexVector) -> Result<DVector<f64>> {
        check_point_dim(self.assets(), x.len())?;
        let mut g = DVector::zeros(self.assets());
        for (t, a) in self.relatives.iter().enumerate() {
            let w = a.dot(x.as_vector());
            if w <= 0.0 {
                return Err(Error::Domain(format!(
                    "day {t} has nonpositive portfolio return {w:.3e}"
                )));
            }
            g.axpy(-1.0 / w, a, 1.0);
        }
        Ok(g)
    }

    fn in_domain(&self, x: &SimplexVector) -> bool {
        self.assets() == x.len()
            && self
                .relatives
                .iter()
                .all(|a| a.dot(x.as_vector()) > DOMAIN_FLOOR)
    }
}

fn check_point_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(entries: &[f64]) -> SimplexVector {
        SimplexVector::new(DVector::from_row_slice(entries)).unwrap()
    }

    fn single_day(a: &[f64]) -> PortfolioInstance {
        PortfolioInstance::new(vec![DVector::from_row_slice(a)]).unwrap()
    }

    #[test]
    fn unit_returns_give_zero_value() {
        let inst = single_day(&[1.0, 1.0]);
        assert!(inst.value(&sv(&[0.3, 0.7])).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_asset_bet_gives_log_of_its_return() {
        let inst = single_day(&[2.0, 1.0]);
        let f = inst.value(&sv(&[1.0, 0.0])).unwrap();
        assert!((f + 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn gradient_is_minus_return_over_wealth() {
        let inst = single_day(&[1.0, 1.0]);
        let g = inst.gradient(&sv(&[0.5, 0.5])).unwrap();
        assert!((g - DVector::from_row_slice(&[-1.0, -1.0])).norm() < 1e-14);
    }

    #[test]
    fn gradient_sums_over_days() {
        let inst = PortfolioInstance::new(vec![
            DVector::from_row_slice(&[2.0, 0.0]),
            DVector::from_row_slice(&[0.0, 2.0]),
        ])
        .unwrap();
        let g = inst.gradient(&sv(&[0.5, 0.5])).unwrap();
        assert!((g - DVector::from_row_slice(&[-2.0, -2.0])).norm() < 1e-14);
    }

    #[test]
    fn identity_measurement_gives_zero_value() {
        let inst = QstInstance::new(
            2,
            vec![Measurement::Full(HermitianMatrix::identity(2))],
        )
        .unwrap();
        let x = DensityMatrix::maximally_mixed(2);
        assert!(inst.value(&x).unwrap().abs() < 1e-15);
        let g = inst.gradient(&x).unwrap();
        assert!((g.as_matrix() + DMatrix::<C64>::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn orthogonal_projector_is_out_of_domain() {
        let inst = QstInstance::from_basis_projectors(2, &[0]).unwrap();
        let mut v = DVector::zeros(2);
        v[1] = Complex::new(1.0, 0.0);
        let x = DensityMatrix::pure(&v).unwrap();
        assert!(!inst.in_domain(&x));
        assert!(inst.value(&x).is_err());
    }

    #[test]
    fn positive_relatives_are_always_in_domain() {
        let inst = PortfolioInstance::new(vec![
            DVector::from_row_slice(&[1.1, 0.9, 1.0]),
            DVector::from_row_slice(&[0.8, 1.2, 1.05]),
        ])
        .unwrap();
        assert!(inst.in_domain(&sv(&[0.2, 0.3, 0.5])));
        assert!(inst.in_domain(&sv(&[1.0, 0.0, 0.0])));
    }

    #[test]
    fn rank1_and_full_storage_agree() {
        let v = DVector::from_vec(vec![Complex::new(0.6, 0.2), Complex::new(0.3, -0.7)]);
        let rank1 = Measurement::Rank1(v.clone());
        let full = Measurement::Full(HermitianMatrix::outer(&v));
        let x = DensityMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(0.6, 0.0),
                Complex::new(0.1, 0.25),
                Complex::new(0.1, -0.25),
                Complex::new(0.4, 0.0),
            ],
        ))
        .unwrap();
        let a = rank1.expectation(x.as_matrix());
        let b = full.expectation(x.as_matrix());
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn diagonal_likelihood_reduces_to_portfolio_on_diagonals() {
        // Projector counts (3, 1) against diagonal states match the
        // two-asset log-wealth objective with days (1,0) x3, (0,1) x1.
        let qst = QstInstance::from_basis_projectors(2, &[0, 0, 0, 1]).unwrap();
        let days = vec![
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[0.0, 1.0]),
        ];
        let bcrp = PortfolioInstance::new(days).unwrap();
        let p = sv(&[0.6, 0.4]);
        let rho = DensityMatrix::from_simplex_diagonal(&p);
        let fq = qst.value(&rho).unwrap();
        let fb = bcrp.value(&p).unwrap();
        assert!((fq - fb).abs() < 1e-12);
        let gq = qst.gradient(&rho).unwrap().as_matrix().clone();
        let gb = bcrp.gradient(&p).unwrap();
        for i in 0..2 {
            assert!((gq[(i, i)].re - gb[i]).abs() < 1e-12);
        }
    }
}
