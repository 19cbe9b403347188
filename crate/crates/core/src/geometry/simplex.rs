//! Probability-simplex points and the Euclidean projection onto the simplex.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{tol, FeasiblePoint};

/// A point of the probability simplex: nonnegative entries of unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    v: DVector<f64>,
}

impl SimplexVector {
    /// Validates nonnegativity and unit sum (within [`tol::SIMPLEX_SUM`]).
    pub fn new(v: DVector<f64>) -> Result<Self> {
        Self::with_tolerance(v, tol::SIMPLEX_SUM)
    }

    pub fn with_tolerance(v: DVector<f64>, sum_tol: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvariantViolation("empty simplex vector".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvariantViolation(
                "simplex vector has non-finite entries".into(),
            ));
        }
        if let Some(x) = v.iter().find(|&&x| x < 0.0) {
            return Err(Error::InvariantViolation(format!(
                "simplex vector has negative entry {x:.3e}"
            )));
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > sum_tol {
            return Err(Error::InvariantViolation(format!(
                "simplex vector sum {sum} deviates from 1 by more than {sum_tol:.1e}"
            )));
        }
        Ok(Self { v })
    }

    /// Normalizes a vector of nonnegative weights with positive sum.
    pub fn from_unnormalized(v: DVector<f64>) -> Result<Self> {
        let sum: f64 = v.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::NormalizationFailure(format!(
                "weight sum {sum} is not positive and finite"
            )));
        }
        Self::new(v / sum)
    }

    /// The uniform distribution on `d` coordinates.
    pub fn uniform(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        Self {
            v: DVector::from_element(d, 1.0 / d as f64),
        }
    }

    /// The `i`-th vertex of the simplex.
    pub fn vertex(d: usize, i: usize) -> Self {
        assert!(i < d, "vertex index out of range");
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        Self { v }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn min_entry(&self) -> f64 {
        self.v.min()
    }

    /// True when every entry exceeds `floor`.
    pub fn is_interior(&self, floor: f64) -> bool {
        self.v.iter().all(|&x| x > floor)
    }
}

impl FeasiblePoint for SimplexVector {
    type Grad = DVector<f64>;

    fn dim(&self) -> usize {
        self.v.len()
    }

    fn pair(grad: &DVector<f64>, x: &Self) -> f64 {
        grad.dot(&x.v)
    }

    fn grad_inner(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(b)
    }

    fn dist(&self, other: &Self) -> f64 {
        (&self.v - &other.v).norm()
    }

    fn linear_minimizer(grad: &DVector<f64>) -> Result<Self> {
        let j = grad.imin();
        Ok(Self::vertex(grad.len(), j))
    }
}

/// Euclidean projection onto the simplex by the sort-and-threshold rule.
///
/// Sorts the entries, finds the largest prefix whose water level keeps all
/// prefix entries positive, and clips at that level.
pub fn euclidean_simplex_projection(v: &DVector<f64>) -> Result<SimplexVector> {
    if v.is_empty() {
        return Err(Error::InvariantViolation("empty input".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("projection input has non-finite entries".into()));
    }
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    let projected = v.map(|x| (x - theta).max(0.0));
    SimplexVector::from_unnormalized(projected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(entries: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(entries)
    }

    #[test]
    fn rejects_negative_entries_and_bad_sums() {
        assert!(SimplexVector::new(dv(&[0.5, -0.1, 0.6])).is_err());
        assert!(SimplexVector::new(dv(&[0.5, 0.6])).is_err());
        assert!(SimplexVector::new(dv(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn projection_of_feasible_point_is_identity() {
        let p = euclidean_simplex_projection(&dv(&[0.2, 0.8])).unwrap();
        assert!((p.as_vector() - dv(&[0.2, 0.8])).norm() < 1e-14);
    }

    #[test]
    fn projection_clips_to_vertex() {
        let p = euclidean_simplex_projection(&dv(&[2.0, 0.0])).unwrap();
        assert!((p.as_vector() - dv(&[1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn projection_of_symmetric_point_is_uniform() {
        let p = euclidean_simplex_projection(&dv(&[0.5, 0.5, 0.5])).unwrap();
        let third = 1.0 / 3.0;
        assert!((p.as_vector() - dv(&[third, third, third])).norm() < 1e-14);
    }

    #[test]
    fn projection_matches_brute_force_on_2d_grid() {
        // Independent oracle: minimize ||z - v|| over a fine grid of the
        // 2-simplex and compare objective values.
        let v = dv(&[0.9, -0.3]);
        let p = euclidean_simplex_projection(&v).unwrap();
        let obj = |z0: f64| ((z0 - v[0]).powi(2) + (1.0 - z0 - v[1]).powi(2)).sqrt();
        let mut best = f64::INFINITY;
        let n = 10_000;
        for i in 0..=n {
            let z0 = i as f64 / n as f64;
            best = best.min(obj(z0));
        }
        let got = obj(p.as_vector()[0]);
        assert!(got <= best + 1e-8, "projection {got} worse than grid {best}");
    }

    #[test]
    fn linear_minimizer_picks_smallest_coordinate() {
        let g = dv(&[0.3, -1.0, 0.5]);
        let z = SimplexVector::linear_minimizer(&g).unwrap();
        assert_eq!(z.as_vector()[1], 1.0);
    }
}
