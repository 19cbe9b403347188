//! Hermitian matrices, density matrices, and eigendecomposition-based
//! matrix functions (exp, log, inverse on the spectrum).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{tol, FeasiblePoint};

pub type C64 = Complex<f64>;

const EIG_MAX_SWEEPS: usize = 100_000;

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Replaces `m` by its Hermitian part `(m + m^H) / 2`.
fn symmetrize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// A complex matrix that is exactly Hermitian after construction.
///
/// Holds objective gradients and measurement operators; also the ambient
/// direction type for density-matrix points.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Validates Hermitian deviation (within [`tol::HERMITIAN_DEV`]) and
    /// stores the exactly symmetrized part.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, tol::HERMITIAN_DEV)
    }

    pub fn with_tolerance(mut m: DMatrix<C64>, dev_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if m.is_empty() {
            return Err(Error::InvariantViolation("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvariantViolation(
                "matrix has non-finite entries".into(),
            ));
        }
        let dev = hermitian_deviation(&m);
        if dev > dev_tol {
            return Err(Error::InvariantViolation(format!(
                "Hermitian deviation {dev:.3e} exceeds {dev_tol:.1e}"
            )));
        }
        symmetrize(&mut m);
        Ok(Self { m })
    }

    /// Wraps a matrix that is Hermitian by construction, symmetrizing away
    /// floating-point drift without validating.
    pub(crate) fn from_hermitian_unchecked(mut m: DMatrix<C64>) -> Self {
        symmetrize(&mut m);
        Self { m }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self { m }
    }

    /// Rank-one projector direction `v v^H` (not normalized).
    pub fn outer(v: &DVector<C64>) -> Self {
        let m = v * v.adjoint();
        Self::from_hermitian_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace_re(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `Re tr(self * other)`; the Frobenius pairing of Hermitian matrices.
    pub fn pair_with(&self, other: &DMatrix<C64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.m.nrows() {
            for j in 0..self.m.ncols() {
                // tr(AB) = sum_ij A_ij B_ji; B Hermitian so B_ji = conj(B_ij).
                acc += (self.m[(i, j)] * other[(i, j)].conj()).re;
            }
        }
        acc
    }

    /// Eigendecomposition `m = U diag(w) U^H` with real eigenvalues.
    pub fn eigh(&self) -> Result<(DVector<f64>, DMatrix<C64>)> {
        eigh(&self.m)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: &self.m * C64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            m: &self.m + &other.m * C64::new(factor, 0.0),
        })
    }
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn eigh(m: &DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let dim = m.nrows();
    let se = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_SWEEPS)
        .ok_or(Error::EigensolveFailure { dim })?;
    Ok((se.eigenvalues, se.eigenvectors))
}

/// Rebuilds `U diag(w) U^H` from an eigensystem.
pub(crate) fn from_eigensystem(w: &DVector<f64>, u: &DMatrix<C64>) -> DMatrix<C64> {
    let diag = DMatrix::from_diagonal(&w.map(|x| C64::new(x, 0.0)));
    let mut m = u * diag * u.adjoint();
    symmetrize(&mut m);
    m
}

/// Matrix exponential of a Hermitian matrix through its eigendecomposition.
pub fn matrix_exp(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (w, u) = m.eigh()?;
    let ew = w.map(f64::exp);
    Ok(HermitianMatrix {
        m: from_eigensystem(&ew, &u),
    })
}

/// Matrix logarithm of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues below `clamp` are raised to `clamp` before taking logs, so
/// spectra that underflowed to zero stay representable. Eigenvalues below
/// the PSD validation floor are rejected.
pub fn matrix_log(m: &HermitianMatrix, clamp: f64) -> Result<HermitianMatrix> {
    let (w, u) = m.eigh()?;
    if w.min() < -tol::PSD_FLOOR {
        return Err(Error::Domain(format!(
            "matrix log of non-PSD matrix (min eigenvalue {:.3e})",
            w.min()
        )));
    }
    let lw = w.map(|x| x.max(clamp).ln());
    Ok(HermitianMatrix {
        m: from_eigensystem(&lw, &u),
    })
}

/// A Hermitian positive semidefinite matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermitian deviation, positive semidefiniteness
    /// (`lambda_min >= -`[`tol::PSD_FLOOR`]) and unit trace.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, tol::HERMITIAN_DEV, tol::PSD_FLOOR, tol::TRACE_DEV)
    }

    pub fn with_tolerance(
        m: DMatrix<C64>,
        dev_tol: f64,
        psd_tol: f64,
        trace_tol: f64,
    ) -> Result<Self> {
        let h = HermitianMatrix::with_tolerance(m, dev_tol)?;
        let trace = h.trace_re();
        if (trace - 1.0).abs() > trace_tol {
            return Err(Error::InvariantViolation(format!(
                "trace {trace} deviates from 1 by more than {trace_tol:.1e}"
            )));
        }
        let (w, _) = h.eigh()?;
        if w.min() < -psd_tol {
            return Err(Error::InvariantViolation(format!(
                "negative eigenvalue {:.3e} below the PSD floor",
                w.min()
            )));
        }
        Ok(Self { m: h.m })
    }

    /// Wraps a unit-trace PSD matrix produced by an internal spectral
    /// construction; symmetrizes but skips the eigenvalue scan.
    pub(crate) fn from_psd_unchecked(m: DMatrix<C64>) -> Self {
        Self {
            m: HermitianMatrix::from_hermitian_unchecked(m).m,
        }
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        Self {
            m: DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
        }
    }

    /// Diagonal density matrix from a simplex weight vector.
    pub fn from_simplex_diagonal(p: &crate::geometry::SimplexVector) -> Self {
        let diag: Vec<f64> = p.as_vector().iter().copied().collect();
        Self {
            m: HermitianMatrix::from_real_diagonal(&diag).m,
        }
    }

    /// The pure state `v v^H / <v, v>`.
    pub fn pure(v: &DVector<C64>) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() || norm2 <= 0.0 {
            return Err(Error::Domain("pure state from a zero vector".into()));
        }
        let m = v * v.adjoint() / C64::new(norm2, 0.0);
        Ok(Self::from_psd_unchecked(m))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn as_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix { m: self.m.clone() }
    }

    pub fn eigh(&self) -> Result<(DVector<f64>, DMatrix<C64>)> {
        eigh(&self.m)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.0.min())
    }

    /// The real diagonal, a probability vector for diagonal states.
    pub fn diagonal_re(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), (0..self.dim()).map(|i| self.m[(i, i)].re))
    }

    /// True when the whole spectrum exceeds `floor`.
    pub fn is_interior(&self, floor: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? > floor)
    }
}

impl FeasiblePoint for DensityMatrix {
    type Grad = HermitianMatrix;

    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn pair(grad: &HermitianMatrix, x: &Self) -> f64 {
        grad.pair_with(&x.m)
    }

    fn grad_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        a.pair_with(b.as_matrix())
    }

    fn dist(&self, other: &Self) -> f64 {
        (&self.m - &other.m).norm()
    }

    fn linear_minimizer(grad: &HermitianMatrix) -> Result<Self> {
        let (w, u) = grad.eigh()?;
        let j = w.imin();
        let v = u.column(j).into_owned();
        Self::pure(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, entries: &[(f64, f64)]) -> DMatrix<C64> {
        DMatrix::from_row_slice(
            rows,
            rows,
            &entries
                .iter()
                .map(|&(re, im)| C64::new(re, im))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn matrix_exp_of_zero_is_identity() {
        let e = matrix_exp(&HermitianMatrix::zeros(2)).unwrap();
        assert!((e.as_matrix() - DMatrix::<C64>::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn matrix_log_of_identity_is_zero() {
        let l = matrix_log(&HermitianMatrix::identity(2), 1e-300).unwrap();
        assert!(l.as_matrix().norm() < 1e-14);
    }

    #[test]
    fn matrix_exp_acts_on_the_spectrum() {
        let e = matrix_exp(&HermitianMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap();
        assert!((e.as_matrix()[(0, 0)].re - 1f64.exp()).abs() < 1e-12);
        assert!((e.as_matrix()[(1, 1)].re - 2f64.exp()).abs() < 1e-12);
        assert!(e.as_matrix()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn exp_log_round_trip_on_a_dense_hermitian() {
        let m = HermitianMatrix::new(cm(
            2,
            &[(1.0, 0.0), (0.2, 0.3), (0.2, -0.3), (0.5, 0.0)],
        ))
        .unwrap();
        let back = matrix_log(&matrix_exp(&m).unwrap(), 1e-300).unwrap();
        assert!((back.as_matrix() - m.as_matrix()).norm() < 1e-10);
    }

    #[test]
    fn density_validation_rejects_bad_traces_and_non_psd() {
        assert!(DensityMatrix::new(cm(2, &[(0.9, 0.0), (0.0, 0.0), (0.0, 0.0), (0.3, 0.0)])).is_err());
        assert!(DensityMatrix::new(cm(2, &[(1.2, 0.0), (0.0, 0.0), (0.0, 0.0), (-0.2, 0.0)])).is_err());
        assert!(DensityMatrix::new(cm(2, &[(0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (0.5, 0.0)])).is_ok());
    }

    #[test]
    fn hermitian_validation_rejects_asymmetry() {
        let m = cm(2, &[(1.0, 0.0), (0.5, 0.0), (0.1, 0.0), (1.0, 0.0)]);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn linear_minimizer_is_the_ground_projector() {
        let g = HermitianMatrix::from_real_diagonal(&[3.0, -1.0, 0.5]);
        let s = DensityMatrix::linear_minimizer(&g).unwrap();
        assert!((s.as_matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!((DensityMatrix::pair(&g, &s) - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn pairing_matches_trace_of_product() {
        let a = HermitianMatrix::new(cm(
            2,
            &[(1.0, 0.0), (0.0, 0.4), (0.0, -0.4), (-2.0, 0.0)],
        ))
        .unwrap();
        let rho = DensityMatrix::new(cm(
            2,
            &[(0.7, 0.0), (0.1, 0.2), (0.1, -0.2), (0.3, 0.0)],
        ))
        .unwrap();
        let prod = a.as_matrix() * rho.as_matrix();
        let tr: C64 = (0..2).map(|i| prod[(i, i)]).sum();
        assert!((DensityMatrix::pair(&a, &rho) - tr.re).abs() < 1e-14);
        assert!(tr.im.abs() < 1e-14);
    }
}
