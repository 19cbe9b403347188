//! Mirror maps over the simplex and the density-matrix set: Bregman
//! divergences and closed-form proximal updates.
//!
//! The entropy updates are computed in the log domain with a max shift
//! before exponentiating, so large step sizes probed by a line search do
//! not overflow. The inverse-map (log-barrier) update needs a scalar shift
//! solved by bisection to restore unit sum / unit trace.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::density::{check_dims, eigh, from_eigensystem, C64};
use crate::geometry::{
    euclidean_simplex_projection, matrix_log, tol, DensityMatrix, HermitianMatrix, MirrorMap,
    SimplexVector,
};

/// The supported mirror-map generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorKind {
    /// `h(x) = ||x||^2 / 2`; the update is a Euclidean projection.
    Euclidean,
    /// Negative Shannon entropy on the simplex; multiplicative update.
    Shannon,
    /// Negative von Neumann entropy on density matrices; the matrix
    /// analogue of the multiplicative update.
    VonNeumann,
    /// Log-barrier generator `-sum log`; inverse-map update with a
    /// normalization shift.
    Burg,
}

impl MirrorKind {
    pub fn name(self) -> &'static str {
        match self {
            MirrorKind::Euclidean => "euclidean",
            MirrorKind::Shannon => "shannon",
            MirrorKind::VonNeumann => "vonneumann",
            MirrorKind::Burg => "burg",
        }
    }
}

impl std::fmt::Display for MirrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Solves `sum_i 1/(b_i + shift) = 1` for the unique `shift > -min(b)`.
///
/// The left side is strictly decreasing in the shift, diverges at the lower
/// endpoint and vanishes at infinity, so the root exists and bisection is
/// safe. The root always satisfies `min(b) + shift >= 1`, which keeps every
/// output coordinate in `(0, 1]`.
fn normalization_shift(b: &[f64]) -> Result<f64> {
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalOverflow("inverse-map update"));
    }
    let floor = -b.iter().cloned().fold(f64::INFINITY, f64::min);
    let residual = |shift: f64| -> f64 { b.iter().map(|&bi| 1.0 / (bi + shift)).sum::<f64>() - 1.0 };

    // Expand upward from the pole until the sum drops below one.
    let mut step = 1.0f64.max(floor.abs());
    let mut hi = floor + step;
    let mut expansions = 0;
    while residual(hi) > 0.0 {
        step *= 2.0;
        hi = floor + step;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::NormalizationFailure(
                "upper bracket expansion exhausted".into(),
            ));
        }
    }
    let mut lo = floor;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..tol::NORMALIZATION_MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= tol::NORMALIZATION_RESIDUAL {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!(
            "step size {alpha} must be finite and nonnegative"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Simplex maps
// ---------------------------------------------------------------------------

/// A mirror map over the probability simplex.
#[derive(Debug, Clone, Copy)]
pub struct SimplexMirror {
    kind: MirrorKind,
}

impl SimplexMirror {
    pub fn new(kind: MirrorKind) -> Result<Self> {
        match kind {
            MirrorKind::VonNeumann => Err(Error::Domain(
                "the von Neumann map works on density matrices; use shannon on the simplex".into(),
            )),
            _ => Ok(Self { kind }),
        }
    }

    pub fn euclidean() -> Self {
        Self {
            kind: MirrorKind::Euclidean,
        }
    }

    pub fn shannon() -> Self {
        Self {
            kind: MirrorKind::Shannon,
        }
    }

    pub fn burg() -> Self {
        Self {
            kind: MirrorKind::Burg,
        }
    }

    fn require_interior(x: &SimplexVector) -> Result<()> {
        if x.min_entry() <= 0.0 {
            return Err(Error::Domain(
                "point on the simplex boundary; the map needs strictly positive entries".into(),
            ));
        }
        Ok(())
    }
}

impl MirrorMap for SimplexMirror {
    type Point = SimplexVector;

    fn kind(&self) -> MirrorKind {
        self.kind
    }

    fn bregman(&self, z2: &SimplexVector, z1: &SimplexVector) -> Result<f64> {
        check_dims(z1.len(), z2.len())?;
        let (a, b) = (z2.as_vector(), z1.as_vector());
        match self.kind {
            MirrorKind::Euclidean => Ok(0.5 * (a - b).norm_squared()),
            MirrorKind::Shannon => {
                Self::require_interior(z1)?;
                // KL divergence with the 0 log 0 := 0 convention.
                let mut acc = 0.0;
                for (&p, &q) in a.iter().zip(b.iter()) {
                    if p > 0.0 {
                        acc += p * (p / q).ln();
                    }
                }
                Ok(acc)
            }
            MirrorKind::Burg => {
                Self::require_interior(z1)?;
                Self::require_interior(z2)?;
                let mut acc = 0.0;
                for (&p, &q) in a.iter().zip(b.iter()) {
                    let r = p / q;
                    acc += r - r.ln() - 1.0;
                }
                Ok(acc)
            }
            MirrorKind::VonNeumann => unreachable!("rejected at construction"),
        }
    }

    fn update(&self, x: &SimplexVector, grad: &DVector<f64>, alpha: f64) -> Result<SimplexVector> {
        check_dims(x.len(), grad.len())?;
        check_alpha(alpha)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NumericalOverflow("simplex update gradient"));
        }
        if alpha == 0.0 {
            return Ok(x.clone());
        }
        match self.kind {
            MirrorKind::Euclidean => euclidean_simplex_projection(&(x.as_vector() - grad * alpha)),
            MirrorKind::Shannon => {
                // Multiplicative update in the log domain; ln(0) = -inf keeps
                // boundary coordinates pinned at zero.
                let logits: Vec<f64> = x
                    .as_vector()
                    .iter()
                    .zip(grad.iter())
                    .map(|(&xi, &gi)| xi.ln() - alpha * gi)
                    .collect();
                let shift = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !shift.is_finite() {
                    return Err(Error::NumericalOverflow("multiplicative update"));
                }
                let w = DVector::from_iterator(x.len(), logits.iter().map(|&l| (l - shift).exp()));
                SimplexVector::from_unnormalized(w)
            }
            MirrorKind::Burg => {
                Self::require_interior(x)?;
                let b: Vec<f64> = x
                    .as_vector()
                    .iter()
                    .zip(grad.iter())
                    .map(|(&xi, &gi)| 1.0 / xi + alpha * gi)
                    .collect();
                let shift = normalization_shift(&b)?;
                let w = DVector::from_iterator(x.len(), b.iter().map(|&bi| 1.0 / (bi + shift)));
                SimplexVector::from_unnormalized(w)
            }
            MirrorKind::VonNeumann => unreachable!("rejected at construction"),
        }
    }

    fn grad_h(&self, x: &SimplexVector) -> Result<DVector<f64>> {
        match self.kind {
            MirrorKind::Euclidean => Ok(x.as_vector().clone()),
            MirrorKind::Shannon => {
                Self::require_interior(x)?;
                Ok(x.as_vector().map(|xi| xi.ln() + 1.0))
            }
            MirrorKind::Burg => {
                Self::require_interior(x)?;
                Ok(x.as_vector().map(|xi| -1.0 / xi))
            }
            MirrorKind::VonNeumann => unreachable!("rejected at construction"),
        }
    }
}

// ---------------------------------------------------------------------------
// Density-matrix maps
// ---------------------------------------------------------------------------

/// A mirror map over the set of density matrices.
#[derive(Debug, Clone, Copy)]
pub struct DensityMirror {
    kind: MirrorKind,
    log_clamp: f64,
}

impl DensityMirror {
    pub fn new(kind: MirrorKind) -> Result<Self> {
        match kind {
            MirrorKind::Shannon => Err(Error::Domain(
                "the Shannon map works on the simplex; use vonneumann on density matrices".into(),
            )),
            _ => Ok(Self {
                kind,
                log_clamp: tol::LOG_CLAMP,
            }),
        }
    }

    pub fn euclidean() -> Self {
        Self {
            kind: MirrorKind::Euclidean,
            log_clamp: tol::LOG_CLAMP,
        }
    }

    pub fn von_neumann() -> Self {
        Self {
            kind: MirrorKind::VonNeumann,
            log_clamp: tol::LOG_CLAMP,
        }
    }

    pub fn burg() -> Self {
        Self {
            kind: MirrorKind::Burg,
            log_clamp: tol::LOG_CLAMP,
        }
    }

    /// Overrides the eigenvalue clamp used before matrix logarithms.
    pub fn with_log_clamp(mut self, clamp: f64) -> Self {
        self.log_clamp = clamp;
        self
    }

    fn spectrum_interior(w: &DVector<f64>) -> Result<()> {
        if w.min() <= 0.0 {
            return Err(Error::Domain(format!(
                "density matrix is not positive definite (min eigenvalue {:.3e})",
                w.min()
            )));
        }
        Ok(())
    }
}

impl MirrorMap for DensityMirror {
    type Point = DensityMatrix;

    fn kind(&self) -> MirrorKind {
        self.kind
    }

    fn bregman(&self, z2: &DensityMatrix, z1: &DensityMatrix) -> Result<f64> {
        check_dims(z1.dim(), z2.dim())?;
        match self.kind {
            MirrorKind::Euclidean => Ok(0.5 * (z2.as_matrix() - z1.as_matrix()).norm_squared()),
            MirrorKind::VonNeumann => {
                let (w1, _) = z1.eigh()?;
                Self::spectrum_interior(&w1)?;
                let (w2, _) = z2.eigh()?;
                if w2.min() < -tol::PSD_FLOOR {
                    return Err(Error::Domain("first argument is not PSD".into()));
                }
                // tr(z2 log z2) on the spectrum, with 0 log 0 := 0.
                let entropy_term: f64 = w2
                    .iter()
                    .map(|&l| if l > 0.0 { l * l.ln() } else { 0.0 })
                    .sum();
                let log_z1 = matrix_log(&z1.as_hermitian(), self.log_clamp)?;
                let cross = log_z1.pair_with(z2.as_matrix());
                Ok(entropy_term - cross)
            }
            MirrorKind::Burg => {
                let (w1, u1) = z1.eigh()?;
                Self::spectrum_interior(&w1)?;
                let (w2, _) = z2.eigh()?;
                Self::spectrum_interior(&w2)?;
                let inv_z1 = from_eigensystem(&w1.map(|l| 1.0 / l), &u1);
                let cross =
                    HermitianMatrix::new(inv_z1)?.pair_with(z2.as_matrix());
                let logdet1: f64 = w1.iter().map(|l| l.ln()).sum();
                let logdet2: f64 = w2.iter().map(|l| l.ln()).sum();
                Ok(cross - z1.dim() as f64 - logdet2 + logdet1)
            }
            MirrorKind::Shannon => unreachable!("rejected at construction"),
        }
    }

    fn update(
        &self,
        x: &DensityMatrix,
        grad: &HermitianMatrix,
        alpha: f64,
    ) -> Result<DensityMatrix> {
        check_dims(x.dim(), grad.dim())?;
        check_alpha(alpha)?;
        if alpha == 0.0 {
            return Ok(x.clone());
        }
        match self.kind {
            MirrorKind::Euclidean => {
                let shifted = x.as_matrix() - grad.as_matrix() * C64::new(alpha, 0.0);
                let (w, u) = eigh(&shifted)?;
                let projected = euclidean_simplex_projection(&w)?;
                Ok(DensityMatrix::from_psd_unchecked(from_eigensystem(
                    projected.as_vector(),
                    &u,
                )))
            }
            MirrorKind::VonNeumann => {
                let log_x = matrix_log(&x.as_hermitian(), self.log_clamp)?;
                let exponent = log_x.as_matrix() - grad.as_matrix() * C64::new(alpha, 0.0);
                let (w, u) = eigh(&exponent)?;
                let shift = w.max();
                if !shift.is_finite() {
                    return Err(Error::NumericalOverflow("matrix multiplicative update"));
                }
                let scaled = w.map(|l| (l - shift).exp());
                let trace: f64 = scaled.iter().sum();
                // trace >= 1 because the shifted maximum exponentiates to 1.
                let normalized = scaled.map(|l| l / trace);
                Ok(DensityMatrix::from_psd_unchecked(from_eigensystem(
                    &normalized,
                    &u,
                )))
            }
            MirrorKind::Burg => {
                let (wx, ux) = x.eigh()?;
                Self::spectrum_interior(&wx)?;
                let inv_x = from_eigensystem(&wx.map(|l| 1.0 / l), &ux);
                let b_mat = inv_x + grad.as_matrix() * C64::new(alpha, 0.0);
                let (b, u) = eigh(&b_mat)?;
                let shift = normalization_shift(b.as_slice())?;
                let w = b.map(|bi| 1.0 / (bi + shift));
                let trace: f64 = w.iter().sum();
                let normalized = w.map(|l| l / trace);
                Ok(DensityMatrix::from_psd_unchecked(from_eigensystem(
                    &normalized,
                    &u,
                )))
            }
            MirrorKind::Shannon => unreachable!("rejected at construction"),
        }
    }

    fn grad_h(&self, x: &DensityMatrix) -> Result<HermitianMatrix> {
        match self.kind {
            MirrorKind::Euclidean => Ok(x.as_hermitian()),
            MirrorKind::VonNeumann => {
                let (w, u) = x.eigh()?;
                Self::spectrum_interior(&w)?;
                let lw = w.map(|l| l.ln() + 1.0);
                HermitianMatrix::new(from_eigensystem(&lw, &u))
            }
            MirrorKind::Burg => {
                let (w, u) = x.eigh()?;
                Self::spectrum_interior(&w)?;
                let iw = w.map(|l| -1.0 / l);
                HermitianMatrix::new(from_eigensystem(&iw, &u))
            }
            MirrorKind::Shannon => unreachable!("rejected at construction"),
        }
    }
}
