//! Dense complex matrix substrate: tensor products, Hermitian matrix
//! exponentials, and the norms the rest of the crate is checked against.
//!
//! Everything here is desk scale. Operators live on at most [`MAX_SITES`]
//! spin-1/2 sites, so dense storage and an eigendecomposition-based
//! exponential are the right tools: for Hermitian input the factorization
//! `h = V diag(λ) V†` has unitary `V`, and `exp(iβh) = V diag(e^{iβλ}) V†`
//! is unitary to machine precision for every real `β`. Scaling-and-squaring
//! would be faster at large dimension but gives up that exactness.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Largest spin register dense operations accept.
pub const MAX_SITES: usize = 12;

/// Largest matrix dimension (`2^MAX_SITES`) dense operations will produce.
pub const MAX_DIM: usize = 1 << MAX_SITES;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn check_dim(dim: usize, what: &str) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::SizeLimit(format!(
            "{what} has dimension {dim}, above the {MAX_DIM} cap ({MAX_SITES} sites)"
        )));
    }
    Ok(())
}

/// Tensor (Kronecker) product `a ⊗ b`.
///
/// Fails with a size-limit error if the result would exceed [`MAX_DIM`]
/// in either direction.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_DIM && c <= MAX_DIM => Ok(a.kronecker(b)),
        _ => Err(Error::SizeLimit(format!(
            "kron of {}x{} with {}x{} exceeds the {MAX_DIM} dimension cap",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        ))),
    }
}

/// Largest entrywise deviation of `m` from its own adjoint.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(iβ h)` for Hermitian `h`, via eigendecomposition.
///
/// The input must be Hermitian within [`HERMITICITY_TOL`] entrywise; this
/// operation never symmetrizes on the caller's behalf.
pub fn hermitian_evolve(h: &CMatrix, beta: f64) -> Result<CMatrix> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "hermitian_evolve needs a nonempty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    check_dim(h.nrows(), "hermitian_evolve input")?;
    let defect = hermiticity_defect(h);
    if defect > HERMITICITY_TOL {
        return Err(Error::ContractViolation(format!(
            "hermitian_evolve requires a Hermitian matrix; max |h - h†| = {defect:.3e}"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidArgument("beta must be finite".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let phases = eig
        .eigenvalues
        .map(|lambda| Complex64::from_polar(1.0, beta * lambda));
    let u = &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
    debug_assert!(u.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    Ok(u)
}

/// Frobenius distance `‖a − b‖_F`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// Frobenius distance of `m` from the identity of its own dimension.
pub fn unitary_defect(m: &CMatrix) -> f64 {
    let id = CMatrix::identity(m.nrows(), m.ncols());
    (m * m.adjoint() - id).norm()
}
