use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{ensure_finite, ensure_square};
use crate::{Error, Matrix, Result};

const SCHUR_MAX_ITER: usize = 100_000;

/// All eigenvalues of a square matrix, via the real Schur form.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = ensure_square(m)?;
    ensure_finite(m, "eigenvalue input")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::Eigensolver)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Largest real part of the spectrum; `-∞` for an empty matrix.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue modulus; 0 for an empty matrix.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    super::checked_svd(m)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}
