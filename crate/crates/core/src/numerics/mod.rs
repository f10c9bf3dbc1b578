//! Dense linear-algebra primitives: subspace bases, matrix exponential,
//! spectral measures, Riccati-based eigenvalue placement and a discrete
//! Lyapunov solver.
//!
//! Everything here is a pure function on small dense matrices.

mod expm;
mod lyapunov;
mod riccati;
mod spectral;
mod subspace;

pub use expm::{matrix_exponential, zoh_discretize};
pub use lyapunov::solve_discrete_lyapunov;
pub use riccati::{place_continuous, place_discrete, DISCRETE_MARGIN};
pub use spectral::{eigenvalues, spectral_abscissa, spectral_norm, spectral_radius};
pub use subspace::{
    complement, image_basis, kernel_basis, subspace_distance, subspace_intersection, SubspaceBasis,
};

use nalgebra::{Dyn, SVD};

use crate::{Error, Matrix, Result};

/// Numerical thresholds shared by the rank and spectral decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Singular values at or below `rank_tol * sigma_max` count as zero.
    pub rank_tol: f64,
    /// Slack allowed on spectral targets (abscissa, radius).
    pub spec_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_tol: 1e-9,
            spec_tol: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, spec_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && spec_tol > 0.0) || !rank_tol.is_finite() || !spec_tol.is_finite() {
            return Err(Error::invalid("tolerances must be finite and strictly positive"));
        }
        Ok(Tolerance { rank_tol, spec_tol })
    }
}

pub(crate) fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_square(m: &Matrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Thin SVD in nalgebra's layout, computed with faer. nalgebra's own SVD
/// can stop on an inaccurate factorisation of rank-deficient input, which
/// corrupts every rank decision downstream; it remains only as a fallback.
pub(crate) fn checked_svd(m: &Matrix) -> SVD<f64, Dyn, Dyn> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return SVD {
            u: Some(Matrix::zeros(rows, 0)),
            v_t: Some(Matrix::zeros(0, cols)),
            singular_values: nalgebra::DVector::zeros(0),
        };
    }
    let f = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    match f.thin_svd() {
        Ok(svd) => {
            let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
            SVD {
                u: Some(Matrix::from_fn(rows, k, |i, j| u[(i, j)])),
                v_t: Some(Matrix::from_fn(k, cols, |i, j| v[(j, i)])),
                singular_values: nalgebra::DVector::from_fn(k, |i, _| s[i]),
            }
        }
        Err(_) => SVD::new(m.clone(), true, true),
    }
}

/// Largest absolute entry, 0 for empty matrices.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `‖BᵀB − I‖` in the max-entry norm.
pub fn orthonormality_defect(b: &Matrix) -> f64 {
    let k = b.ncols();
    max_abs(&(b.transpose() * b - Matrix::identity(k, k)))
}

/// Stacks matrices vertically; all inputs must share the column count `cols`.
pub fn vstack(blocks: &[&Matrix], cols: usize) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Concatenates matrices horizontally; all inputs must share `rows`.
pub fn hstack(blocks: &[&Matrix], rows: usize) -> Matrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}
