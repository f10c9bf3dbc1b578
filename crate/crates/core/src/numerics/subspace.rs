use super::{ensure_finite, orthonormality_defect, Tolerance};
use crate::{Error, Matrix, Result};

/// Orthonormal basis of a subspace of `ℝⁿ`, stored as the columns of an
/// `n × k` matrix. `k = 0` is the trivial subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: Matrix,
}

impl SubspaceBasis {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Result<Self> {
        ensure_finite(&basis, "subspace basis")?;
        if basis.ncols() > basis.nrows() {
            return Err(Error::dim(format!(
                "basis has {} columns in ambient dimension {}",
                basis.ncols(),
                basis.nrows()
            )));
        }
        let defect = orthonormality_defect(&basis);
        if defect > 1e-10 {
            return Err(Error::consistency(format!(
                "basis columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(SubspaceBasis { basis })
    }

    pub(crate) fn from_columns_unchecked(basis: Matrix) -> Self {
        SubspaceBasis { basis }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        SubspaceBasis {
            basis: Matrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_matrix(self) -> Matrix {
        self.basis
    }

    /// Orthogonal projector `B Bᵀ`.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Norm of the component of `v`'s columns outside this subspace.
    pub fn residual_of(&self, v: &Matrix) -> f64 {
        let r = v - self.projector() * v;
        r.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }
}

/// Orthonormal basis of `{x : Mx = 0}`.
pub fn kernel_basis(m: &Matrix, tol: &Tolerance) -> Result<SubspaceBasis> {
    kernel_with_scale(m, tol, 0.0)
}

/// Kernel with the rank cutoff taken relative to `max(σ_max, scale)`, for
/// matrices whose natural size is known (so roundoff is not mistaken for rank).
fn kernel_with_scale(m: &Matrix, tol: &Tolerance, scale: f64) -> Result<SubspaceBasis> {
    ensure_finite(m, "kernel_basis input")?;
    let n = m.ncols();
    if n == 0 {
        return Ok(SubspaceBasis::empty(0));
    }
    if m.nrows() == 0 {
        return Ok(SubspaceBasis::full(n));
    }
    // Thin SVD only yields a full V when there are at least n rows.
    let padded = if m.nrows() < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = super::checked_svd(&padded);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return Ok(SubspaceBasis::full(n));
    }
    let cutoff = tol.rank_tol * sigma_max.max(scale);
    let cols: Vec<_> = (0..n)
        .filter(|&k| sigma[k] <= cutoff)
        .map(|k| v_t.row(k).transpose())
        .collect();
    if cols.is_empty() {
        return Ok(SubspaceBasis::empty(n));
    }
    Ok(SubspaceBasis::from_columns_unchecked(Matrix::from_columns(&cols)))
}

/// Orthonormal basis of the column space of `M`.
pub fn image_basis(m: &Matrix, tol: &Tolerance) -> Result<SubspaceBasis> {
    ensure_finite(m, "image_basis input")?;
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return Ok(SubspaceBasis::empty(rows));
    }
    let svd = super::checked_svd(m);
    let u = svd.u.as_ref().expect("requested U");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return Ok(SubspaceBasis::empty(rows));
    }
    let cutoff = tol.rank_tol * sigma_max;
    let cols: Vec<_> = (0..sigma.len())
        .filter(|&k| sigma[k] > cutoff)
        .map(|k| u.column(k).into_owned())
        .collect();
    Ok(SubspaceBasis::from_columns_unchecked(Matrix::from_columns(&cols)))
}

/// Orthogonal complement of `U` in its ambient space.
pub fn complement(u: &SubspaceBasis, tol: &Tolerance) -> Result<SubspaceBasis> {
    if u.is_empty() {
        return Ok(SubspaceBasis::full(u.ambient_dim()));
    }
    kernel_with_scale(&u.basis().transpose(), tol, 1.0)
}

/// Orthonormal basis of `im(U) ∩ im(V)`, computed as the kernel of
/// `[I − UUᵀ; I − VVᵀ]`.
pub fn subspace_intersection(u: &SubspaceBasis, v: &SubspaceBasis, tol: &Tolerance) -> Result<SubspaceBasis> {
    let n = u.ambient_dim();
    if v.ambient_dim() != n {
        return Err(Error::dim(format!(
            "intersecting subspaces of R^{n} and R^{}",
            v.ambient_dim()
        )));
    }
    if u.is_empty() || v.is_empty() {
        return Ok(SubspaceBasis::empty(n));
    }
    let eye = Matrix::identity(n, n);
    let mut stacked = Matrix::zeros(2 * n, n);
    stacked
        .view_mut((0, 0), (n, n))
        .copy_from(&(&eye - u.projector()));
    stacked
        .view_mut((n, 0), (n, n))
        .copy_from(&(&eye - v.projector()));
    kernel_with_scale(&stacked, tol, 1.0)
}

/// Distance between two subspaces: `‖P_U − P_V‖₂` (the sine of the largest
/// principal angle when the dimensions agree, 1 otherwise).
pub fn subspace_distance(u: &SubspaceBasis, v: &SubspaceBasis) -> f64 {
    if u.ambient_dim() != v.ambient_dim() {
        return f64::INFINITY;
    }
    if u.dim() != v.dim() {
        return 1.0;
    }
    if u.ambient_dim() == 0 {
        return 0.0;
    }
    super::spectral_norm(&(u.projector() - v.projector()))
}
