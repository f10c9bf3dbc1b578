//! Observer-gain placement through Riccati equations.
//!
//! Continuous case: the filter CARE of the pair shifted by `-target` is solved
//! with the matrix sign function of its Hamiltonian; its stabilising solution
//! pushes every closed-loop eigenvalue left of the target.
//!
//! Discrete case: the filter DARE of the pair scaled by `1 / (margin·target)`
//! is solved with the structure-preserving doubling algorithm; the scaled
//! closed loop is Schur, so the true one has radius below `margin·target`.

use super::{ensure_finite, ensure_square, spectral::eigenvalues, Tolerance};
use crate::{Error, Matrix, Result};

/// The discrete placement aims at `DISCRETE_MARGIN × target_radius`, leaving
/// strict slack for the certificate's Lyapunov inequality.
pub const DISCRETE_MARGIN: f64 = 0.995;

const SIGN_MAX_ITER: usize = 100;
const SDA_MAX_ITER: usize = 80;
const NEWTON_MAX_ITER: usize = 50;

fn norm1(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix sign function by the scaled Newton iteration.
fn matrix_sign(z: &Matrix) -> Option<Matrix> {
    let n = z.nrows();
    let mut z = z.clone();
    let mut scale = true;
    for _ in 0..SIGN_MAX_ITER {
        let lu = z.clone().lu();
        let det = lu.determinant();
        let inv = lu.try_inverse()?;
        let c = if scale && det.is_finite() && det != 0.0 {
            det.abs().powf(-1.0 / n as f64)
        } else {
            1.0
        };
        let next = (&z * c + inv / c) * 0.5;
        if !next.iter().all(|v| v.is_finite()) {
            return None;
        }
        let change = norm1(&(&next - &z)) / norm1(&next);
        z = next;
        if change < 1e-2 {
            scale = false;
        }
        if change < 1e-13 {
            return Some(z);
        }
    }
    // Accept a slow tail; the spectral post-check is authoritative.
    Some(z)
}

/// Stabilising solution of `F X + X Fᵀ − X Hᵀ H X + I = 0`.
fn filter_care(f: &Matrix, h: &Matrix) -> Option<Matrix> {
    let n = f.nrows();
    let mut ham = Matrix::zeros(2 * n, 2 * n);
    ham.view_mut((0, 0), (n, n)).copy_from(&f.transpose());
    ham.view_mut((0, n), (n, n)).copy_from(&-(h.transpose() * h));
    ham.view_mut((n, 0), (n, n)).copy_from(&-Matrix::identity(n, n));
    ham.view_mut((n, n), (n, n)).copy_from(&-f);
    let s = matrix_sign(&ham)?;
    let eye = Matrix::identity(n, n);
    // The stable subspace is ker(S + I) = im [I; X].
    let mut lhs = Matrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&s.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n))
        .copy_from(&(s.view((n, n), (n, n)) + &eye));
    let mut rhs = Matrix::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n))
        .copy_from(&-(s.view((0, 0), (n, n)) + &eye));
    rhs.view_mut((n, 0), (n, n)).copy_from(&-s.view((n, 0), (n, n)));
    let x = super::checked_svd(&lhs).solve(&rhs, 1e-14).ok()?;
    let x = (&x + x.transpose()) * 0.5;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Solves `F X + X Fᵀ + Q = 0` through the Kronecker form.
fn continuous_lyapunov(f: &Matrix, q: &Matrix) -> Option<Matrix> {
    let n = f.nrows();
    let eye = Matrix::identity(n, n);
    let op = eye.kronecker(f) + f.kronecker(&eye);
    let rhs = -nalgebra::DVector::from_column_slice(q.as_slice());
    let x = op.lu().solve(&rhs)?;
    let x = Matrix::from_column_slice(n, n, x.as_slice());
    let x = (&x + x.transpose()) * 0.5;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn is_hurwitz(m: &Matrix) -> bool {
    eigenvalues(m).is_ok_and(|e| e.iter().all(|z| z.re < 0.0))
}

fn care_residual(f: &Matrix, g: &Matrix, x: &Matrix) -> f64 {
    let n = f.nrows();
    let r = f * x + x * f.transpose() - x * g * x + Matrix::identity(n, n);
    super::max_abs(&r) / super::max_abs(x).max(1.0)
}

/// Stabilising start for Newton's method (Bass): with `β` beyond the spectrum
/// of `F`, `X = Z⁻¹` for `(F + βI)ᵀZ + Z(F + βI) = 2 HᵀH`.
fn bass_start(f: &Matrix, g: &Matrix) -> Option<Matrix> {
    let n = f.nrows();
    let beta = norm1(f).max(1.0);
    let shifted = (f + Matrix::identity(n, n) * beta).transpose();
    let z = continuous_lyapunov(&shifted, &(g * -2.0))?;
    let x = z.try_inverse()?;
    let x = (&x + x.transpose()) * 0.5;
    is_hurwitz(&(f - &x * g)).then_some(x)
}

/// Newton–Kleinman refinement of a stabilising CARE iterate; keeps the best
/// iterate by residual.
fn newton_kleinman(f: &Matrix, g: &Matrix, x0: Matrix) -> Matrix {
    let n = f.nrows();
    let mut best_res = care_residual(f, g, &x0);
    let mut best = x0.clone();
    let mut x = x0;
    for _ in 0..NEWTON_MAX_ITER {
        let fc = f - &x * g;
        if !is_hurwitz(&fc) {
            break;
        }
        let q = Matrix::identity(n, n) + &x * g * &x;
        let Some(next) = continuous_lyapunov(&fc, &q) else {
            break;
        };
        let change = super::max_abs(&(&next - &x)) / super::max_abs(&next).max(1.0);
        x = next;
        let res = care_residual(f, g, &x);
        if res < best_res && is_hurwitz(&(f - &x * g)) {
            best_res = res;
            best = x.clone();
        }
        if change < 1e-14 {
            break;
        }
    }
    best
}

/// Returns `L` with `spectral_abscissa(F − L H) ≤ target + spec_tol`.
pub fn place_continuous(f: &Matrix, h: &Matrix, target: f64, tol: &Tolerance) -> Result<Matrix> {
    let n = ensure_square(f)?;
    ensure_finite(f, "place_continuous F")?;
    ensure_finite(h, "place_continuous H")?;
    if h.ncols() != n {
        return Err(Error::dim(format!(
            "output matrix has {} columns, state has {n}",
            h.ncols()
        )));
    }
    if !target.is_finite() {
        return Err(Error::invalid("continuous target must be finite"));
    }
    let m = h.nrows();
    if n == 0 {
        return Ok(Matrix::zeros(0, m));
    }
    let shifted = f - Matrix::identity(n, n) * target;
    let g = h.transpose() * h;
    let start = filter_care(&shifted, h)
        .filter(|x| is_hurwitz(&(&shifted - x * &g)))
        .or_else(|| bass_start(&shifted, &g));
    let gain = start
        .map(|x| newton_kleinman(&shifted, &g, x) * h.transpose())
        .unwrap_or_else(|| Matrix::zeros(n, m));
    check_continuous(f, h, &gain, target, tol)?;
    Ok(gain)
}

fn check_continuous(f: &Matrix, h: &Matrix, l: &Matrix, target: f64, tol: &Tolerance) -> Result<()> {
    let eigs = eigenvalues(&(f - l * h))?;
    let worst = eigs
        .into_iter()
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .expect("n > 0");
    if worst.re <= target + tol.spec_tol {
        Ok(())
    } else {
        Err(Error::Placement {
            eigenvalue: worst,
            target,
        })
    }
}

/// Stabilising solution of the filter DARE
/// `X = E X Eᵀ − E X Cᵀ (I + C X Cᵀ)⁻¹ C X Eᵀ + I`, by doubling.
fn filter_dare(e: &Matrix, c: &Matrix) -> Option<Matrix> {
    let n = e.nrows();
    let eye = Matrix::identity(n, n);
    let mut a = e.transpose();
    let mut g = c.transpose() * c;
    let mut h = eye.clone();
    for _ in 0..SDA_MAX_ITER {
        let w = (&eye + &g * &h).lu();
        let w_a = w.solve(&a)?;
        let w_g = w.solve(&g)?;
        let a_next = &a * &w_a;
        let g_next = &g + &a * w_g * a.transpose();
        let h_next = &h + a.transpose() * &h * &w_a;
        let change = norm1(&(&h_next - &h)) / norm1(&h_next).max(1.0);
        a = a_next;
        g = (&g_next + g_next.transpose()) * 0.5;
        h = (&h_next + h_next.transpose()) * 0.5;
        if !h.iter().all(|v| v.is_finite()) {
            return None;
        }
        if change < 1e-15 {
            break;
        }
    }
    Some(h)
}

/// Returns `N̄` with `spectral_radius(E − N̄ C̄) ≤ target + spec_tol`.
///
/// `C̄` must have full column rank. A zero target yields the deadbeat gain
/// `E (C̄ᵀC̄)⁻¹ C̄ᵀ`.
pub fn place_discrete(e: &Matrix, cbar: &Matrix, target: f64, tol: &Tolerance) -> Result<Matrix> {
    let n = ensure_square(e)?;
    ensure_finite(e, "place_discrete E")?;
    ensure_finite(cbar, "place_discrete C")?;
    if cbar.ncols() != n {
        return Err(Error::dim(format!(
            "output matrix has {} columns, state has {n}",
            cbar.ncols()
        )));
    }
    if !(0.0..1.0).contains(&target) {
        return Err(Error::invalid(format!(
            "discrete target radius {target} outside [0, 1)"
        )));
    }
    let q = cbar.nrows();
    if n == 0 {
        return Ok(Matrix::zeros(0, q));
    }
    let sigma = if q == 0 {
        nalgebra::DVector::zeros(0)
    } else {
        super::checked_svd(cbar).singular_values
    };
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let rank = sigma
        .iter()
        .filter(|&&s| s > tol.rank_tol * smax.max(1.0))
        .count();
    if rank < n {
        return Err(Error::consistency(format!(
            "consensus output matrix has rank {rank} < {n} columns"
        )));
    }

    let nbar = if target == 0.0 {
        let ctc = cbar.transpose() * cbar;
        let left_inv = ctc
            .lu()
            .solve(&cbar.transpose())
            .ok_or_else(|| Error::consistency("C̄ᵀC̄ is singular"))?;
        e * left_inv
    } else {
        let r = DISCRETE_MARGIN * target;
        let scaled = e / r;
        let x = filter_dare(&scaled, cbar)
            .ok_or_else(|| Error::consistency("discrete Riccati iteration broke down"))?;
        let inner = Matrix::identity(q, q) + cbar * &x * cbar.transpose();
        // N̄ₛ = Eₛ X C̄ᵀ (I + C̄ X C̄ᵀ)⁻¹, computed through the symmetric solve.
        let k = inner
            .lu()
            .solve(&(cbar * &x * scaled.transpose()))
            .ok_or_else(|| Error::consistency("innovation covariance is singular"))?;
        k.transpose() * r
    };

    let closed = e - &nbar * cbar;
    let eigs = eigenvalues(&closed)?;
    let worst = eigs
        .into_iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("n > 0");
    if worst.norm() > target + tol.spec_tol {
        return Err(Error::Placement {
            eigenvalue: worst,
            target,
        });
    }
    Ok(nbar)
}
