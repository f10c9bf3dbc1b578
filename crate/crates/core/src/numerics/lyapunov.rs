use super::{ensure_finite, ensure_square, max_abs, spectral_radius};
use crate::{Error, Matrix, Result};

const SMITH_MAX_ITER: usize = 100;

/// Solves `Mᵀ P M − s² P = −I` for symmetric positive definite `P`.
///
/// Requires `spectral_radius(M) < s`. Uses squared Smith iteration on
/// `A = M / s`, i.e. `P = s⁻² Σₖ (Aᵀ)ᵏ Aᵏ` summed by doubling.
pub fn solve_discrete_lyapunov(mono: &Matrix, s: f64) -> Result<Matrix> {
    let n = ensure_square(mono)?;
    ensure_finite(mono, "discrete Lyapunov input")?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("contraction bound {s} must be positive")));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let radius = spectral_radius(mono)?;
    if radius >= s {
        return Err(Error::LyapunovInfeasible { radius, bound: s });
    }

    let mut a = mono / s;
    let mut p = Matrix::identity(n, n);
    for _ in 0..SMITH_MAX_ITER {
        let increment = a.transpose() * &p * &a;
        let inc_size = max_abs(&increment);
        p += &increment;
        a = &a * &a;
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::consistency("Smith iteration overflowed"));
        }
        if inc_size <= f64::EPSILON * 1e-2 * max_abs(&p) || max_abs(&a) == 0.0 {
            break;
        }
    }
    let mut p = p / (s * s);
    p = (&p + p.transpose()) * 0.5;

    let residual = mono.transpose() * &p * mono - &p * (s * s) + Matrix::identity(n, n);
    let scale = max_abs(&p).max(1.0);
    if max_abs(&residual) > 1e-9 * scale {
        return Err(Error::consistency(format!(
            "discrete Lyapunov residual {:.3e} exceeds tolerance",
            max_abs(&residual)
        )));
    }
    if p.clone().cholesky().is_none() {
        return Err(Error::consistency("Lyapunov solution is not positive definite"));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_monodromy_gives_identity() {
        let p = solve_discrete_lyapunov(&Matrix::zeros(3, 3), 1.0).unwrap();
        assert!(max_abs(&(p - Matrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn scalar_geometric_series() {
        let p = solve_discrete_lyapunov(&Matrix::from_element(1, 1, 0.5), 1.0).unwrap();
        assert!((p[(0, 0)] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn marginal_radius_is_infeasible() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            solve_discrete_lyapunov(&m, 1.0),
            Err(Error::LyapunovInfeasible { .. })
        ));
    }

    #[test]
    fn scaled_bound_nonnormal() {
        let m = Matrix::from_row_slice(2, 2, &[0.5, 3.0, 0.0, 0.4]);
        let s = 0.5 * (1.0 + 1e-6);
        let p = solve_discrete_lyapunov(&m, s).unwrap();
        let residual = m.transpose() * &p * &m - &p * (s * s) + Matrix::identity(2, 2);
        assert!(max_abs(&residual) <= 1e-9 * max_abs(&p));
    }
}
