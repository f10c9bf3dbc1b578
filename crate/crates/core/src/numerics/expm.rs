use super::{ensure_finite, ensure_square};
use crate::{Error, Matrix, Result};

// Padé coefficients b_0..b_m and the 1-norm thresholds theta_m below which the
// degree-m approximant meets double precision (Higham, scaling and squaring).
const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

fn norm1(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^{A t}` by scaling and squaring with a diagonal Padé approximant.
pub fn matrix_exponential(a: &Matrix, t: f64) -> Result<Matrix> {
    let n = ensure_square(a)?;
    ensure_finite(a, "matrix_exponential input")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("matrix_exponential time"));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let at = a * t;
    let norm = norm1(&at);
    if norm == 0.0 {
        return Ok(Matrix::identity(n, n));
    }
    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            return Ok(pade_low(&at, m));
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = at * 2f64.powi(-s);
    let mut r = pade13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn solve_pade(u: Matrix, v: Matrix) -> Matrix {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular inside the theta bound")
}

fn pade_low(a: &Matrix, m: usize) -> Matrix {
    let n = a.nrows();
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let eye = Matrix::identity(n, n);
    let a2 = a * a;
    // Even powers A^0, A^2, ..., A^(m-1).
    let mut powers = vec![eye.clone(), a2.clone()];
    while powers.len() < m.div_ceil(2) {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        u_inner += p * b[2 * k + 1];
        v += p * b[2 * k];
    }
    let u = a * u_inner;
    solve_pade(u, v)
}

fn pade13(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let b = &B13;
    let eye = Matrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u_inner = u_hi + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1];
    let u = a * u_inner;
    let v_hi = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = v_hi + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    solve_pade(u, v)
}

/// Exact zero-order-hold discretisation of `ż = F z + G u` over `h`:
/// returns `(e^{F h}, ∫₀ʰ e^{F s} ds · G)` from one augmented exponential.
pub fn zoh_discretize(f: &Matrix, g: &Matrix, h: f64) -> Result<(Matrix, Matrix)> {
    let n = ensure_square(f)?;
    if g.nrows() != n {
        return Err(Error::dim(format!(
            "input matrix has {} rows, state has {n}",
            g.nrows()
        )));
    }
    let m = g.ncols();
    let mut aug = Matrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(f);
    aug.view_mut((0, n), (n, m)).copy_from(g);
    let e = matrix_exponential(&aug, h)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;

    fn rot(w: f64, t: f64) -> Matrix {
        let (s, c) = (w * t).sin_cos();
        Matrix::from_row_slice(2, 2, &[c, s, -s, c])
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let e = matrix_exponential(&Matrix::zeros(3, 3), 2.5).unwrap();
        assert_eq!(e, Matrix::identity(3, 3));
    }

    #[test]
    fn planar_rotation_closed_form() {
        let a = Matrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        for &t in &[0.0, 0.01, 0.1, 1.0, 3.0, 25.0] {
            let e = matrix_exponential(&a, t).unwrap();
            assert!(max_abs(&(e - rot(1.0, t))) < 1e-12 * (1.0 + t), "t = {t}");
        }
    }

    #[test]
    fn two_oscillator_plant_over_one_period() {
        let a = Matrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 2., 0., 0., -2., 0.],
        );
        let e = matrix_exponential(&a, 0.1).unwrap();
        let mut expected = Matrix::zeros(4, 4);
        expected.view_mut((0, 0), (2, 2)).copy_from(&rot(1.0, 0.1));
        expected.view_mut((2, 2), (2, 2)).copy_from(&rot(2.0, 0.1));
        assert!(max_abs(&(e - expected)) < 1e-14);
    }

    #[test]
    fn scalar_exponentials_across_padé_orders() {
        for &x in &[1e-4, 0.1, 0.5, 1.5, 4.0, 10.0, -7.0, 30.0] {
            let e = matrix_exponential(&Matrix::from_element(1, 1, x), 1.0).unwrap();
            let rel = (e[(0, 0)] - x.exp()).abs() / x.exp();
            assert!(rel < 1e-13, "x = {x}: rel err {rel:e}");
        }
    }

    #[test]
    fn agrees_with_nalgebra_on_nonnormal_input() {
        let a = Matrix::from_row_slice(3, 3, &[-1., 5., 0.3, 0., -2., 7., 0.1, 0., -0.5]);
        let ours = matrix_exponential(&a, 0.7).unwrap();
        let theirs = (&a * 0.7).exp();
        assert!(max_abs(&(&ours - &theirs)) < 1e-12 * max_abs(&theirs));
    }

    #[test]
    fn zoh_of_scalar_integrator() {
        // ẋ = -x + u over h: Φ = e^{-h}, Γ = 1 - e^{-h}
        let (phi, gamma) = zoh_discretize(
            &Matrix::from_element(1, 1, -1.0),
            &Matrix::from_element(1, 1, 1.0),
            0.3,
        )
        .unwrap();
        assert!((phi[(0, 0)] - (-0.3f64).exp()).abs() < 1e-15);
        assert!((gamma[(0, 0)] - (1.0 - (-0.3f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            matrix_exponential(&Matrix::zeros(2, 3), 1.0),
            Err(Error::NotSquare { .. })
        ));
    }
}
