mod common;

use hybrid_observer::certification::{compute_certificate, DEFAULT_GRID_POINTS};
use hybrid_observer::numerics::{
    image_basis, matrix_exponential, place_continuous, place_discrete, solve_discrete_lyapunov,
    spectral_abscissa, spectral_radius, subspace_intersection, Tolerance,
};
use hybrid_observer::Matrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::gaussian_matrix;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn low_rank(rng: &mut ChaCha8Rng, n: usize, rank: usize, cols: usize) -> Matrix {
    gaussian_matrix(rng, n, rank) * gaussian_matrix(rng, rank, cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intersection_and_sum_dimensions(seed in any::<u64>(), n in 1usize..=8, ru in 0usize..=8, rv in 0usize..=8) {
        let mut g = rng(seed);
        let tol = Tolerance::default();
        let (ru, rv) = (ru.min(n), rv.min(n));
        let u = image_basis(&low_rank(&mut g, n, ru, ru + 1), &tol).unwrap();
        let v = image_basis(&low_rank(&mut g, n, rv, rv + 1), &tol).unwrap();
        let cap = subspace_intersection(&u, &v, &tol).unwrap();
        let mut both = Matrix::zeros(n, u.dim() + v.dim());
        both.view_mut((0, 0), (n, u.dim())).copy_from(u.basis());
        both.view_mut((0, u.dim()), (n, v.dim())).copy_from(v.basis());
        let sum = image_basis(&both, &tol).unwrap();
        prop_assert_eq!(u.dim(), ru);
        prop_assert_eq!(cap.dim() + sum.dim(), u.dim() + v.dim());
        for b in [&u, &v, &cap, &sum] {
            let k = b.dim();
            prop_assert!(max_abs(&(b.basis().transpose() * b.basis() - Matrix::identity(k, k))) <= 1e-10);
        }
        prop_assert!(u.residual_of(cap.basis()) <= 1e-9);
        prop_assert!(v.residual_of(cap.basis()) <= 1e-9);
    }

    #[test]
    fn exponential_semigroup(seed in any::<u64>(), n in 1usize..=12, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let mut g = rng(seed);
        let a = gaussian_matrix(&mut g, n, n) / (n as f64).sqrt();
        let shift = spectral_abscissa(&a).unwrap() + 0.5;
        let a = a - Matrix::identity(n, n) * shift;
        let lhs = matrix_exponential(&a, t1).unwrap() * matrix_exponential(&a, t2).unwrap();
        let rhs = matrix_exponential(&a, t1 + t2).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-9);
    }

    #[test]
    fn continuous_placement_meets_its_target(seed in any::<u64>(), n in 1usize..=6, q in 1usize..=3, target in -4.0f64..-0.5) {
        let mut g = rng(seed);
        let tol = Tolerance::default();
        let f = gaussian_matrix(&mut g, n, n);
        let h = gaussian_matrix(&mut g, q, n);
        let l = place_continuous(&f, &h, target, &tol).unwrap();
        prop_assert!(spectral_abscissa(&(&f - &l * &h)).unwrap() <= target + tol.spec_tol);
    }

    #[test]
    fn discrete_placement_meets_its_target(seed in any::<u64>(), n in 1usize..=6, extra in 0usize..=3, target in 0.0f64..0.95) {
        let mut g = rng(seed);
        let tol = Tolerance::default();
        let e = gaussian_matrix(&mut g, n, n);
        let cbar = gaussian_matrix(&mut g, n + extra, n);
        let nbar = place_discrete(&e, &cbar, target, &tol).unwrap();
        prop_assert!(spectral_radius(&(&e - &nbar * &cbar)).unwrap() <= target + tol.spec_tol);
    }

    #[test]
    fn discrete_lyapunov_residual(seed in any::<u64>(), n in 1usize..=10, radius in 0.0f64..0.99) {
        let mut g = rng(seed);
        let m = gaussian_matrix(&mut g, n, n);
        let r = spectral_radius(&m).unwrap();
        let mono = if r > 0.0 { m * (radius / r) } else { m };
        let p = solve_discrete_lyapunov(&mono, 1.0).unwrap();
        let residual = mono.transpose() * &p * &mono - &p + Matrix::identity(n, n);
        prop_assert!(max_abs(&residual) <= 1e-9 * max_abs(&p));
        prop_assert!(p.clone().cholesky().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certificate_is_grid_stable(seed in 0u64..10_000) {
        let pipe = common::random_pipeline(seed, 6, 4);
        let fine = compute_certificate(&pipe.es, pipe.targets.alpha, 2 * DEFAULT_GRID_POINTS - 1).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
        prop_assert!(rel(pipe.cert.c1, fine.c1) < 1e-3);
        prop_assert!(rel(pipe.cert.c2, fine.c2) < 1e-3);
        prop_assert!(rel(pipe.cert.grad_bound, fine.grad_bound) < 1e-3);
    }
}
