use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ErrorSystem;
use crate::numerics::{eigenvalues, matrix_exponential, solve_discrete_lyapunov, spectral_norm};
use crate::simulator::HybridTrajectory;
use crate::{Error, Matrix, Result};

/// τ-grid size used for `ϑ₁`, `ϑ₂` unless told otherwise.
pub const DEFAULT_GRID_POINTS: usize = 1001;

/// Relative inflation of the monodromy radius that makes the Lyapunov
/// inequality strict.
const ETA_INFLATION: f64 = 1e-6;

/// Spectra of the monodromy matrix and of its diagonal blocks must agree to this.
const EIGEN_UNION_TOL: f64 = 1e-8;

/// `e^{A_ε T} J_ε` with its spectral radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    pub matrix: Matrix,
    pub eta_raw: f64,
    /// Largest distance between an eigenvalue of the monodromy matrix and its
    /// match among the block-wise eigenvalues.
    pub union_deviation: f64,
}

/// Computes the monodromy matrix and checks that its spectrum is the union
/// of the spectra of `e^{A_{i,0}T}`, `e^{A_{i,ρ}T}Δ_{i,ρ}` (`1 ≤ ρ ≤ ℓᵢ`) and
/// `e^{A_{i,ℓᵢ+1}T}`.
pub fn monodromy(es: &ErrorSystem) -> Result<Monodromy> {
    let t = es.t_period;
    let matrix = matrix_exponential(&es.a_eps, t)? * &es.j_eps;
    let full = eigenvalues(&matrix)?;
    let eta_raw = full.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut family = Vec::with_capacity(full.len());
    for b in es.layout.blocks().iter().filter(|b| b.dim > 0) {
        let a = es.a_eps.view((b.offset, b.offset), (b.dim, b.dim)).into_owned();
        let j = es.j_eps.view((b.offset, b.offset), (b.dim, b.dim)).into_owned();
        family.extend(eigenvalues(&(matrix_exponential(&a, t)? * j))?);
    }
    let union_deviation = match_spectra(&full, &family);
    if union_deviation > EIGEN_UNION_TOL * eta_raw.max(1.0) {
        return Err(Error::consistency(format!(
            "monodromy spectrum deviates from its block spectra by {union_deviation:.3e}"
        )));
    }
    Ok(Monodromy {
        matrix,
        eta_raw,
        union_deviation,
    })
}

/// Greedy nearest matching of two equally sized multisets; returns the
/// largest matched distance (`∞` when the sizes differ).
pub(crate) fn match_spectra(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&x, &y| b_nearest(a[x], b).total_cmp(&b_nearest(a[y], b)));
    for k in order {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(m, _)| !used[*m])
            .map(|(m, z)| (m, (z - a[k]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("sizes agree");
        used[idx] = true;
        worst = worst.max(dist);
    }
    worst
}

fn b_nearest(z: Complex64, b: &[Complex64]) -> f64 {
    b.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

/// Numerical ISS certificate of the hybrid error system.
///
/// `V(ε, τ) = √(εᵀ e^{A_εᵀ(T−τ)} P e^{A_ε(T−τ)} ε)` satisfies
/// `c₁|ε| ≤ V ≤ c₂|ε|`, `|∇V| ≤ M`, `V̇ ≤ c_C|d|` and `V⁺ ≤ ηV + c_D|w|`, so
/// `|ε(t)| ≤ κ e^{−α t}|ε(0)| + γ_C‖d‖∞ + γ_D‖w‖∞`. The gains are
/// certified upper bounds, not tight values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssCertificate {
    #[serde(with = "crate::matrix_serde")]
    pub p_matrix: Matrix,
    pub eta: f64,
    pub c1: f64,
    pub c2: f64,
    pub grad_bound: f64,
    pub c_flow: f64,
    pub c_jump: f64,
    pub kappa: f64,
    pub gamma_c: f64,
    pub gamma_d: f64,
    pub alpha_achieved: f64,
}

/// Builds the certificate for rate `α`. If the monodromy radius does not
/// allow `α`, the certificate is issued for the rate `−ln(η)/T` it does
/// allow; a radius of one or more is an error.
pub fn compute_certificate(es: &ErrorSystem, alpha: f64, grid_points: usize) -> Result<IssCertificate> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha = {alpha} must be positive")));
    }
    if grid_points < 2 {
        return Err(Error::invalid("the τ grid needs at least two points"));
    }
    let t = es.t_period;
    if es.n_eps() == 0 {
        let eta = (-alpha * t).exp();
        return Ok(IssCertificate {
            p_matrix: Matrix::zeros(0, 0),
            eta,
            c1: 1.0,
            c2: 1.0,
            grad_bound: 1.0,
            c_flow: 0.0,
            c_jump: 0.0,
            kappa: (alpha * t).exp(),
            gamma_c: 0.0,
            gamma_d: 0.0,
            alpha_achieved: alpha,
        });
    }
    let mono = monodromy(es)?;
    let (eta, alpha_achieved) = select_eta(mono.eta_raw, alpha, t)?;
    let p = solve_discrete_lyapunov(&mono.matrix, eta)?;
    let eig = SymmetricEigen::new(p.clone()).eigenvalues;
    let lambda_m = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lambda_m > 0.0) {
        return Err(Error::consistency("Lyapunov matrix is not positive definite"));
    }

    let (theta1, theta2) = transition_bounds(&es.a_eps, t, grid_points)?;
    let c1 = lambda_m.sqrt() * theta1;
    let c2 = lambda_max.sqrt() * theta2;
    let grad_bound = lambda_max * theta2 / (lambda_m.sqrt() * theta1);
    let c_flow = grad_bound * spectral_norm(&es.r);
    let c_jump = grad_bound * spectral_norm(&es.s);
    Ok(IssCertificate {
        p_matrix: p,
        eta,
        c1,
        c2,
        grad_bound,
        c_flow,
        c_jump,
        kappa: c2 / c1 * (alpha_achieved * t).exp(),
        gamma_c: t * c_flow / (c1 * (1.0 - eta)),
        gamma_d: c_jump / (c1 * (1.0 - eta)),
        alpha_achieved,
    })
}

/// `η = e^{−αT}` whenever the inflated radius stays below it; otherwise the
/// inflated radius itself, with the rate reduced to match. Taking η right at
/// the radius would make `P` blow up when placed blocks repeat along a chain
/// of agents (the monodromy matrix then has non-trivial Jordan blocks).
fn select_eta(eta_raw: f64, alpha: f64, t: f64) -> Result<(f64, f64)> {
    if !(eta_raw < 1.0) {
        return Err(Error::NotCertified(eta_raw));
    }
    let limit = (-alpha * t).exp();
    let inflated = eta_raw * (1.0 + ETA_INFLATION);
    if inflated <= limit {
        Ok((limit, alpha))
    } else if inflated < 1.0 {
        Ok((inflated, -inflated.ln() / t))
    } else {
        Err(Error::NotCertified(eta_raw))
    }
}

/// `ϑ₁ = min 1/‖e^{−A s}‖` and `ϑ₂ = max ‖e^{A s}‖` over a uniform grid of
/// `s ∈ [0, T]`.
fn transition_bounds(a: &Matrix, t: f64, grid_points: usize) -> Result<(f64, f64)> {
    let mut theta1 = f64::INFINITY;
    let mut theta2 = 0.0_f64;
    for k in 0..grid_points {
        let s = t * k as f64 / (grid_points - 1) as f64;
        theta2 = theta2.max(spectral_norm(&matrix_exponential(a, s)?));
        theta1 = theta1.min(1.0 / spectral_norm(&matrix_exponential(a, -s)?));
    }
    Ok((theta1, theta2))
}

/// Pointwise check of `|col(x̂ᵢ − x)| ≤ κ e^{−α t}|col(x̂ᵢ − x)(0)| + γ_C d̄ + γ_D w̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct IssReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest `bound − |e|` over the run (negative on violation).
    pub worst_margin: f64,
    /// Time of the worst margin.
    pub worst_time: f64,
}

impl IssReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

pub fn check_iss_bound(
    traj: &HybridTrajectory,
    cert: &IssCertificate,
    d_bound: f64,
    w_bound: f64,
) -> IssReport {
    let e0 = traj.samples().first().map_or(0.0, |s| s.error_norm());
    let offset = cert.gamma_c * d_bound + cert.gamma_d * w_bound;
    let mut report = IssReport {
        samples: traj.samples().len(),
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_time: 0.0,
    };
    for s in traj.samples() {
        let bound = cert.kappa * (-cert.alpha_achieved * s.t).exp() * e0 + offset;
        let margin = bound - s.error_norm();
        if margin < 0.0 {
            report.violations += 1;
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_time = s.t;
        }
    }
    report
}
