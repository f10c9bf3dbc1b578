use std::io::{self, Write};

use crate::{Error, Result, Vector};

/// One point of the hybrid time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub k: usize,
    pub x: Vector,
    pub xhat: Vec<Vector>,
    /// Transformed error `ε` built from `eᵢ = x − x̂ᵢ`.
    pub eps: Vector,
}

impl Sample {
    /// `|x̂ᵢ − x|` for every agent.
    pub fn agent_errors(&self) -> Vec<f64> {
        self.xhat.iter().map(|xh| (xh - &self.x).norm()).collect()
    }

    /// `|col(x̂ᵢ − x)|`.
    pub fn error_norm(&self) -> f64 {
        self.xhat
            .iter()
            .map(|xh| (xh - &self.x).norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

/// Plant, estimates and errors over hybrid time. Every integration step adds
/// a sample; every jump adds one more, so the pre-jump (old `k`) and
/// post-jump (new `k`) states share `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrajectory {
    samples: Vec<Sample>,
    jump_times: Vec<f64>,
}

impl HybridTrajectory {
    pub(crate) fn new(samples: Vec<Sample>, jump_times: Vec<f64>) -> Self {
        HybridTrajectory { samples, jump_times }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories start with a sample")
    }

    /// `(t, k, |ε|)` for every sample.
    pub fn eps_norms(&self) -> Vec<(f64, usize, f64)> {
        self.samples.iter().map(|s| (s.t, s.k, s.eps.norm())).collect()
    }

    /// Largest `|col(x̂ᵢ − x)|` over samples with `t ≥ from`.
    pub fn peak_error_after(&self, from: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t >= from)
            .map(Sample::error_norm)
            .fold(0.0, f64::max)
    }

    /// CSV export: `t,k,x_1..x_n,xhat_i_1..xhat_i_n (per agent),err_norm_1..err_norm_p,eps_norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let first = &self.samples[0];
        let n = first.x.len();
        let p = first.xhat.len();
        let mut header = vec!["t".to_string(), "k".to_string()];
        header.extend((1..=n).map(|c| format!("x_{c}")));
        for i in 1..=p {
            header.extend((1..=n).map(|c| format!("xhat_{i}_{c}")));
        }
        header.extend((1..=p).map(|i| format!("err_norm_{i}")));
        header.push("eps_norm".into());
        writeln!(out, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row = vec![s.t.to_string(), s.k.to_string()];
            row.extend(s.x.iter().map(f64::to_string));
            for xh in &s.xhat {
                row.extend(xh.iter().map(f64::to_string));
            }
            row.extend(s.agent_errors().iter().map(f64::to_string));
            row.push(s.eps.norm().to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Samples of a direct `ε` simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    pub k: usize,
    pub eps: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTrajectory {
    pub samples: Vec<ErrorSample>,
}

impl ErrorTrajectory {
    pub fn eps_norms(&self) -> Vec<(f64, usize, f64)> {
        self.samples.iter().map(|s| (s.t, s.k, s.eps.norm())).collect()
    }
}

/// Norms below this fraction of the peak are treated as round-off.
const FIT_FLOOR: f64 = 1e-10;

/// Fitted exponential decay rate `−slope` of `ln|ε|` against `t`.
///
/// Uses the pre-jump samples (those followed by a sample with the same `t`
/// and a larger `k`) inside `[t_end/2, t_end]`, or every sample of that
/// window when it holds fewer than two jumps. When the norm reaches the
/// round-off floor, `t_end` is the first time it does so.
pub fn fit_decay_rate(norms: &[(f64, usize, f64)]) -> Result<f64> {
    let last = norms
        .last()
        .ok_or_else(|| Error::DegenerateTrajectory("empty trajectory".into()))?
        .0;
    let peak = norms.iter().map(|s| s.2).fold(0.0, f64::max);
    let floor = FIT_FLOOR * peak;
    let t_end = norms.iter().find(|s| s.2 < floor).map_or(last, |s| s.0);
    let window = |t: f64| t >= 0.5 * t_end && t <= t_end;
    let pre_jump: Vec<(f64, f64)> = norms
        .windows(2)
        .filter(|w| w[1].1 > w[0].1 && w[1].0 == w[0].0 && window(w[0].0))
        .map(|w| (w[0].0, w[0].2))
        .collect();
    let points = if pre_jump.len() >= 2 {
        pre_jump
    } else {
        norms.iter().filter(|s| window(s.0)).map(|s| (s.0, s.2)).collect()
    };
    let points: Vec<(f64, f64)> = points.into_iter().filter(|p| p.1 >= floor).collect();
    if points.len() < 2 {
        return Err(Error::DegenerateTrajectory(
            "fewer than two samples in the fit window".into(),
        ));
    }
    if points.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateTrajectory(
            "error norm vanishes in the fit window".into(),
        ));
    }
    let m = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in &points {
        sxy += (t - mean_t) * (v.ln() - mean_y);
        sxx += (t - mean_t) * (t - mean_t);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateTrajectory(
            "all fit samples share one time".into(),
        ));
    }
    Ok(-sxy / sxx)
}

/// Decay rate of `|ε|` along an observer trajectory.
pub fn measure_decay_rate(traj: &HybridTrajectory) -> Result<f64> {
    fit_decay_rate(&traj.eps_norms())
}
