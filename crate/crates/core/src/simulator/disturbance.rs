use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vector};

/// RNG stream ids derived from one seed.
pub(crate) const STREAM_D: u64 = 0;
pub(crate) const STREAM_W: u64 = 1;
pub(crate) const STREAM_JITTER: u64 = 2;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    /// Gaussian samples with per-entry deviation `bound/√dim`, radially
    /// clipped to the bound.
    ClippedGaussian,
    /// Uniform samples from the ball of radius `bound`.
    UniformBall,
    Zero,
}

/// Bounds `‖d‖∞`, `‖w‖∞` (Euclidean norm of every sample) and the source of
/// the random signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    pub d_inf: f64,
    pub w_inf: f64,
    pub seed: u64,
    pub kind: DisturbanceKind,
}

impl DisturbanceSpec {
    pub fn zero() -> Self {
        DisturbanceSpec {
            d_inf: 0.0,
            w_inf: 0.0,
            seed: 0,
            kind: DisturbanceKind::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_inf >= 0.0 && self.d_inf.is_finite() && self.w_inf >= 0.0 && self.w_inf.is_finite()) {
            return Err(Error::invalid(
                "disturbance bounds must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// Sampled disturbances: `d` held over each integration step, one full `w`
/// vector per communication event.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbances {
    pub d: Vec<Vector>,
    pub w: Vec<Vector>,
}

impl Disturbances {
    pub fn zero(steps: usize, events: usize, d_dim: usize, w_dim: usize) -> Self {
        Disturbances {
            d: vec![Vector::zeros(d_dim); steps],
            w: vec![Vector::zeros(w_dim); events],
        }
    }

    /// Largest Euclidean norm of any `d` sample.
    pub fn d_sup(&self) -> f64 {
        self.d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn w_sup(&self) -> f64 {
        self.w.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Draws `steps` samples of `d` and `events` samples of `w`, deterministically
/// from the seed (separate streams for `d` and `w`).
pub fn generate_disturbances(
    spec: &DisturbanceSpec,
    steps: usize,
    events: usize,
    d_dim: usize,
    w_dim: usize,
) -> Result<Disturbances> {
    spec.validate()?;
    let mut rd = rng(spec.seed, STREAM_D);
    let mut rw = rng(spec.seed, STREAM_W);
    Ok(Disturbances {
        d: (0..steps)
            .map(|_| sample(&mut rd, spec.kind, d_dim, spec.d_inf))
            .collect(),
        w: (0..events)
            .map(|_| sample(&mut rw, spec.kind, w_dim, spec.w_inf))
            .collect(),
    })
}

fn sample(rng: &mut ChaCha8Rng, kind: DisturbanceKind, dim: usize, bound: f64) -> Vector {
    if dim == 0 || bound == 0.0 {
        return Vector::zeros(dim);
    }
    match kind {
        DisturbanceKind::Zero => Vector::zeros(dim),
        DisturbanceKind::ClippedGaussian => {
            let sigma = bound / (dim as f64).sqrt();
            let v = Vector::from_fn(dim, |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
            clip(v, bound)
        }
        DisturbanceKind::UniformBall => {
            let dir = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = dir.norm();
            if norm == 0.0 {
                return Vector::zeros(dim);
            }
            let radius = bound * rng.random::<f64>().powf(1.0 / dim as f64);
            clip(dir * (radius / norm), bound)
        }
    }
}

fn clip(v: Vector, bound: f64) -> Vector {
    let norm = v.norm();
    if norm > bound {
        // the rescaled norm can round above the bound; shrink by one ulp-ish factor
        let mut out = v * (bound / norm);
        while out.norm() > bound {
            out *= 1.0 - f64::EPSILON;
        }
        out
    } else {
        v
    }
}
