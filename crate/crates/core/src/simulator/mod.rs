//! Hybrid-time simulation of the plant and all agent observers.
//!
//! Between communication instants every agent runs
//! `x̂̇ᵢ = A x̂ᵢ + W_{i,0}Lᵢ(yᵢ − Cᵢx̂ᵢ)`; at a communication instant agent `i`
//! receives `y_{i,j} = x̂ⱼ + w_{i,j}` from every in-neighbour and jumps to
//! `x̂ᵢ⁺ = x̂ᵢ + Σⱼ Kᵢⱼ(y_{i,j} − x̂ᵢ)` with `Kᵢⱼ = Σ_ρ W_{i,ρ}N_{i,j,ρ}W_{j,ρ−1}ᵀ`.
//!
//! Flows are propagated exactly over each step `h` with `d` held constant,
//! so the only discretisation is the zero-order hold of the disturbance.

mod disturbance;
mod trajectory;

pub use disturbance::{generate_disturbances, DisturbanceKind, DisturbanceSpec, Disturbances};
pub use trajectory::{
    fit_decay_rate, measure_decay_rate, ErrorSample, ErrorTrajectory, HybridTrajectory, Sample,
};

use rand::Rng;

use crate::certification::{ErrorLayout, ErrorSystem};
use crate::decomposition::MultiHopDecomposition;
use crate::model::{PlantModel, SensorGraph};
use crate::numerics::zoh_discretize;
use crate::synthesis::ObserverGains;
use crate::{Error, Matrix, Result, Vector};

/// Grid snapping tolerance, in units of the step `h`.
const GRID_TOL: f64 = 1e-9;
/// States beyond this norm count as diverged.
const DIVERGENCE_NORM: f64 = 1e12;

/// Communication pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// All agents exchange at `t = kT`.
    Nominal,
    /// Each agent restarts its own timer after firing, with period
    /// `T + u`, `u` uniform in `[−ε_τ, ε_τ]`.
    Jitter { eps_tau: f64 },
    /// Values sampled at `kT` are applied at `kT + δ`.
    Delay { delta: f64 },
}

/// Everything needed for one simulation run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub plant: PlantModel,
    pub graph: SensorGraph,
    pub decomp: MultiHopDecomposition,
    pub gains: ObserverGains,
    pub t_period: f64,
    pub alpha: f64,
    pub t_final: f64,
    pub h: f64,
    pub x0: Vector,
    pub xhat0: Vec<Vector>,
    pub disturbance: DisturbanceSpec,
    pub variant: Variant,
}

impl Scenario {
    /// Number of steps `h` per period `T`.
    pub fn steps_per_period(&self) -> Result<usize> {
        steps_per_period(self.t_period, self.h)
    }

    /// Number of integration steps up to `t_final`.
    pub fn total_steps(&self) -> usize {
        total_steps(self.t_final, self.h)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.plant.n();
        let p = self.plant.p();
        if self.x0.len() != n {
            return Err(Error::dim(format!(
                "x0 has {} entries, expected {n}",
                self.x0.len()
            )));
        }
        if self.xhat0.len() != p || self.xhat0.iter().any(|v| v.len() != n) {
            return Err(Error::dim(format!("need {p} initial estimates of size {n}")));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::invalid("t_final must be finite and non-negative"));
        }
        self.steps_per_period()?;
        self.disturbance.validate()?;
        match self.variant {
            Variant::Nominal => {}
            Variant::Jitter { eps_tau } => {
                if !(eps_tau >= 0.0 && eps_tau < self.t_period / 2.0) {
                    return Err(Error::invalid(format!("jitter {eps_tau} must lie in [0, T/2)")));
                }
            }
            Variant::Delay { delta } => {
                if !(delta >= 0.0 && delta < self.t_period) {
                    return Err(Error::invalid(format!("delay {delta} must lie in [0, T)")));
                }
            }
        }
        Ok(())
    }

    /// `dim d = n + Σ mᵢ`.
    pub fn d_dim(&self) -> usize {
        self.plant.n() + self.plant.output_dims().iter().sum::<usize>()
    }

    /// `dim w = n · |E|`.
    pub fn w_dim(&self) -> usize {
        self.plant.n() * self.graph.edges().len()
    }

    /// Same scenario with another communication pattern.
    pub fn with_variant(&self, variant: Variant) -> Scenario {
        Scenario {
            variant,
            ..self.clone()
        }
    }
}

fn steps_per_period(t_period: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !(t_period > 0.0) || !h.is_finite() || !t_period.is_finite() {
        return Err(Error::invalid("step and period must be positive"));
    }
    let ratio = t_period / h;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > GRID_TOL * ratio {
        return Err(Error::invalid(format!(
            "step {h} does not divide the period {t_period}"
        )));
    }
    Ok(r as usize)
}

fn total_steps(t_final: f64, h: f64) -> usize {
    (t_final / h + GRID_TOL).floor() as usize
}

/// One action at a communication instant.
#[derive(Debug, Clone, PartialEq)]
enum Action {
    /// The listed agents jump simultaneously from the current estimates.
    Jump(Vec<usize>),
    /// Every agent records `Yᵢ = Σⱼ Kᵢⱼ y_{i,j}` for a later `Apply`.
    Sample,
    /// Every agent applies `x̂ᵢ ← x̂ᵢ + Yᵢ − (Σⱼ Kᵢⱼ) x̂ᵢ`.
    Apply,
}

/// Event time on the grid: inside step `step`, at fraction `frac ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
struct Event {
    step: usize,
    frac: f64,
    time: f64,
    action: Action,
}

fn place(time: f64, h: f64) -> (usize, f64) {
    let pos = time / h;
    let grid = pos.round();
    if (pos - grid).abs() <= GRID_TOL * pos.max(1.0) && grid >= 1.0 {
        (grid as usize - 1, 1.0)
    } else {
        (pos.floor() as usize, pos - pos.floor())
    }
}

fn schedule(sc: &Scenario) -> Result<Vec<Event>> {
    let r = sc.steps_per_period()?;
    let steps = sc.total_steps();
    let h = sc.h;
    let p = sc.plant.p();
    let mut events = Vec::new();
    match sc.variant {
        Variant::Nominal => {
            for k in 1..=steps / r {
                events.push(Event {
                    step: k * r - 1,
                    frac: 1.0,
                    time: (k * r) as f64 * h,
                    action: Action::Jump((0..p).collect()),
                });
            }
        }
        Variant::Delay { delta } => {
            for k in 1..=steps / r {
                let t0 = (k * r) as f64 * h;
                events.push(Event {
                    step: k * r - 1,
                    frac: 1.0,
                    time: t0,
                    action: Action::Sample,
                });
                let (step, frac) = if delta == 0.0 {
                    (k * r - 1, 1.0)
                } else {
                    place(t0 + delta, h)
                };
                if step < steps {
                    events.push(Event {
                        step,
                        frac,
                        time: if delta == 0.0 { t0 } else { t0 + delta },
                        action: Action::Apply,
                    });
                }
            }
        }
        Variant::Jitter { eps_tau } => {
            let mut rng = disturbance::rng(sc.disturbance.seed, disturbance::STREAM_JITTER);
            let mut firings: Vec<(usize, f64, usize)> = Vec::new();
            let horizon = steps as f64 * h;
            for i in 0..p {
                let mut t = 0.0;
                loop {
                    let u = if eps_tau > 0.0 {
                        rng.random_range(-eps_tau..=eps_tau)
                    } else {
                        0.0
                    };
                    t += sc.t_period + u;
                    let (step, frac) = place(t, h);
                    if step >= steps {
                        break;
                    }
                    firings.push((step, frac, i));
                }
            }
            firings.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut k = 0;
            while k < firings.len() {
                let (step, frac, _) = firings[k];
                let mut agents = Vec::new();
                while k < firings.len() && firings[k].0 == step && (firings[k].1 - frac).abs() <= GRID_TOL {
                    agents.push(firings[k].2);
                    k += 1;
                }
                let time = if frac == 1.0 {
                    (step + 1) as f64 * h
                } else {
                    (step as f64 + frac) * h
                };
                debug_assert!(time <= horizon + h);
                events.push(Event {
                    step,
                    frac,
                    time,
                    action: Action::Jump(agents),
                });
            }
        }
    }
    Ok(events)
}

/// Number of `w` draws the scenario consumes.
fn communication_rounds(events: &[Event]) -> usize {
    events
        .iter()
        .filter(|e| matches!(e.action, Action::Jump(_) | Action::Sample))
        .count()
}

/// Flow matrices of `z = (x, x̂₁, …, x̂_p)` with input `d`.
fn augmented_flow(sc: &Scenario) -> (Matrix, Matrix) {
    let n = sc.plant.n();
    let p = sc.plant.p();
    let a = sc.plant.a();
    let dim = n * (p + 1);
    let mut f = Matrix::zeros(dim, dim);
    let mut b = Matrix::zeros(dim, sc.d_dim());
    f.view_mut((0, 0), (n, n)).copy_from(a);
    b.view_mut((0, 0), (n, n)).copy_from(&Matrix::identity(n, n));
    let mut d_off = n;
    for i in 0..p {
        let c = sc.plant.output(i);
        let g = sc.gains.injection_gain(&sc.decomp, i);
        let row = n * (i + 1);
        let gc = &g * c;
        f.view_mut((row, 0), (n, n)).copy_from(&gc);
        f.view_mut((row, row), (n, n)).copy_from(&(a - &gc));
        b.view_mut((row, d_off), (n, c.nrows())).copy_from(&g);
        d_off += c.nrows();
    }
    (f, b)
}

struct Engine<'a> {
    sc: &'a Scenario,
    layout: ErrorLayout,
    f: Matrix,
    b: Matrix,
    phi: Matrix,
    gamma: Matrix,
    /// `(j, Kᵢⱼ, w offset)` for every agent `i`.
    jump_gains: Vec<Vec<(usize, Matrix, usize)>>,
    z: Vector,
    k: usize,
    samples: Vec<Sample>,
    jump_times: Vec<f64>,
    pending: Option<Vec<Vector>>,
}

impl<'a> Engine<'a> {
    fn new(sc: &'a Scenario) -> Result<Self> {
        let n = sc.plant.n();
        let p = sc.plant.p();
        let layout = ErrorLayout::new(&sc.decomp, &sc.graph, &sc.plant.output_dims())?;
        let (f, b) = augmented_flow(sc);
        let (phi, gamma) = zoh_discretize(&f, &b, sc.h)?;
        let jump_gains = (0..p)
            .map(|i| {
                sc.graph
                    .in_neighbors(i)
                    .iter()
                    .map(|&j| {
                        let off = layout.w_range(i, j).expect("edge").start;
                        (j, sc.gains.jump_gain(&sc.decomp, i, j), off)
                    })
                    .collect()
            })
            .collect();
        let mut z = Vector::zeros(n * (p + 1));
        z.rows_mut(0, n).copy_from(&sc.x0);
        for (i, xh) in sc.xhat0.iter().enumerate() {
            z.rows_mut(n * (i + 1), n).copy_from(xh);
        }
        Ok(Engine {
            sc,
            layout,
            f,
            b,
            phi,
            gamma,
            jump_gains,
            z,
            k: 0,
            samples: Vec::new(),
            jump_times: Vec::new(),
            pending: None,
        })
    }

    fn estimate(&self, i: usize) -> Vector {
        let n = self.sc.plant.n();
        self.z.rows(n * (i + 1), n).into_owned()
    }

    fn record(&mut self, t: f64) -> Result<()> {
        let n = self.sc.plant.n();
        let norm = self.z.norm();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(Error::Divergence { t });
        }
        let x = self.z.rows(0, n).into_owned();
        let xhat: Vec<Vector> = (0..self.sc.plant.p()).map(|i| self.estimate(i)).collect();
        let errors: Vec<Vector> = xhat.iter().map(|xh| &x - xh).collect();
        let eps = self.layout.to_eps(&self.sc.decomp, &errors);
        self.samples.push(Sample {
            t,
            k: self.k,
            x,
            xhat,
            eps,
        });
        Ok(())
    }

    fn flow(&mut self, frac: f64, d: &Vector) -> Result<()> {
        if frac == 1.0 {
            self.z = &self.phi * &self.z + &self.gamma * d;
        } else if frac > 0.0 {
            let (phi, gamma) = zoh_discretize(&self.f, &self.b, frac * self.sc.h)?;
            self.z = phi * &self.z + gamma * d;
        }
        Ok(())
    }

    fn correction(&self, i: usize, w: &Vector) -> Vector {
        let xi = self.estimate(i);
        let mut delta = Vector::zeros(xi.len());
        for (j, k, off) in &self.jump_gains[i] {
            let y = self.estimate(*j) + w.rows(*off, xi.len());
            delta += k * (y - &xi);
        }
        delta
    }

    fn apply(&mut self, action: &Action, w: Option<&Vector>) {
        let n = self.sc.plant.n();
        match action {
            Action::Jump(agents) => {
                let w = w.expect("jump consumes w");
                let deltas: Vec<(usize, Vector)> =
                    agents.iter().map(|&i| (i, self.correction(i, w))).collect();
                for (i, d) in deltas {
                    let mut rows = self.z.rows_mut(n * (i + 1), n);
                    rows += d;
                }
            }
            Action::Sample => {
                let w = w.expect("sampling consumes w");
                let held = (0..self.sc.plant.p())
                    .map(|i| {
                        let mut y = Vector::zeros(n);
                        for (j, k, off) in &self.jump_gains[i] {
                            y += k * (self.estimate(*j) + w.rows(*off, n));
                        }
                        y
                    })
                    .collect();
                self.pending = Some(held);
            }
            Action::Apply => {
                let held = self.pending.take().expect("apply follows a sample");
                for (i, y) in held.into_iter().enumerate() {
                    let xi = self.estimate(i);
                    let mut total = Matrix::zeros(n, n);
                    for (_, k, _) in &self.jump_gains[i] {
                        total += k;
                    }
                    let mut rows = self.z.rows_mut(n * (i + 1), n);
                    rows += y - total * xi;
                }
            }
        }
    }
}

/// Runs the scenario with its own variant.
pub fn simulate(sc: &Scenario) -> Result<HybridTrajectory> {
    sc.validate()?;
    let events = schedule(sc)?;
    let disturbances = generate_disturbances(
        &sc.disturbance,
        sc.total_steps(),
        communication_rounds(&events),
        sc.d_dim(),
        sc.w_dim(),
    )?;
    run(sc, &events, &disturbances)
}

/// Runs the scenario with independent per-agent timers of period `T ± ε_τ`.
pub fn simulate_jitter(sc: &Scenario, eps_tau: f64) -> Result<HybridTrajectory> {
    simulate(&sc.with_variant(Variant::Jitter { eps_tau }))
}

/// Runs the scenario with every exchange applied `δ` after it is sampled.
pub fn simulate_delay(sc: &Scenario, delta: f64) -> Result<HybridTrajectory> {
    simulate(&sc.with_variant(Variant::Delay { delta }))
}

/// Runs the scenario with the given disturbance realisation (the `d` samples
/// must cover every step and the `w` samples every communication round).
pub fn simulate_with(sc: &Scenario, disturbances: &Disturbances) -> Result<HybridTrajectory> {
    sc.validate()?;
    let events = schedule(sc)?;
    if disturbances.d.len() < sc.total_steps() || disturbances.w.len() < communication_rounds(&events) {
        return Err(Error::dim(
            "disturbance realisation is too short for the scenario",
        ));
    }
    run(sc, &events, disturbances)
}

/// Disturbance realisation `simulate` would draw for this scenario.
pub fn scenario_disturbances(sc: &Scenario) -> Result<Disturbances> {
    sc.validate()?;
    let events = schedule(sc)?;
    generate_disturbances(
        &sc.disturbance,
        sc.total_steps(),
        communication_rounds(&events),
        sc.d_dim(),
        sc.w_dim(),
    )
}

fn run(sc: &Scenario, events: &[Event], dist: &Disturbances) -> Result<HybridTrajectory> {
    let mut eng = Engine::new(sc)?;
    let h = sc.h;
    let steps = sc.total_steps();
    eng.record(0.0)?;
    let mut next = 0;
    let mut round = 0;
    for m in 0..steps {
        let d = &dist.d[m];
        let mut pos = 0.0;
        let mut recorded_end = false;
        while next < events.len() && events[next].step == m {
            let frac = events[next].frac;
            let time = events[next].time;
            eng.flow(frac - pos, d)?;
            pos = frac;
            if frac == 1.0 {
                recorded_end = true;
            }
            eng.record(if frac == 1.0 { (m + 1) as f64 * h } else { time })?;
            let mut jumped = false;
            while next < events.len() && events[next].step == m && events[next].frac == frac {
                let ev = &events[next];
                let w = match ev.action {
                    Action::Jump(_) | Action::Sample => {
                        round += 1;
                        Some(&dist.w[round - 1])
                    }
                    Action::Apply => None,
                };
                eng.apply(&ev.action, w);
                jumped |= !matches!(ev.action, Action::Sample);
                next += 1;
            }
            if jumped {
                eng.k += 1;
                let t = eng.samples.last().expect("recorded").t;
                eng.jump_times.push(t);
                eng.record(t)?;
            }
        }
        if pos < 1.0 {
            eng.flow(1.0 - pos, d)?;
        }
        if !recorded_end {
            eng.record((m + 1) as f64 * h)?;
        }
    }
    Ok(HybridTrajectory::new(eng.samples, eng.jump_times))
}

/// Integrates `ε̇ = A_ε ε + R d`, `ε⁺ = J_ε ε + S w` at `t = kT` with the
/// same exact discretisation as [`simulate`]; `w` sample `k−1` is used at the
/// `k`-th jump.
pub fn simulate_error_system(
    es: &ErrorSystem,
    disturbances: &Disturbances,
    eps0: &Vector,
    t_final: f64,
    h: f64,
) -> Result<ErrorTrajectory> {
    let r = steps_per_period(es.t_period, h)?;
    let steps = total_steps(t_final, h);
    if eps0.len() != es.n_eps() {
        return Err(Error::dim(format!(
            "eps0 has {} entries, expected {}",
            eps0.len(),
            es.n_eps()
        )));
    }
    if disturbances.d.len() < steps || disturbances.w.len() < steps / r {
        return Err(Error::dim("disturbance realisation is too short"));
    }
    let (phi, gamma) = zoh_discretize(&es.a_eps, &es.r, h)?;
    let mut eps = eps0.clone();
    let mut k = 0;
    let mut samples = vec![ErrorSample {
        t: 0.0,
        k,
        eps: eps.clone(),
    }];
    for m in 0..steps {
        eps = &phi * &eps + &gamma * &disturbances.d[m];
        let t = (m + 1) as f64 * h;
        if !eps.iter().all(|v| v.is_finite()) || eps.norm() > DIVERGENCE_NORM {
            return Err(Error::Divergence { t });
        }
        samples.push(ErrorSample {
            t,
            k,
            eps: eps.clone(),
        });
        if (m + 1) % r == 0 {
            eps = &es.j_eps * &eps + &es.s * &disturbances.w[k];
            k += 1;
            samples.push(ErrorSample {
                t,
                k,
                eps: eps.clone(),
            });
        }
    }
    Ok(ErrorTrajectory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certification::assemble_error_system;
    use crate::decomposition::{build_decomposition, find_hop_depths};
    use crate::numerics::Tolerance;
    use crate::synthesis::{synthesize, GainTargets};

    fn ring_scenario(t_final: f64, kind: DisturbanceKind) -> Scenario {
        let tol = Tolerance::default();
        let a = Matrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 2., 0., 0., -2., 0.],
        );
        let outputs = (0..4)
            .map(|k| {
                let mut r = Matrix::zeros(1, 4);
                r[(0, k)] = 1.0;
                r
            })
            .collect();
        let plant = PlantModel::new(a, outputs).unwrap();
        let graph = SensorGraph::ring(4);
        let depths = find_hop_depths(&plant, &graph, 1.0, None, &tol)
            .unwrap()
            .into_depths()
            .unwrap();
        let decomp = build_decomposition(&plant, &graph, &depths, &tol).unwrap();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let gains = synthesize(&decomp, &plant, &graph, &targets, &tol).unwrap();
        Scenario {
            plant,
            graph,
            decomp,
            gains,
            t_period: 0.1,
            alpha: 1.0,
            t_final,
            h: 1e-3,
            x0: Vector::from_vec(vec![1.0, 0.0, 0.0, 1.0]),
            xhat0: vec![Vector::zeros(4); 4],
            disturbance: DisturbanceSpec {
                d_inf: 0.04,
                w_inf: 0.02,
                seed: 3,
                kind,
            },
            variant: Variant::Nominal,
        }
    }

    #[test]
    fn rejects_step_not_dividing_period() {
        let mut sc = ring_scenario(1.0, DisturbanceKind::Zero);
        sc.h = 0.03;
        assert!(simulate(&sc).is_err());
    }

    #[test]
    fn jump_bookkeeping() {
        let sc = ring_scenario(1.0, DisturbanceKind::Zero);
        let traj = simulate(&sc).unwrap();
        assert_eq!(traj.jump_times().len(), 10);
        assert_eq!(traj.samples().len(), 1 + 1000 + 10);
        for s in traj.samples() {
            let floor = (s.t / 0.1 + 1e-9).floor() as usize;
            assert!(s.k == floor || (s.k + 1 == floor), "t = {}, k = {}", s.t, s.k);
        }
        let pairs: Vec<_> = traj
            .samples()
            .windows(2)
            .filter(|w| w[0].t == w[1].t)
            .map(|w| (w[0].k, w[1].k))
            .collect();
        assert_eq!(pairs.len(), 10);
        assert!(pairs.iter().all(|(a, b)| b == &(a + 1)));
    }

    #[test]
    fn exact_initial_estimates_stay_exact() {
        let mut sc = ring_scenario(2.0, DisturbanceKind::Zero);
        sc.xhat0 = vec![sc.x0.clone(); 4];
        let traj = simulate(&sc).unwrap();
        assert!(traj.samples().iter().all(|s| s.error_norm() <= 1e-10));
    }

    #[test]
    fn zero_jitter_and_delay_match_nominal() {
        let sc = ring_scenario(2.0, DisturbanceKind::Zero);
        let nominal = simulate(&sc).unwrap();
        for traj in [
            simulate_jitter(&sc, 0.0).unwrap(),
            simulate_delay(&sc, 0.0).unwrap(),
        ] {
            assert_eq!(traj.samples().len(), nominal.samples().len());
            for (a, b) in traj.samples().iter().zip(nominal.samples()) {
                assert_eq!(a.k, b.k);
                assert!((a.t - b.t).abs() < 1e-12);
                assert!((&a.eps - &b.eps).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn delay_shifts_jumps() {
        let sc = ring_scenario(1.0, DisturbanceKind::Zero);
        let traj = simulate_delay(&sc, 5e-3).unwrap();
        assert_eq!(traj.jump_times().len(), 9 + usize::from(1.0 + 5e-3 <= 1.0));
        assert!((traj.jump_times()[0] - 0.105).abs() < 1e-12);
        let off_grid = simulate_delay(&sc, 2.5e-4).unwrap();
        assert!((off_grid.jump_times()[0] - 0.10025).abs() < 1e-12);
    }

    #[test]
    fn jitter_is_seeded() {
        let sc = ring_scenario(2.0, DisturbanceKind::ClippedGaussian);
        let a = simulate_jitter(&sc, 0.01).unwrap();
        let b = simulate_jitter(&sc, 0.01).unwrap();
        assert_eq!(a, b);
        assert!(a.jump_times().len() > 20);
    }

    #[test]
    fn error_system_oracle_short_run() {
        let sc = ring_scenario(1.0, DisturbanceKind::ClippedGaussian);
        let dist = scenario_disturbances(&sc).unwrap();
        let traj = simulate_with(&sc, &dist).unwrap();
        let es = assemble_error_system(&sc.decomp, &sc.plant, &sc.gains, &sc.graph, 0.1).unwrap();
        let direct = simulate_error_system(&es, &dist, &traj.samples()[0].eps, 1.0, 1e-3).unwrap();
        assert_eq!(direct.samples.len(), traj.samples().len());
        for (a, b) in direct.samples.iter().zip(traj.samples()) {
            assert_eq!(a.k, b.k);
            assert!((&a.eps - &b.eps).amax() < 1e-8);
        }
    }

    #[test]
    fn error_system_zero_input() {
        let sc = ring_scenario(0.5, DisturbanceKind::Zero);
        let es = assemble_error_system(&sc.decomp, &sc.plant, &sc.gains, &sc.graph, 0.1).unwrap();
        let dist = Disturbances::zero(500, 5, 8, 16);
        let traj = simulate_error_system(&es, &dist, &Vector::zeros(16), 0.5, 1e-3).unwrap();
        assert!(traj.samples.iter().all(|s| s.eps.amax() == 0.0));
    }

    #[test]
    fn csv_layout() {
        let sc = ring_scenario(0.2, DisturbanceKind::Zero);
        let traj = simulate(&sc).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("t,k,x_1,x_2,x_3,x_4,xhat_1_1"));
        assert!(header.ends_with("err_norm_4,eps_norm"));
        assert_eq!(header.split(',').count(), 2 + 4 + 16 + 4 + 1);
        assert_eq!(lines.count(), traj.samples().len());
    }
}
