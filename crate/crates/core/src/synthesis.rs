//! Observer gain synthesis.
//!
//! Local gains `Lᵢ` act on the locally observable coordinates `W_{i,0}` and
//! make `(W_{i,0}ᵀA − LᵢCᵢ)W_{i,0}` Hurwitz with abscissa at most `ᾱ`.
//! Consensus gains `N_{i,j,ρ}` correct the hop-`ρ` coordinates at every
//! communication instant and make
//! `E_{i,ρ}(I − Σⱼ N_{i,j,ρ} W_{j,ρ−1}ᵀ W_{i,ρ})` Schur with radius at most `β̄`,
//! where `E_{i,ρ} = exp(W_{i,ρ}ᵀ A W_{i,ρ} T)`.

use std::collections::BTreeMap;

use crate::decomposition::MultiHopDecomposition;
use crate::model::{PlantModel, SensorGraph};
use crate::numerics::{
    hstack, matrix_exponential, max_abs, place_continuous, place_discrete, spectral_abscissa,
    spectral_radius, Tolerance,
};
use crate::{Error, Matrix, Result};

/// Spectral targets of the gain design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainTargets {
    /// Prescribed convergence rate `α`.
    pub alpha: f64,
    /// Communication period `T`.
    pub t_period: f64,
    /// Abscissa target `ᾱ` of the local flow blocks.
    pub abar: f64,
    /// Radius target `β̄` of the consensus jump blocks.
    pub bbar: f64,
}

impl GainTargets {
    pub fn new(alpha: f64, t_period: f64, abar: f64, bbar: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha = {alpha} must be positive")));
        }
        if !(t_period > 0.0) || !t_period.is_finite() {
            return Err(Error::invalid(format!("period T = {t_period} must be positive")));
        }
        if !abar.is_finite() || abar > -alpha {
            return Err(Error::invalid(format!(
                "abscissa target {abar} must not exceed -alpha = {}",
                -alpha
            )));
        }
        let limit = (-alpha * t_period).exp();
        if !(bbar >= 0.0) || bbar > limit * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "radius target {bbar} must lie in [0, exp(-alpha T) = {limit}]"
            )));
        }
        Ok(GainTargets {
            alpha,
            t_period,
            abar,
            bbar: bbar.min(limit),
        })
    }

    /// `ᾱ = −5α` and `β̄ = exp(−αT)`.
    pub fn with_defaults(alpha: f64, t_period: f64) -> Result<Self> {
        GainTargets::new(alpha, t_period, -5.0 * alpha, (-alpha * t_period).exp())
    }

    /// `exp(−αT)`, the contraction every jump block must achieve.
    pub fn contraction(&self) -> f64 {
        (-self.alpha * self.t_period).exp()
    }
}

/// Local gains `Lᵢ` (`n_{i,0} × mᵢ`) and consensus gains `N_{i,j,ρ}`
/// (`n_{i,ρ} × n_{j,ρ−1}`) for every agent `i`, `j ∈ Nᵢ` and `1 ≤ ρ ≤ ℓᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    local: Vec<Matrix>,
    consensus: BTreeMap<(usize, usize, usize), Matrix>,
}

impl ObserverGains {
    /// Validates shapes against the decomposition. Every `(i, j, ρ)` block
    /// must be present, including zero-sized ones.
    pub fn new(
        decomp: &MultiHopDecomposition,
        graph: &SensorGraph,
        plant: &PlantModel,
        local: Vec<Matrix>,
        consensus: BTreeMap<(usize, usize, usize), Matrix>,
    ) -> Result<Self> {
        if local.len() != decomp.p() {
            return Err(Error::dim(format!(
                "{} local gains for {} agents",
                local.len(),
                decomp.p()
            )));
        }
        for (i, l) in local.iter().enumerate() {
            let want = (decomp.hop_dim(i, 0), plant.output(i).nrows());
            if l.shape() != want {
                return Err(Error::dim(format!(
                    "local gain of agent {i} is {}x{}, expected {}x{}",
                    l.nrows(),
                    l.ncols(),
                    want.0,
                    want.1
                )));
            }
        }
        let expected = consensus_shapes(decomp, graph);
        for (key, m) in &consensus {
            match expected.get(key) {
                None => {
                    return Err(Error::dim(format!(
                        "unexpected consensus gain (i={}, j={}, rho={})",
                        key.0, key.1, key.2
                    )))
                }
                Some(&shape) if m.shape() != shape => {
                    return Err(Error::dim(format!(
                        "consensus gain (i={}, j={}, rho={}) is {}x{}, expected {}x{}",
                        key.0,
                        key.1,
                        key.2,
                        m.nrows(),
                        m.ncols(),
                        shape.0,
                        shape.1
                    )))
                }
                _ => {}
            }
        }
        if let Some(key) = expected.keys().find(|k| !consensus.contains_key(k)) {
            return Err(Error::dim(format!(
                "missing consensus gain (i={}, j={}, rho={})",
                key.0, key.1, key.2
            )));
        }
        Ok(ObserverGains { local, consensus })
    }

    pub fn local(&self, i: usize) -> &Matrix {
        &self.local[i]
    }

    pub fn locals(&self) -> &[Matrix] {
        &self.local
    }

    pub fn consensus(&self, i: usize, j: usize, rho: usize) -> Option<&Matrix> {
        self.consensus.get(&(i, j, rho))
    }

    /// All consensus gains keyed by `(i, j, ρ)`.
    pub fn consensus_gains(&self) -> &BTreeMap<(usize, usize, usize), Matrix> {
        &self.consensus
    }

    /// Same local gains, all consensus gains set to zero.
    pub fn without_consensus(&self) -> ObserverGains {
        ObserverGains {
            local: self.local.clone(),
            consensus: self
                .consensus
                .iter()
                .map(|(k, m)| (*k, Matrix::zeros(m.nrows(), m.ncols())))
                .collect(),
        }
    }

    /// Consolidated jump gain `Kᵢⱼ = Σ_ρ W_{i,ρ} N_{i,j,ρ} W_{j,ρ−1}ᵀ` (`n × n`),
    /// so the jump reads `x̂ᵢ⁺ = x̂ᵢ + Σⱼ Kᵢⱼ (y_{i,j} − x̂ᵢ)`.
    pub fn jump_gain(&self, decomp: &MultiHopDecomposition, i: usize, j: usize) -> Matrix {
        let n = decomp.n();
        let mut k = Matrix::zeros(n, n);
        for rho in 1..=decomp.hop_depth(i) {
            if let Some(g) = self.consensus(i, j, rho) {
                if !g.is_empty() {
                    k += decomp.w(i, rho) * g * decomp.w(j, rho - 1).transpose();
                }
            }
        }
        k
    }

    /// Local injection gain `W_{i,0} Lᵢ` (`n × mᵢ`).
    pub fn injection_gain(&self, decomp: &MultiHopDecomposition, i: usize) -> Matrix {
        decomp.w(i, 0) * &self.local[i]
    }
}

fn consensus_shapes(
    decomp: &MultiHopDecomposition,
    graph: &SensorGraph,
) -> BTreeMap<(usize, usize, usize), (usize, usize)> {
    let mut shapes = BTreeMap::new();
    for i in 0..decomp.p() {
        for rho in 1..=decomp.hop_depth(i) {
            for &j in graph.in_neighbors(i) {
                shapes.insert((i, j, rho), (decomp.hop_dim(i, rho), decomp.hop_dim(j, rho - 1)));
            }
        }
    }
    shapes
}

/// `Lᵢ` placing the spectrum of `(W_{i,0}ᵀA − LᵢCᵢ)W_{i,0}` left of `ᾱ`.
pub fn design_local_gain(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    i: usize,
    targets: &GainTargets,
    tol: &Tolerance,
) -> Result<Matrix> {
    let w0 = decomp.w(i, 0);
    let f = w0.transpose() * plant.a() * &w0;
    let h = plant.output(i) * &w0;
    place_continuous(&f, &h, targets.abar, tol).map_err(|e| match e {
        Error::Placement { eigenvalue, target } => Error::consistency(format!(
            "agent {i}: local placement failed, eigenvalue {eigenvalue} above {target}"
        )),
        other => other,
    })
}

/// Intermediate quantities of one consensus design.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusDesign {
    /// `E_{i,ρ} = exp(W_{i,ρ}ᵀ A W_{i,ρ} T)`.
    pub e: Matrix,
    /// `C̄_{i,ρ} = col_{j∈Nᵢ}(W_{j,ρ−1}ᵀ) W_{i,ρ}`.
    pub cbar: Matrix,
    /// Placed gain `N̄_{i,ρ}` with `E − N̄C̄` Schur at the target radius.
    pub nbar: Matrix,
    /// Raw gains `N_{i,j,ρ}`, one per in-neighbour in ascending order.
    pub blocks: Vec<(usize, Matrix)>,
}

/// Consensus gains of agent `i` at hop `ρ`: place `E − N̄C̄`, then recover
/// `[N_{i,j₁,ρ} N_{i,j₂,ρ} …] = E⁻¹N̄`.
pub fn design_consensus_gains(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    graph: &SensorGraph,
    i: usize,
    rho: usize,
    targets: &GainTargets,
    tol: &Tolerance,
) -> Result<ConsensusDesign> {
    if rho == 0 || rho > decomp.hop_depth(i) {
        return Err(Error::invalid(format!(
            "agent {i} has consensus hops 1..={}, got {rho}",
            decomp.hop_depth(i)
        )));
    }
    let wi = decomp.w(i, rho);
    let e = matrix_exponential(&(wi.transpose() * plant.a() * &wi), targets.t_period)?;
    let cbar = decomp.consensus_output(graph, i, rho);
    let nbar = place_discrete(&e, &cbar, targets.bbar, tol).map_err(|err| match err {
        Error::Placement { eigenvalue, target } => Error::consistency(format!(
            "agent {i} hop {rho}: consensus placement failed, eigenvalue modulus {} above {target}",
            eigenvalue.norm()
        )),
        other => other,
    })?;
    let stacked = if e.is_empty() {
        Matrix::zeros(0, cbar.nrows())
    } else {
        e.clone()
            .lu()
            .solve(&nbar)
            .ok_or_else(|| Error::consistency("matrix exponential is singular"))?
    };
    let mut blocks = Vec::new();
    let mut col = 0;
    for &j in graph.in_neighbors(i) {
        let width = decomp.hop_dim(j, rho - 1);
        blocks.push((j, stacked.columns(col, width).into_owned()));
        col += width;
    }
    Ok(ConsensusDesign {
        e,
        cbar,
        nbar,
        blocks,
    })
}

/// Runs both designs for every agent and hop.
pub fn synthesize(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    graph: &SensorGraph,
    targets: &GainTargets,
    tol: &Tolerance,
) -> Result<ObserverGains> {
    let local = (0..decomp.p())
        .map(|i| design_local_gain(decomp, plant, i, targets, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut consensus = BTreeMap::new();
    for i in 0..decomp.p() {
        for rho in 1..=decomp.hop_depth(i) {
            let design = design_consensus_gains(decomp, plant, graph, i, rho, targets, tol)?;
            for (j, g) in design.blocks {
                consensus.insert((i, j, rho), g);
            }
        }
    }
    ObserverGains::new(decomp, graph, plant, local, consensus)
}

/// Flow block `(W_{i,0}ᵀA − LᵢCᵢ)W_{i,0}`.
pub fn local_closed_loop(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    gains: &ObserverGains,
    i: usize,
) -> Matrix {
    let w0 = decomp.w(i, 0);
    (w0.transpose() * plant.a() - gains.local(i) * plant.output(i)) * &w0
}

/// Jump block `E_{i,ρ}(I − Σⱼ N_{i,j,ρ} W_{j,ρ−1}ᵀ W_{i,ρ})`.
pub fn consensus_closed_loop(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    graph: &SensorGraph,
    gains: &ObserverGains,
    i: usize,
    rho: usize,
    t_period: f64,
) -> Result<Matrix> {
    let wi = decomp.w(i, rho);
    let k = wi.ncols();
    let e = matrix_exponential(&(wi.transpose() * plant.a() * &wi), t_period)?;
    let mut delta = Matrix::identity(k, k);
    for &j in graph.in_neighbors(i) {
        let g = gains
            .consensus(i, j, rho)
            .ok_or_else(|| Error::consistency(format!("missing gain (i={i}, j={j}, rho={rho})")))?;
        delta -= g * decomp.w(j, rho - 1).transpose() * &wi;
    }
    Ok(e * delta)
}

/// Which closed-loop block a check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Continuous block at hop 0, compared by spectral abscissa.
    Flow,
    /// Jump block at hop `1..=ℓᵢ`, compared by spectral radius.
    Jump,
    /// Residual unobservable block at hop `ℓᵢ + 1`, compared by the radius of
    /// its transition matrix over one period.
    Unobservable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub agent: usize,
    pub hop: usize,
    pub kind: BlockKind,
    pub dim: usize,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property1Report {
    pub blocks: Vec<BlockCheck>,
}

impl Property1Report {
    pub fn pass(&self) -> bool {
        self.blocks.iter().all(|b| b.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BlockCheck> {
        self.blocks.iter().filter(|b| !b.pass)
    }
}

/// Checks every closed-loop block of a gain set against its target. Empty blocks are reported
/// with value `−∞` (flow) or `0` (jump) and always pass.
pub fn verify_property1(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    graph: &SensorGraph,
    gains: &ObserverGains,
    targets: &GainTargets,
    tol: &Tolerance,
) -> Result<Property1Report> {
    let mut blocks = Vec::new();
    let contraction = targets.contraction();
    for i in 0..decomp.p() {
        let flow = local_closed_loop(decomp, plant, gains, i);
        let value = spectral_abscissa(&flow)?;
        blocks.push(BlockCheck {
            agent: i,
            hop: 0,
            kind: BlockKind::Flow,
            dim: flow.nrows(),
            value,
            bound: targets.abar,
            pass: value <= targets.abar + tol.spec_tol,
        });
        for rho in 1..=decomp.hop_depth(i) {
            let jump = consensus_closed_loop(decomp, plant, graph, gains, i, rho, targets.t_period)?;
            let value = spectral_radius(&jump)?;
            blocks.push(BlockCheck {
                agent: i,
                hop: rho,
                kind: BlockKind::Jump,
                dim: jump.nrows(),
                value,
                bound: targets.bbar,
                pass: value <= targets.bbar + tol.spec_tol,
            });
        }
        let last = decomp.hop_depth(i) + 1;
        let wu = decomp.w(i, last);
        let transition = matrix_exponential(&(wu.transpose() * plant.a() * &wu), targets.t_period)?;
        let value = spectral_radius(&transition)?;
        blocks.push(BlockCheck {
            agent: i,
            hop: last,
            kind: BlockKind::Unobservable,
            dim: wu.ncols(),
            value,
            bound: contraction,
            pass: value <= contraction + tol.spec_tol,
        });
    }
    Ok(Property1Report { blocks })
}

/// `max |E·[N_{i,j,ρ}]ⱼ − N̄|`, the gain recovery round-trip error.
pub fn recovery_error(design: &ConsensusDesign) -> f64 {
    let rows = design.e.nrows();
    let parts: Vec<&Matrix> = design.blocks.iter().map(|(_, m)| m).collect();
    max_abs(&(&design.e * hstack(&parts, rows) - &design.nbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build_decomposition, find_hop_depths};
    use crate::numerics::vstack;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn two_oscillators() -> Matrix {
        Matrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 2., 0., 0., -2., 0.],
        )
    }

    fn unit_row(n: usize, k: usize) -> Matrix {
        let mut r = Matrix::zeros(1, n);
        r[(0, k)] = 1.0;
        r
    }

    fn ring() -> (PlantModel, SensorGraph, MultiHopDecomposition) {
        let plant = PlantModel::new(two_oscillators(), (0..4).map(|k| unit_row(4, k)).collect()).unwrap();
        let graph = SensorGraph::ring(4);
        let depths = find_hop_depths(&plant, &graph, 1.0, None, &tol())
            .unwrap()
            .into_depths()
            .unwrap();
        let decomp = build_decomposition(&plant, &graph, &depths, &tol()).unwrap();
        (plant, graph, decomp)
    }

    #[test]
    fn target_validation() {
        assert!(GainTargets::new(1.0, 0.1, -0.5, 0.5).is_err());
        assert!(GainTargets::new(1.0, 0.1, -5.0, 0.95).is_err());
        assert!(GainTargets::new(0.0, 0.1, -5.0, 0.5).is_err());
        assert!(GainTargets::new(1.0, 0.0, -5.0, 0.5).is_err());
        let t = GainTargets::with_defaults(1.0, 0.1).unwrap();
        assert_eq!(t.abar, -5.0);
        assert_eq!(t.bbar, (-0.1_f64).exp());
    }

    #[test]
    fn ring_gains_meet_targets() {
        let (plant, graph, decomp) = ring();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let gains = synthesize(&decomp, &plant, &graph, &targets, &tol()).unwrap();
        let report = verify_property1(&decomp, &plant, &graph, &gains, &targets, &tol()).unwrap();
        assert!(report.pass(), "{:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(gains.local(2).shape(), (2, 1));
        assert_eq!(gains.consensus(2, 1, 1).unwrap().shape(), (2, 2));
        // agent 2 (0-based 1) has nothing new at hop 1
        assert_eq!(gains.consensus(1, 0, 1).unwrap().shape(), (0, 2));
    }

    #[test]
    fn zeroed_consensus_fails_with_unit_radius() {
        let (plant, graph, decomp) = ring();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let gains = synthesize(&decomp, &plant, &graph, &targets, &tol())
            .unwrap()
            .without_consensus();
        let report = verify_property1(&decomp, &plant, &graph, &gains, &targets, &tol()).unwrap();
        let failed: Vec<_> = report.failures().map(|b| (b.agent, b.hop)).collect();
        assert_eq!(failed, vec![(0, 1), (1, 2), (2, 1), (3, 2)]);
        for b in report.failures() {
            assert!((b.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn recovery_round_trip() {
        let (plant, graph, decomp) = ring();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let design = design_consensus_gains(&decomp, &plant, &graph, 2, 1, &targets, &tol()).unwrap();
        assert!(recovery_error(&design) < 1e-12);
    }

    #[test]
    fn deadbeat_single_neighbour() {
        let c0 = vstack(&[&unit_row(4, 0), &unit_row(4, 2)], 4);
        let plant = PlantModel::new(two_oscillators(), vec![c0, Matrix::zeros(0, 4)]).unwrap();
        let graph = SensorGraph::new(2, &[(0, 1)]).unwrap();
        let decomp = build_decomposition(&plant, &graph, &[0, 1], &tol()).unwrap();
        let targets = GainTargets::new(1.0, 0.1, -5.0, 0.0).unwrap();
        let gains = synthesize(&decomp, &plant, &graph, &targets, &tol()).unwrap();
        let jump = consensus_closed_loop(&decomp, &plant, &graph, &gains, 1, 1, 0.1).unwrap();
        assert!(spectral_radius(&jump).unwrap() <= 1e-9);
        assert!(gains.local(1).is_empty());
    }

    #[test]
    fn already_fast_block_is_accepted() {
        let a = -Matrix::identity(2, 2) * 10.0;
        let plant = PlantModel::new(a, vec![Matrix::identity(2, 2)]).unwrap();
        let graph = SensorGraph::isolated(1);
        let decomp = build_decomposition(&plant, &graph, &[0], &tol()).unwrap();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let l = design_local_gain(&decomp, &plant, 0, &targets, &tol()).unwrap();
        let closed = local_closed_loop(
            &decomp,
            &plant,
            &ObserverGains::new(&decomp, &graph, &plant, vec![l], BTreeMap::new()).unwrap(),
            0,
        );
        assert!(spectral_abscissa(&closed).unwrap() <= -5.0 + 1e-9);
    }

    #[test]
    fn empty_plant_is_vacuous() {
        let plant = PlantModel::new(Matrix::zeros(0, 0), vec![Matrix::zeros(0, 0)]).unwrap();
        let graph = SensorGraph::isolated(1);
        let decomp = build_decomposition(&plant, &graph, &[0], &tol()).unwrap();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let gains = synthesize(&decomp, &plant, &graph, &targets, &tol()).unwrap();
        assert!(
            verify_property1(&decomp, &plant, &graph, &gains, &targets, &tol())
                .unwrap()
                .pass()
        );
    }

    #[test]
    fn shape_validation() {
        let (plant, graph, decomp) = ring();
        let targets = GainTargets::with_defaults(1.0, 0.1).unwrap();
        let gains = synthesize(&decomp, &plant, &graph, &targets, &tol()).unwrap();
        let mut consensus = gains.consensus_gains().clone();
        consensus.remove(&(2, 1, 1));
        assert!(ObserverGains::new(&decomp, &graph, &plant, gains.locals().to_vec(), consensus).is_err());
        let mut bad = gains.locals().to_vec();
        bad[0] = Matrix::zeros(3, 1);
        assert!(ObserverGains::new(&decomp, &graph, &plant, bad, gains.consensus_gains().clone()).is_err());
    }
}
