//! Multi-hop observability decomposition.
//!
//! Agent `i` aggregates, after `ρ` communication hops, the outputs of every
//! agent with a directed path of length at most `ρ` into `i` (the ρ-hop output
//! matrix `C_{i,ρ}`). The observable subspaces `O_{i,ρ}` of `(C_{i,ρ}, A)` are
//! nested; the innovation basis `W_{i,ρ}` spans the directions that become
//! observable exactly at hop `ρ`, and `W_{i,ℓᵢ+1}` spans what is still
//! unobservable at the agent's hop depth `ℓᵢ`. Stacking `W_{i,0..ℓᵢ+1}` gives
//! an orthogonal matrix.

use num_complex::Complex64;

use crate::model::{PlantModel, SensorGraph};
use crate::numerics::{
    complement, eigenvalues, hstack, image_basis, orthonormality_defect, subspace_intersection, vstack,
    SubspaceBasis, Tolerance,
};
use crate::{Error, Matrix, Result};

/// Containment and orthogonality checks on the decomposition use this slack.
const DECOMPOSITION_TOL: f64 = 1e-9;

/// ρ-hop output matrix: `C_{i,0} = Cᵢ`, `C_{i,ρ} = [C_{i,ρ−1}; C_{j,ρ−1} for j ∈ Nᵢ]`
/// with neighbours in ascending order. Duplicate rows are kept.
pub fn multihop_output(plant: &PlantModel, graph: &SensorGraph, i: usize, rho: usize) -> Result<Matrix> {
    check_agents(plant, graph)?;
    if i >= plant.p() {
        return Err(Error::invalid(format!("unknown agent {i}")));
    }
    Ok(multihop_table(plant, graph, rho).swap_remove(rho).swap_remove(i))
}

/// `table[ρ][i] = C_{i,ρ}` for every hop up to `max_hop`.
fn multihop_table(plant: &PlantModel, graph: &SensorGraph, max_hop: usize) -> Vec<Vec<Matrix>> {
    let n = plant.n();
    let mut table: Vec<Vec<Matrix>> = vec![plant.outputs().to_vec()];
    for rho in 1..=max_hop {
        let prev = &table[rho - 1];
        let next = (0..plant.p())
            .map(|i| {
                let mut blocks = vec![&prev[i]];
                blocks.extend(graph.in_neighbors(i).iter().map(|&j| &prev[j]));
                vstack(&blocks, n)
            })
            .collect();
        table.push(next);
    }
    table
}

fn check_agents(plant: &PlantModel, graph: &SensorGraph) -> Result<()> {
    if plant.p() != graph.p() {
        return Err(Error::dim(format!(
            "plant has {} outputs but graph has {} nodes",
            plant.p(),
            graph.p()
        )));
    }
    Ok(())
}

/// Observable subspace of `(C, A)`: the span of the rows of
/// `[C; CA; …; CA^{n−1}]`, built as an orthonormalised Krylov sequence in `Aᵀ`.
pub fn observable_subspace(c: &Matrix, a: &Matrix, tol: &Tolerance) -> Result<SubspaceBasis> {
    let n = a.nrows();
    if !a.is_square() || c.ncols() != n {
        return Err(Error::dim(format!(
            "pair (C: {}x{}, A: {}x{}) is incompatible",
            c.nrows(),
            c.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let mut basis = image_basis(&c.transpose(), tol)?;
    let a_t = a.transpose();
    while !basis.is_empty() && basis.dim() < n {
        let grown = image_basis(&hstack(&[basis.basis(), &(&a_t * basis.basis())], n), tol)?;
        if grown.dim() == basis.dim() {
            break;
        }
        basis = grown;
    }
    Ok(basis)
}

/// Outcome of an α-detectability test.
#[derive(Debug, Clone, PartialEq)]
pub struct Detectability {
    pub detectable: bool,
    /// Unobservable eigenvalue with the largest real part, when the test fails.
    pub witness: Option<Complex64>,
    pub unobservable_dim: usize,
}

fn detectability_from_observable(
    observable: &SubspaceBasis,
    a: &Matrix,
    alpha: f64,
    tol: &Tolerance,
) -> Result<Detectability> {
    let unobs = complement(observable, tol)?;
    let restricted = unobs.basis().transpose() * a * unobs.basis();
    let worst = eigenvalues(&restricted)?
        .into_iter()
        .max_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let detectable = worst.is_none_or(|z| z.re <= -alpha + tol.spec_tol);
    Ok(Detectability {
        detectable,
        witness: if detectable { None } else { worst },
        unobservable_dim: unobs.dim(),
    })
}

/// True iff every mode of `A` on the unobservable subspace of `(C, A)` has
/// real part at most `−α` (within `spec_tol`).
pub fn is_alpha_detectable(c: &Matrix, a: &Matrix, alpha: f64, tol: &Tolerance) -> Result<Detectability> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("rate alpha = {alpha} must be positive")));
    }
    let obs = observable_subspace(c, a, tol)?;
    detectability_from_observable(&obs, a, alpha, tol)
}

/// `table[ρ][i] = O_{i,ρ}` for hops `0..=max_hop`, using
/// `O_{i,ρ} = O_{i,ρ−1} + Σ_{j∈Nᵢ} O_{j,ρ−1}` (observable subspaces of stacked
/// outputs add up) instead of expanding `C_{i,ρ}`.
pub fn observable_subspaces(
    plant: &PlantModel,
    graph: &SensorGraph,
    max_hop: usize,
    tol: &Tolerance,
) -> Result<Vec<Vec<SubspaceBasis>>> {
    check_agents(plant, graph)?;
    let n = plant.n();
    let hop0 = plant
        .outputs()
        .iter()
        .map(|c| observable_subspace(c, plant.a(), tol))
        .collect::<Result<Vec<_>>>()?;
    let mut table = vec![hop0];
    for rho in 1..=max_hop {
        let prev = &table[rho - 1];
        let next = (0..plant.p())
            .map(|i| {
                let mut blocks = vec![prev[i].basis()];
                blocks.extend(graph.in_neighbors(i).iter().map(|&j| prev[j].basis()));
                image_basis(&hstack(&blocks, n), tol)
            })
            .collect::<Result<Vec<_>>>()?;
        table.push(next);
    }
    Ok(table)
}

/// Hop-depth search result for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentHopSearch {
    /// Smallest `ℓ` such that `(C_{i,ℓ}, A)` is α-detectable.
    pub hop_depth: Option<usize>,
    /// Offending eigenvalue at the largest hop examined, if none worked.
    pub witness: Option<Complex64>,
    /// `dim O_{i,ρ}` for every hop examined.
    pub observable_dims: Vec<usize>,
}

/// Result of the collective α-detectability test.
#[derive(Debug, Clone, PartialEq)]
pub struct HopDepthSearch {
    pub alpha: f64,
    pub max_hop: usize,
    pub agents: Vec<AgentHopSearch>,
}

impl HopDepthSearch {
    pub fn is_collectively_detectable(&self) -> bool {
        self.agents.iter().all(|a| a.hop_depth.is_some())
    }

    /// Hop depths of all agents, if every agent has one.
    pub fn depths(&self) -> Option<Vec<usize>> {
        self.agents.iter().map(|a| a.hop_depth).collect()
    }

    pub fn failing_agents(&self) -> Vec<usize> {
        self.agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.hop_depth.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    /// Hop depths, or an error naming the agents without one.
    pub fn into_depths(self) -> Result<Vec<usize>> {
        let failing = self.failing_agents();
        self.depths().ok_or_else(|| {
            Error::invalid(format!(
                "plant is not collectively {}-detectable: agents {failing:?} have no hop depth up to {}",
                self.alpha, self.max_hop
            ))
        })
    }
}

/// Default hop cap: a path in a `p`-node graph has at most `p − 1` edges.
pub fn default_max_hop(graph: &SensorGraph) -> usize {
    graph.p().saturating_sub(1)
}

/// Minimal hop depth per agent, up to `max_hop` (default `p − 1`).
pub fn find_hop_depths(
    plant: &PlantModel,
    graph: &SensorGraph,
    alpha: f64,
    max_hop: Option<usize>,
    tol: &Tolerance,
) -> Result<HopDepthSearch> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("rate alpha = {alpha} must be positive")));
    }
    let max_hop = max_hop.unwrap_or_else(|| default_max_hop(graph));
    let table = observable_subspaces(plant, graph, max_hop, tol)?;
    let mut agents = Vec::with_capacity(plant.p());
    for i in 0..plant.p() {
        let mut found = None;
        let mut witness = None;
        let mut dims = Vec::new();
        for (rho, hop) in table.iter().enumerate() {
            dims.push(hop[i].dim());
            let d = detectability_from_observable(&hop[i], plant.a(), alpha, tol)?;
            if d.detectable {
                found = Some(rho);
                break;
            }
            witness = d.witness;
        }
        agents.push(AgentHopSearch {
            hop_depth: found,
            witness: if found.is_some() { None } else { witness },
            observable_dims: dims,
        });
    }
    Ok(HopDepthSearch {
        alpha,
        max_hop,
        agents,
    })
}

/// Decomposition data of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDecomposition {
    pub hop_depth: usize,
    /// `W_{i,0}, …, W_{i,ℓᵢ+1}`; the last one spans the residual unobservable
    /// subspace and may be empty.
    pub innovation: Vec<SubspaceBasis>,
    /// `C_{i,0}, …, C_{i,ℓᵢ}`.
    pub multihop_outputs: Vec<Matrix>,
    /// `O_{i,0}, …, O_{i,ℓᵢ}`.
    pub observable: Vec<SubspaceBasis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiHopDecomposition {
    n: usize,
    agents: Vec<AgentDecomposition>,
}

impl MultiHopDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, i: usize) -> &AgentDecomposition {
        &self.agents[i]
    }

    pub fn agents(&self) -> &[AgentDecomposition] {
        &self.agents
    }

    pub fn hop_depth(&self, i: usize) -> usize {
        self.agents[i].hop_depth
    }

    pub fn hop_depths(&self) -> Vec<usize> {
        self.agents.iter().map(|a| a.hop_depth).collect()
    }

    /// `ℓ̄ = maxᵢ (ℓᵢ + 1)`.
    pub fn max_hop(&self) -> usize {
        self.agents.iter().map(|a| a.hop_depth + 1).max().unwrap_or(0)
    }

    /// `W_{i,ρ}`, or `None` beyond the agent's last hop `ℓᵢ + 1`.
    pub fn innovation(&self, i: usize, rho: usize) -> Option<&SubspaceBasis> {
        self.agents[i].innovation.get(rho)
    }

    /// `n_{i,ρ}`: number of columns of `W_{i,ρ}`, zero beyond the last hop.
    pub fn hop_dim(&self, i: usize, rho: usize) -> usize {
        self.innovation(i, rho).map_or(0, SubspaceBasis::dim)
    }

    /// `W_{i,ρ}` as a matrix, `n × 0` beyond the last hop.
    pub fn w(&self, i: usize, rho: usize) -> Matrix {
        self.innovation(i, rho)
            .map(|b| b.basis().clone())
            .unwrap_or_else(|| Matrix::zeros(self.n, 0))
    }

    /// The orthogonal matrix `Wᵢ = [W_{i,0} … W_{i,ℓᵢ+1}]`.
    pub fn stacked(&self, i: usize) -> Matrix {
        let blocks: Vec<&Matrix> = self.agents[i].innovation.iter().map(|b| b.basis()).collect();
        hstack(&blocks, self.n)
    }

    /// Consensus output matrix `C̄_{i,ρ} = col_{j∈Nᵢ}(W_{j,ρ−1}ᵀ) W_{i,ρ}`.
    pub fn consensus_output(&self, graph: &SensorGraph, i: usize, rho: usize) -> Matrix {
        debug_assert!(rho >= 1);
        let wi = self.w(i, rho);
        let rows: Vec<Matrix> = graph
            .in_neighbors(i)
            .iter()
            .map(|&j| self.w(j, rho - 1).transpose() * &wi)
            .collect();
        let refs: Vec<&Matrix> = rows.iter().collect();
        vstack(&refs, wi.ncols())
    }
}

/// Builds `W_{i,ρ} = Ō_{i,ρ−1} ∩ O_{i,ρ}` (with `Ō_{i,−1} = ℝⁿ`) for
/// `ρ ≤ ℓᵢ` and `W_{i,ℓᵢ+1} = Ō_{i,ℓᵢ}`, then verifies orthogonality,
/// containment and full column rank of every consensus output matrix.
pub fn build_decomposition(
    plant: &PlantModel,
    graph: &SensorGraph,
    hop_depths: &[usize],
    tol: &Tolerance,
) -> Result<MultiHopDecomposition> {
    check_agents(plant, graph)?;
    if hop_depths.len() != plant.p() {
        return Err(Error::dim(format!(
            "{} hop depths for {} agents",
            hop_depths.len(),
            plant.p()
        )));
    }
    let n = plant.n();
    let top = hop_depths.iter().copied().max().unwrap_or(0);
    let obs = observable_subspaces(plant, graph, top, tol)?;
    let outputs = multihop_table(plant, graph, top);

    let mut agents = Vec::with_capacity(plant.p());
    for (i, &depth) in hop_depths.iter().enumerate() {
        let mut innovation = Vec::with_capacity(depth + 2);
        let mut prev_unobs = SubspaceBasis::full(n);
        for hop in obs.iter().take(depth + 1) {
            innovation.push(subspace_intersection(&prev_unobs, &hop[i], tol)?);
            prev_unobs = complement(&hop[i], tol)?;
        }
        innovation.push(prev_unobs);
        agents.push(AgentDecomposition {
            hop_depth: depth,
            innovation,
            multihop_outputs: outputs.iter().take(depth + 1).map(|h| h[i].clone()).collect(),
            observable: obs.iter().take(depth + 1).map(|h| h[i].clone()).collect(),
        });
    }
    let decomp = MultiHopDecomposition { n, agents };
    verify_decomposition(&decomp, graph, tol)?;
    Ok(decomp)
}

fn verify_decomposition(d: &MultiHopDecomposition, graph: &SensorGraph, tol: &Tolerance) -> Result<()> {
    let n = d.n();
    for i in 0..d.p() {
        let agent = d.agent(i);
        let stacked = d.stacked(i);
        if stacked.ncols() != n {
            return Err(Error::consistency(format!(
                "agent {i}: innovation bases have {} columns in total, expected {n}",
                stacked.ncols()
            )));
        }
        let defect = orthonormality_defect(&stacked);
        if defect > DECOMPOSITION_TOL {
            return Err(Error::consistency(format!(
                "agent {i}: stacked innovation basis is not orthogonal (defect {defect:.2e})"
            )));
        }
        for rho in 0..=agent.hop_depth {
            let w = agent.innovation[rho].basis();
            if agent.observable[rho].residual_of(w) > DECOMPOSITION_TOL {
                return Err(Error::consistency(format!(
                    "agent {i}: W_{{{rho}}} leaves the observable subspace"
                )));
            }
            if rho > 0 {
                let prev = agent.observable[rho - 1].basis();
                let leak = (prev.transpose() * w).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                if leak > DECOMPOSITION_TOL {
                    return Err(Error::consistency(format!(
                        "agent {i}: W_{{{rho}}} is not inside the previous unobservable subspace"
                    )));
                }
            }
        }
        for rho in 1..=agent.hop_depth {
            let n_i = d.hop_dim(i, rho);
            if n_i == 0 {
                continue;
            }
            for &j in graph.in_neighbors(i) {
                if d.innovation(j, rho - 1).is_none() {
                    return Err(Error::consistency(format!(
                        "agent {i} hop {rho} needs hop {} of neighbour {j}, whose depth is {}",
                        rho - 1,
                        d.hop_depth(j)
                    )));
                }
            }
            let cbar = d.consensus_output(graph, i, rho);
            let rank = if cbar.nrows() == 0 {
                0
            } else {
                crate::numerics::checked_svd(&cbar)
                    .singular_values
                    .iter()
                    .filter(|&&s| s > tol.rank_tol)
                    .count()
            };
            if rank < n_i {
                return Err(Error::consistency(format!(
                    "agent {i} hop {rho}: consensus output matrix has rank {rank} < {n_i}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::subspace_distance;

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

    fn coordinate_span(n: usize, ks: &[usize]) -> SubspaceBasis {
        let mut m = Matrix::zeros(n, ks.len());
        for (c, &k) in ks.iter().enumerate() {
            m[(k, c)] = 1.0;
        }
        SubspaceBasis::from_orthonormal(m).unwrap()
    }

    fn ring_plant() -> (PlantModel, SensorGraph) {
        let plant = PlantModel::new(two_oscillators(), (0..4).map(|k| unit_row(4, k)).collect()).unwrap();
        (plant, SensorGraph::ring(4))
    }

    #[test]
    fn isolated_agent_keeps_own_rows() {
        let plant = PlantModel::new(two_oscillators(), vec![unit_row(4, 0), unit_row(4, 2)]).unwrap();
        let g = SensorGraph::isolated(2);
        let c = multihop_output(&plant, &g, 1, 3).unwrap();
        let rows = image_basis(&c.transpose(), &tol()).unwrap();
        assert!(subspace_distance(&rows, &coordinate_span(4, &[2])) < 1e-12);
    }

    #[test]
    fn ring_agent_three_one_hop() {
        let (plant, g) = ring_plant();
        let c = multihop_output(&plant, &g, 2, 1).unwrap();
        let expected = vstack(&[&unit_row(4, 2), &unit_row(4, 1)], 4);
        assert_eq!(c, expected);
    }

    #[test]
    fn complete_graph_one_hop_sees_everything() {
        let (plant, _) = ring_plant();
        let edges: Vec<_> = (0..4)
            .flat_map(|j| (0..4).filter(move |&i| i != j).map(move |i| (j, i)))
            .collect();
        let g = SensorGraph::new(4, &edges).unwrap();
        let c = multihop_output(&plant, &g, 0, 1).unwrap();
        assert_eq!(image_basis(&c.transpose(), &tol()).unwrap().dim(), 4);
    }

    #[test]
    fn unknown_agent() {
        let (plant, g) = ring_plant();
        assert!(multihop_output(&plant, &g, 9, 0).is_err());
    }

    #[test]
    fn observable_subspace_examples() {
        let a = two_oscillators();
        assert_eq!(
            observable_subspace(&Matrix::identity(4, 4), &a, &tol())
                .unwrap()
                .dim(),
            4
        );
        let o = observable_subspace(&unit_row(4, 0), &a, &tol()).unwrap();
        assert!(subspace_distance(&o, &coordinate_span(4, &[0, 1])) < 1e-12);
        assert_eq!(
            observable_subspace(&Matrix::zeros(1, 4), &a, &tol())
                .unwrap()
                .dim(),
            0
        );
    }

    #[test]
    fn detectability_examples() {
        let a = two_oscillators();
        let d = is_alpha_detectable(&unit_row(4, 0), &a, 1.0, &tol()).unwrap();
        assert!(!d.detectable);
        let w = d.witness.unwrap();
        assert!(w.re.abs() < 1e-12 && (w.im.abs() - 2.0).abs() < 1e-12);

        assert!(
            is_alpha_detectable(&Matrix::identity(4, 4), &a, 3.0, &tol())
                .unwrap()
                .detectable
        );
        let stable = -Matrix::identity(3, 3) * 2.0;
        assert!(
            is_alpha_detectable(&Matrix::zeros(1, 3), &stable, 1.0, &tol())
                .unwrap()
                .detectable
        );
        // a mode exactly at -alpha is accepted
        let edge = -Matrix::identity(1, 1);
        assert!(
            is_alpha_detectable(&Matrix::zeros(1, 1), &edge, 1.0, &tol())
                .unwrap()
                .detectable
        );
        assert!(is_alpha_detectable(&Matrix::zeros(1, 1), &edge, 0.0, &tol()).is_err());
    }

    #[test]
    fn ring_hop_depths() {
        // Agents 2 and 4 (1-based) hear first from an agent measuring the same
        // oscillator, so they need a second hop.
        let (plant, g) = ring_plant();
        let search = find_hop_depths(&plant, &g, 1.0, None, &tol()).unwrap();
        assert_eq!(search.depths().unwrap(), vec![1, 2, 1, 2]);
        assert_eq!(search.agents[1].observable_dims, vec![2, 2, 4]);
    }

    #[test]
    fn stable_plant_needs_no_hops() {
        let a = -Matrix::identity(3, 3) * 2.0;
        let plant = PlantModel::new(a, vec![Matrix::zeros(1, 3); 3]).unwrap();
        let search = find_hop_depths(&plant, &SensorGraph::ring(3), 1.0, None, &tol()).unwrap();
        assert_eq!(search.depths().unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn disconnected_agents_fail() {
        let plant = PlantModel::new(two_oscillators(), vec![unit_row(4, 0), unit_row(4, 2)]).unwrap();
        let search = find_hop_depths(&plant, &SensorGraph::isolated(2), 1.0, None, &tol()).unwrap();
        assert!(!search.is_collectively_detectable());
        assert_eq!(search.failing_agents(), vec![0, 1]);
        let w0 = search.agents[0].witness.unwrap();
        let w1 = search.agents[1].witness.unwrap();
        assert!((w0.im.abs() - 2.0).abs() < 1e-12);
        assert!((w1.im.abs() - 1.0).abs() < 1e-12);
        assert!(search.into_depths().is_err());
    }

    #[test]
    fn ring_agent_three_innovations() {
        let (plant, g) = ring_plant();
        let d = build_decomposition(&plant, &g, &[1, 2, 1, 2], &tol()).unwrap();
        let a3 = d.agent(2);
        assert_eq!(a3.innovation.len(), 3);
        assert!(subspace_distance(&a3.innovation[0], &coordinate_span(4, &[2, 3])) < 1e-12);
        assert!(subspace_distance(&a3.innovation[1], &coordinate_span(4, &[0, 1])) < 1e-12);
        assert!(a3.innovation[2].is_empty());
        // agent 2 learns nothing new at hop 1
        assert_eq!(d.hop_dim(1, 1), 0);
        assert_eq!(d.hop_dim(1, 2), 2);
        assert_eq!(d.max_hop(), 3);
    }

    #[test]
    fn full_output_single_agent() {
        let plant = PlantModel::new(two_oscillators(), vec![Matrix::identity(4, 4)]).unwrap();
        let d = build_decomposition(&plant, &SensorGraph::isolated(1), &[0], &tol()).unwrap();
        assert_eq!(d.hop_dim(0, 0), 4);
        assert_eq!(d.hop_dim(0, 1), 0);
        assert!(orthonormality_defect(&d.stacked(0)) < 1e-12);
    }

    #[test]
    fn blind_agent_learns_from_neighbour() {
        let c0 = vstack(&[&unit_row(4, 0), &unit_row(4, 2)], 4);
        let plant = PlantModel::new(two_oscillators(), vec![c0, Matrix::zeros(0, 4)]).unwrap();
        let g = SensorGraph::new(2, &[(0, 1)]).unwrap();
        let depths = find_hop_depths(&plant, &g, 1.0, None, &tol())
            .unwrap()
            .into_depths()
            .unwrap();
        assert_eq!(depths, vec![0, 1]);
        let d = build_decomposition(&plant, &g, &depths, &tol()).unwrap();
        assert_eq!(d.hop_dim(1, 0), 0);
        assert_eq!(d.hop_dim(1, 1), 4);
        assert!(d.innovation(1, 2).unwrap().is_empty());
    }

    #[test]
    fn rejects_wrong_depth_count() {
        let (plant, g) = ring_plant();
        assert!(build_decomposition(&plant, &g, &[1, 1], &tol()).is_err());
    }
}
