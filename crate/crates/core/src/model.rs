//! Plant and communication-graph data.

use std::collections::BTreeSet;

use crate::numerics::ensure_finite;
use crate::{Error, Matrix, Result};

/// Linear plant `ẋ = A x + d₀`, `yᵢ = Cᵢ x + dᵢ` observed by `p` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    a: Matrix,
    outputs: Vec<Matrix>,
}

impl PlantModel {
    pub fn new(a: Matrix, outputs: Vec<Matrix>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        ensure_finite(&a, "plant matrix A")?;
        let n = a.nrows();
        for (i, c) in outputs.iter().enumerate() {
            ensure_finite(c, "output matrix")?;
            if c.ncols() != n {
                return Err(Error::dim(format!(
                    "output matrix of agent {i} has {} columns, plant has {n} states",
                    c.ncols()
                )));
            }
            if c.nrows() > n {
                return Err(Error::dim(format!(
                    "agent {i} measures {} outputs, more than the {n} states",
                    c.nrows()
                )));
            }
        }
        Ok(PlantModel { a, outputs })
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of agents.
    pub fn p(&self) -> usize {
        self.outputs.len()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn output(&self, agent: usize) -> &Matrix {
        &self.outputs[agent]
    }

    pub fn outputs(&self) -> &[Matrix] {
        &self.outputs
    }

    /// `m_i` for every agent.
    pub fn output_dims(&self) -> Vec<usize> {
        self.outputs.iter().map(|c| c.nrows()).collect()
    }
}

/// Directed communication graph; an edge `(j, i)` means `j` transmits to `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorGraph {
    p: usize,
    in_neighbors: Vec<Vec<usize>>,
}

impl SensorGraph {
    /// Builds the graph from zero-based `(from, to)` pairs. Duplicate edges
    /// collapse; self-loops and out-of-range nodes are rejected.
    pub fn new(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); p];
        for &(j, i) in edges {
            if j >= p || i >= p {
                return Err(Error::invalid(format!(
                    "edge ({j}, {i}) references a node outside 0..{p}"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop on node {i}")));
            }
            sets[i].insert(j);
        }
        Ok(SensorGraph {
            p,
            in_neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Graph without edges.
    pub fn isolated(p: usize) -> Self {
        SensorGraph {
            p,
            in_neighbors: vec![Vec::new(); p],
        }
    }

    /// Directed ring `0 → 1 → … → p−1 → 0`.
    pub fn ring(p: usize) -> Self {
        let edges: Vec<_> = (0..p).map(|j| (j, (j + 1) % p)).filter(|(a, b)| a != b).collect();
        SensorGraph::new(p, &edges).expect("ring edges are valid")
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// In-neighbourhood of `i` in ascending order.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    /// All edges `(from, to)`, sorted by receiver then sender.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.in_neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().map(move |&j| (j, i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_bad_nodes() {
        assert!(SensorGraph::new(3, &[(1, 1)]).is_err());
        assert!(SensorGraph::new(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn neighbourhoods_are_sorted_and_deduplicated() {
        let g = SensorGraph::new(4, &[(3, 0), (1, 0), (3, 0), (2, 1)]).unwrap();
        assert_eq!(g.in_neighbors(0), &[1, 3]);
        assert_eq!(g.in_neighbors(1), &[2]);
        assert!(g.in_neighbors(2).is_empty());
        assert_eq!(g.edges(), vec![(1, 0), (3, 0), (2, 1)]);
    }

    #[test]
    fn ring_orientation() {
        let g = SensorGraph::ring(4);
        assert_eq!(g.in_neighbors(0), &[3]);
        assert_eq!(g.in_neighbors(2), &[1]);
    }

    #[test]
    fn plant_validation() {
        let a = Matrix::identity(2, 2);
        assert!(PlantModel::new(a.clone(), vec![Matrix::zeros(1, 3)]).is_err());
        assert!(PlantModel::new(a.clone(), vec![Matrix::zeros(3, 2)]).is_err());
        assert!(PlantModel::new(Matrix::zeros(2, 3), vec![]).is_err());
        let p = PlantModel::new(a, vec![Matrix::zeros(0, 2), Matrix::zeros(1, 2)]).unwrap();
        assert_eq!(p.output_dims(), vec![0, 1]);
    }
}
