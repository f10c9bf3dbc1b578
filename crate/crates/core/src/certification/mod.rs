//! Hybrid error system and its ISS certificate.
//!
//! With `eᵢ = x − x̂ᵢ` and `ε_{i,ρ} = W_{i,ρ}ᵀ eᵢ`, the estimation errors of all
//! agents evolve as
//!
//! ```text
//! ε̇  = A_ε ε + R d     between communication instants,
//! ε⁺ = J_ε ε + S w     at t = kT,
//! ```
//!
//! with `d = (d₀, d₁, …, d_p)` and `w = (w₁, …, w_p)`, `wᵢ = (w_{i,j})_{j∈Nᵢ}`.
//! Coordinates are ordered hop-major from the highest hop down to hop 0, and
//! by ascending agent inside a hop. In this order `A_ε` and `J_ε` are block
//! upper triangular, their diagonal blocks being the per-agent local and consensus matrices.

mod certificate;

pub use certificate::{
    check_iss_bound, compute_certificate, monodromy, IssCertificate, IssReport, Monodromy,
    DEFAULT_GRID_POINTS,
};

use std::collections::BTreeMap;
use std::ops::Range;

use crate::decomposition::MultiHopDecomposition;
use crate::model::{PlantModel, SensorGraph};
use crate::numerics::max_abs;
use crate::synthesis::ObserverGains;
use crate::{Error, Matrix, Result, Vector};

/// Structural zeros of the error matrices are checked at this relative size
/// before being cleared.
const STRUCTURE_TOL: f64 = 1e-10;

/// Position of the coordinates `ε_{i,ρ}` inside `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorBlock {
    pub agent: usize,
    pub hop: usize,
    pub offset: usize,
    pub dim: usize,
}

impl ErrorBlock {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.dim
    }
}

/// Coordinate bookkeeping of `ε`, `d` and `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorLayout {
    n: usize,
    p: usize,
    blocks: Vec<ErrorBlock>,
    index: BTreeMap<(usize, usize), usize>,
    max_hop: usize,
    d_offsets: Vec<usize>,
    d_dim: usize,
    w_offsets: BTreeMap<(usize, usize), usize>,
    w_dim: usize,
}

impl ErrorLayout {
    pub fn new(decomp: &MultiHopDecomposition, graph: &SensorGraph, output_dims: &[usize]) -> Result<Self> {
        let n = decomp.n();
        let p = decomp.p();
        if graph.p() != p || output_dims.len() != p {
            return Err(Error::dim(
                "agent count differs between decomposition, graph and outputs",
            ));
        }
        let max_hop = decomp.max_hop();
        let mut blocks = Vec::new();
        let mut index = BTreeMap::new();
        let mut offset = 0;
        for hop in (0..=max_hop).rev() {
            for i in 0..p {
                if hop <= decomp.hop_depth(i) + 1 {
                    let dim = decomp.hop_dim(i, hop);
                    index.insert((i, hop), blocks.len());
                    blocks.push(ErrorBlock {
                        agent: i,
                        hop,
                        offset,
                        dim,
                    });
                    offset += dim;
                }
            }
        }
        debug_assert_eq!(offset, n * p);

        let mut d_offsets = vec![0];
        let mut d_dim = n;
        for &m in output_dims {
            d_offsets.push(d_dim);
            d_dim += m;
        }
        let mut w_offsets = BTreeMap::new();
        let mut w_dim = 0;
        for i in 0..p {
            for &j in graph.in_neighbors(i) {
                w_offsets.insert((i, j), w_dim);
                w_dim += n;
            }
        }
        Ok(ErrorLayout {
            n,
            p,
            blocks,
            index,
            max_hop,
            d_offsets,
            d_dim,
            w_offsets,
            w_dim,
        })
    }

    /// Plant state dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `n_ε = p·n`.
    pub fn n_eps(&self) -> usize {
        self.n * self.p
    }

    /// `ℓ̄`, the highest hop present.
    pub fn max_hop(&self) -> usize {
        self.max_hop
    }

    /// Blocks in storage order.
    pub fn blocks(&self) -> &[ErrorBlock] {
        &self.blocks
    }

    pub fn block(&self, agent: usize, hop: usize) -> Option<&ErrorBlock> {
        self.index.get(&(agent, hop)).map(|&k| &self.blocks[k])
    }

    /// Coordinates of `ε_{i,ρ}`; empty if the block does not exist.
    pub fn range(&self, agent: usize, hop: usize) -> Range<usize> {
        self.block(agent, hop).map_or(0..0, ErrorBlock::range)
    }

    /// Coordinates of the whole hop `ε_ρ`.
    pub fn hop_range(&self, hop: usize) -> Range<usize> {
        let mut it = self.blocks.iter().filter(|b| b.hop == hop);
        match it.next() {
            None => 0..0,
            Some(first) => {
                let end = it
                    .next_back()
                    .map_or(first.offset + first.dim, |b| b.offset + b.dim);
                first.offset..end
            }
        }
    }

    /// `dim d = n + Σ mᵢ`.
    pub fn d_dim(&self) -> usize {
        self.d_dim
    }

    /// Coordinates of `d₀` (`None`) or `dᵢ` (`Some(i)`) inside `d`.
    pub fn d_range(&self, agent: Option<usize>) -> Range<usize> {
        match agent {
            None => 0..self.n,
            Some(i) => {
                let end = if i + 1 < self.p {
                    self.d_offsets[i + 2]
                } else {
                    self.d_dim
                };
                self.d_offsets[i + 1]..end
            }
        }
    }

    /// `dim w = n · |E|`.
    pub fn w_dim(&self) -> usize {
        self.w_dim
    }

    /// Coordinates of `w_{i,j}` inside `w`.
    pub fn w_range(&self, i: usize, j: usize) -> Option<Range<usize>> {
        self.w_offsets.get(&(i, j)).map(|&o| o..o + self.n)
    }

    /// Orthogonal `T` (`pn × pn`) with `col(eᵢ) = T ε`.
    pub fn transform(&self, decomp: &MultiHopDecomposition) -> Matrix {
        let n = self.n;
        let mut t = Matrix::zeros(n * self.p, self.n_eps());
        for b in &self.blocks {
            if b.dim > 0 {
                t.view_mut((b.agent * n, b.offset), (n, b.dim))
                    .copy_from(decomp.innovation(b.agent, b.hop).expect("block exists").basis());
            }
        }
        t
    }

    /// `ε` from the per-agent errors `eᵢ`.
    pub fn to_eps(&self, decomp: &MultiHopDecomposition, errors: &[Vector]) -> Vector {
        let mut eps = Vector::zeros(self.n_eps());
        for b in &self.blocks {
            if b.dim > 0 {
                let w = decomp.innovation(b.agent, b.hop).expect("block exists").basis();
                eps.rows_mut(b.offset, b.dim)
                    .copy_from(&(w.transpose() * &errors[b.agent]));
            }
        }
        eps
    }

    /// Per-agent errors `eᵢ = Σ_ρ W_{i,ρ} ε_{i,ρ}`.
    pub fn from_eps(&self, decomp: &MultiHopDecomposition, eps: &Vector) -> Vec<Vector> {
        let mut errors = vec![Vector::zeros(self.n); self.p];
        for b in &self.blocks {
            if b.dim > 0 {
                let w = decomp.innovation(b.agent, b.hop).expect("block exists").basis();
                errors[b.agent] += w * eps.rows(b.offset, b.dim);
            }
        }
        errors
    }
}

/// `ε̇ = A_ε ε + R d`, `ε⁺ = J_ε ε + S w` with period `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSystem {
    pub layout: ErrorLayout,
    pub a_eps: Matrix,
    pub j_eps: Matrix,
    pub r: Matrix,
    pub s: Matrix,
    pub t_period: f64,
}

impl ErrorSystem {
    pub fn n_eps(&self) -> usize {
        self.layout.n_eps()
    }

    /// Largest entry of `A_ε` and `J_ε` below the block diagonal.
    pub fn below_diagonal(&self) -> f64 {
        below_block_diagonal(&self.layout, &self.a_eps).max(below_block_diagonal(&self.layout, &self.j_eps))
    }
}

/// Largest entry of `m` in a row block later (in storage order) than its
/// column block.
pub fn below_block_diagonal(layout: &ErrorLayout, m: &Matrix) -> f64 {
    let mut worst = 0.0_f64;
    for (bi, row) in layout.blocks().iter().enumerate() {
        for col in &layout.blocks()[..bi] {
            if row.dim > 0 && col.dim > 0 {
                let v = m.view((row.offset, col.offset), (row.dim, col.dim));
                worst = worst.max(v.iter().fold(0.0_f64, |a, x| a.max(x.abs())));
            }
        }
    }
    worst
}

/// Error-coordinate matrices before the change of basis: `col(eᵢ)` flows with
/// `blockdiag(A − W_{i,0}LᵢCᵢ)` and jumps with `eᵢ⁺ = eᵢ − Σⱼ Kᵢⱼ(eᵢ − eⱼ) − Σⱼ Kᵢⱼ w_{i,j}`.
fn agent_error_matrices(
    layout: &ErrorLayout,
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    graph: &SensorGraph,
    gains: &ObserverGains,
) -> (Matrix, Matrix, Matrix, Matrix) {
    let n = layout.n();
    let p = layout.p();
    let mut a = Matrix::zeros(n * p, n * p);
    let mut j = Matrix::identity(n * p, n * p);
    let mut r = Matrix::zeros(n * p, layout.d_dim());
    let mut s = Matrix::zeros(n * p, layout.w_dim());
    for i in 0..p {
        let inj = gains.injection_gain(decomp, i);
        let rows = i * n;
        a.view_mut((rows, rows), (n, n))
            .copy_from(&(plant.a() - &inj * plant.output(i)));
        r.view_mut((rows, 0), (n, n)).copy_from(&Matrix::identity(n, n));
        let dr = layout.d_range(Some(i));
        r.view_mut((rows, dr.start), (n, dr.len())).copy_from(&-&inj);
        for &nb in graph.in_neighbors(i) {
            let k = gains.jump_gain(decomp, i, nb);
            let mut diag = j.view_mut((rows, rows), (n, n));
            diag -= &k;
            j.view_mut((rows, nb * n), (n, n)).copy_from(&k);
            let wr = layout.w_range(i, nb).expect("edge has a w block");
            s.view_mut((rows, wr.start), (n, n)).copy_from(&-k);
        }
    }
    (a, j, r, s)
}

/// Assembles `A_ε, J_ε, R, S` by changing coordinates of the per-agent error
/// dynamics. Blocks that vanish structurally (below the block diagonal, and the
/// couplings the decomposition rules out) are checked and then set to zero.
pub fn assemble_error_system(
    decomp: &MultiHopDecomposition,
    plant: &PlantModel,
    gains: &ObserverGains,
    graph: &SensorGraph,
    t_period: f64,
) -> Result<ErrorSystem> {
    if !(t_period > 0.0) || !t_period.is_finite() {
        return Err(Error::invalid(format!("period T = {t_period} must be positive")));
    }
    let layout = ErrorLayout::new(decomp, graph, &plant.output_dims())?;
    let (a_e, j_e, r_e, s_e) = agent_error_matrices(&layout, decomp, plant, graph, gains);
    let t = layout.transform(decomp);
    let tt = t.transpose();
    let mut a_eps = &tt * &a_e * &t;
    let mut j_eps = &tt * &j_e * &t;
    let mut r = &tt * &r_e;
    let mut s = &tt * &s_e;

    let scale_a = max_abs(&a_e).max(1.0);
    let scale_j = max_abs(&j_e).max(1.0);
    clear_structural_zeros(&layout, &mut a_eps, scale_a, "A_ε", false)?;
    clear_structural_zeros(&layout, &mut j_eps, scale_j, "J_ε", true)?;

    // Hop-0 rows see every d; higher hops only d₀.
    for b in layout.blocks().iter().filter(|b| b.hop > 0 && b.dim > 0) {
        for i in 0..layout.p() {
            let dr = layout.d_range(Some(i));
            let mut v = r.view_mut((b.offset, dr.start), (b.dim, dr.len()));
            check_and_clear(&mut v, max_abs(&r_e).max(1.0), "R")?;
        }
    }
    // Only hops 1..=ℓᵢ of agent i see w_{i,·}.
    for b in layout.blocks().iter().filter(|b| b.dim > 0) {
        for (key, &off) in &layout.w_offsets {
            let hit = key.0 == b.agent && b.hop >= 1 && b.hop <= decomp.hop_depth(b.agent);
            if !hit {
                let mut v = s.view_mut((b.offset, off), (b.dim, layout.n()));
                check_and_clear(&mut v, max_abs(&s_e).max(1.0), "S")?;
            }
        }
    }

    Ok(ErrorSystem {
        layout,
        a_eps,
        j_eps,
        r,
        s,
        t_period,
    })
}

/// Zeroes every block `(row, col)` the structure rules out: rows of another
/// agent, blocks below the diagonal, and, for `A_ε`, couplings to higher hops
/// of the same agent. The jump matrix keeps the inter-agent terms from
/// `ε_{j,ρ−1}` into `ε_{i,ρ}`.
fn clear_structural_zeros(
    layout: &ErrorLayout,
    m: &mut Matrix,
    scale: f64,
    what: &str,
    jump: bool,
) -> Result<()> {
    for row in layout.blocks() {
        for col in layout.blocks() {
            if row.dim == 0 || col.dim == 0 {
                continue;
            }
            let keep = if row.agent == col.agent {
                col.hop <= row.hop
            } else {
                jump && col.hop + 1 == row.hop
            };
            if !keep {
                let mut v = m.view_mut((row.offset, col.offset), (row.dim, col.dim));
                check_and_clear(&mut v, scale, what)?;
            }
        }
    }
    Ok(())
}

fn check_and_clear(v: &mut nalgebra::DMatrixViewMut<'_, f64>, scale: f64, what: &str) -> Result<()> {
    let size = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if size > STRUCTURE_TOL * scale {
        return Err(Error::consistency(format!(
            "{what} has a structurally zero block of size {size:.3e}"
        )));
    }
    v.fill(0.0);
    Ok(())
}
