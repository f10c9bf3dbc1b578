#![allow(dead_code)]

use hybrid_observer::certification::{assemble_error_system, compute_certificate, DEFAULT_GRID_POINTS};
use hybrid_observer::decomposition::{build_decomposition, find_hop_depths};
use hybrid_observer::scenario::{Problem, ScenarioFile};
use hybrid_observer::synthesis::synthesize;
use hybrid_observer::{
    ErrorSystem, GainTargets, IssCertificate, Matrix, MultiHopDecomposition, ObserverGains, PlantModel,
    SensorGraph, Tolerance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A fully designed and certified observer network.
pub struct Pipeline {
    pub plant: PlantModel,
    pub graph: SensorGraph,
    pub targets: GainTargets,
    pub decomp: MultiHopDecomposition,
    pub gains: ObserverGains,
    pub es: ErrorSystem,
    pub cert: IssCertificate,
}

pub fn design(plant: PlantModel, graph: SensorGraph, targets: GainTargets) -> Pipeline {
    let tol = Tolerance::default();
    let depths = find_hop_depths(&plant, &graph, targets.alpha, None, &tol)
        .unwrap()
        .into_depths()
        .unwrap();
    let decomp = build_decomposition(&plant, &graph, &depths, &tol).unwrap();
    let gains = synthesize(&decomp, &plant, &graph, &targets, &tol).unwrap();
    let es = assemble_error_system(&decomp, &plant, &gains, &graph, targets.t_period).unwrap();
    let cert = compute_certificate(&es, targets.alpha, DEFAULT_GRID_POINTS).unwrap();
    Pipeline {
        plant,
        graph,
        targets,
        decomp,
        gains,
        es,
        cert,
    }
}

pub fn ring4_problem() -> Problem {
    ScenarioFile::ring4().to_problem().unwrap()
}

pub fn ring4() -> (Problem, Pipeline) {
    let problem = ring4_problem();
    let pipeline = design(problem.plant.clone(), problem.graph.clone(), problem.targets);
    (problem, pipeline)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random plant on a strongly connected graph. The plant is a set of real
/// and oscillatory modes under a random non-orthogonal change of basis, and
/// each agent measures a few of them, so most agents need neighbours to see
/// the whole state.
pub struct RandomInstance {
    pub plant: PlantModel,
    pub graph: SensorGraph,
    pub targets: GainTargets,
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    gaussian_matrix(rng, n, n).qr().q()
}

pub fn random_instance(seed: u64, max_n: usize, max_p: usize) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let p = rng.random_range(1..=max_p);

    let mut modes: Vec<std::ops::Range<usize>> = Vec::new();
    let mut d = Matrix::zeros(n, n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && rng.random_bool(0.5) {
            let (sigma, omega) = (rng.random_range(-1.0..0.5), rng.random_range(0.5..3.0));
            d[(k, k)] = sigma;
            d[(k + 1, k + 1)] = sigma;
            d[(k, k + 1)] = omega;
            d[(k + 1, k)] = -omega;
            modes.push(k..k + 2);
            k += 2;
        } else {
            d[(k, k)] = rng.random_range(-1.0..0.5);
            modes.push(k..k + 1);
            k += 1;
        }
    }
    let q = random_orthogonal(&mut rng, n);
    let s = &q * (Matrix::identity(n, n) + gaussian_matrix(&mut rng, n, n) * (0.3 / (n as f64).sqrt()));
    let s_inv = s.clone().try_inverse().unwrap();
    let a = &s * d * &s_inv;

    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); p];
    for m in 0..modes.len() {
        owned[rng.random_range(0..p)].push(m);
    }
    let mut outputs = Vec::with_capacity(p);
    for picked in owned.iter_mut() {
        if picked.is_empty() {
            picked.push(rng.random_range(0..modes.len()));
        }
        let rows = picked.len();
        let mut c = Matrix::zeros(rows, n);
        for r in 0..rows {
            for &m in picked.iter() {
                for col in modes[m].clone() {
                    c[(r, col)] = rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        outputs.push(c * &s_inv);
    }
    let plant = PlantModel::new(a, outputs).unwrap();

    let mut edges: Vec<(usize, usize)> = if p > 1 {
        (0..p).map(|j| (j, (j + 1) % p)).collect()
    } else {
        vec![]
    };
    for j in 0..p {
        for i in 0..p {
            if i != j && !edges.contains(&(j, i)) && rng.random_bool(0.3) {
                edges.push((j, i));
            }
        }
    }
    let graph = SensorGraph::new(p, &edges).unwrap();
    let alpha = rng.random_range(0.2..1.0);
    let t_period = [0.05, 0.1, 0.2][rng.random_range(0..3)];
    let targets = GainTargets::with_defaults(alpha, t_period).unwrap();
    RandomInstance {
        plant,
        graph,
        targets,
    }
}

pub fn random_pipeline(seed: u64, max_n: usize, max_p: usize) -> Pipeline {
    let inst = random_instance(seed, max_n, max_p);
    design(inst.plant, inst.graph, inst.targets)
}

/// Greedy matching distance between two spectra of equal length.
pub fn spectrum_distance(a: &[hybrid_observer::Complex64], b: &[hybrid_observer::Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for z in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}
