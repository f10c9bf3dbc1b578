//! JSON documents: scenario files, gain sets and certificates.
//!
//! Agents are numbered from one in every document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certification::IssCertificate;
use crate::decomposition::MultiHopDecomposition;
use crate::matrix_serde::{from_rows, to_rows};
use crate::model::{PlantModel, SensorGraph};
use crate::simulator::{DisturbanceKind, DisturbanceSpec, Scenario, Variant};
use crate::synthesis::{GainTargets, ObserverGains};
use crate::{Error, Matrix, Result, Vector};

/// The two-oscillator plant on a directed four-agent ring.
pub const RING4: &str = include_str!("../scenarios/ring4.json");

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub plant: PlantSection,
    pub graph: GraphSection,
    pub targets: TargetSection,
    #[serde(default)]
    pub sim: SimSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub a: Rows,
    pub outputs: Vec<OutputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub agent: usize,
    pub c: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub p: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub alpha: f64,
    pub t_period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialEstimates {
    Named(String),
    Explicit(Rows),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Nominal,
    Jitter,
    Delay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Integration step; `T/100` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Plant initial state; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_xhat0")]
    pub xhat0: InitialEstimates,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub d_inf: f64,
    #[serde(default)]
    pub w_inf: f64,
    #[serde(default = "default_kind")]
    pub kind: DisturbanceKind,
    #[serde(default = "default_variant")]
    pub variant: VariantName,
    #[serde(default)]
    pub eps_tau: f64,
    #[serde(default)]
    pub delta: f64,
}

fn default_t_final() -> f64 {
    10.0
}

fn default_xhat0() -> InitialEstimates {
    InitialEstimates::Named("zero".into())
}

fn default_kind() -> DisturbanceKind {
    DisturbanceKind::ClippedGaussian
}

fn default_variant() -> VariantName {
    VariantName::Nominal
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            t_final: default_t_final(),
            h: None,
            x0: None,
            xhat0: default_xhat0(),
            seed: 0,
            d_inf: 0.0,
            w_inf: 0.0,
            kind: default_kind(),
            variant: default_variant(),
            eps_tau: 0.0,
            delta: 0.0,
        }
    }
}

/// Simulation settings resolved against the plant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub t_final: f64,
    pub h: f64,
    pub x0: Vector,
    pub xhat0: Vec<Vector>,
    pub disturbance: DisturbanceSpec,
    pub variant: Variant,
}

/// A validated scenario file.
#[derive(Debug, Clone)]
pub struct Problem {
    pub plant: PlantModel,
    pub graph: SensorGraph,
    pub targets: GainTargets,
    pub sim: SimSettings,
}

impl Problem {
    /// Simulation scenario for a decomposition and gain set of this problem.
    pub fn scenario(&self, decomp: MultiHopDecomposition, gains: ObserverGains) -> Scenario {
        Scenario {
            plant: self.plant.clone(),
            graph: self.graph.clone(),
            decomp,
            gains,
            t_period: self.targets.t_period,
            alpha: self.targets.alpha,
            t_final: self.sim.t_final,
            h: self.sim.h,
            x0: self.sim.x0.clone(),
            xhat0: self.sim.xhat0.clone(),
            disturbance: self.sim.disturbance,
            variant: self.sim.variant,
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            Error::invalid(format!("{inner}"))
        } else {
            Error::invalid(format!("{path}: {inner}"))
        }
    })
}

fn matrix_at(rows: &Rows, path: &str, cols: Option<usize>) -> Result<Matrix> {
    for (k, r) in rows.iter().enumerate() {
        if let Some(c) = cols {
            if r.len() != c {
                return Err(Error::dim(format!(
                    "{path}[{k}] has {} entries, expected {c}",
                    r.len()
                )));
            }
        }
        if let Some(pos) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{path}[{k}][{pos}] is not finite")));
        }
    }
    from_rows(rows, cols.map(|c| (rows.len(), c))).map_err(|e| Error::dim(format!("{path}: {e}")))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    /// The bundled four-agent ring scenario.
    pub fn ring4() -> Self {
        ScenarioFile::parse(RING4).expect("bundled scenario parses")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Checks every section and builds the model objects.
    pub fn to_problem(&self) -> Result<Problem> {
        let n = self.plant.a.len();
        let a = matrix_at(&self.plant.a, "plant.a", Some(n))?;
        let p = self.graph.p;
        let mut outputs: Vec<Option<Matrix>> = vec![None; p];
        for (k, out) in self.plant.outputs.iter().enumerate() {
            let path = format!("plant.outputs[{k}]");
            if out.agent == 0 || out.agent > p {
                return Err(Error::invalid(format!(
                    "{path}.agent = {} is outside 1..={p}",
                    out.agent
                )));
            }
            let slot = &mut outputs[out.agent - 1];
            if slot.is_some() {
                return Err(Error::invalid(format!(
                    "{path}.agent = {} appears twice",
                    out.agent
                )));
            }
            let c = matrix_at(&out.c, &format!("{path}.c"), Some(n))?;
            if c.nrows() > n {
                return Err(Error::dim(format!(
                    "{path}.c has {} rows, more than n = {n}",
                    c.nrows()
                )));
            }
            *slot = Some(c);
        }
        let outputs = outputs
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| Error::invalid(format!("plant.outputs: agent {} has no output", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let plant = PlantModel::new(a, outputs)?;

        let mut edges = Vec::with_capacity(self.graph.edges.len());
        for (k, &[j, i]) in self.graph.edges.iter().enumerate() {
            if j == 0 || i == 0 || j > p || i > p {
                return Err(Error::invalid(format!(
                    "graph.edges[{k}] = [{j}, {i}] is outside 1..={p}"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("graph.edges[{k}] is a self-loop")));
            }
            edges.push((j - 1, i - 1));
        }
        let graph = SensorGraph::new(p, &edges)?;

        let t = &self.targets;
        let defaults = GainTargets::with_defaults(t.alpha, t.t_period)
            .map_err(|e| Error::invalid(format!("targets: {e}")))?;
        let targets = GainTargets::new(
            t.alpha,
            t.t_period,
            t.abar.unwrap_or(defaults.abar),
            t.bbar.unwrap_or(defaults.bbar),
        )
        .map_err(|e| Error::invalid(format!("targets: {e}")))?;

        let s = &self.sim;
        let x0 = match &s.x0 {
            None => Vector::from_element(n, 1.0),
            Some(v) if v.len() == n => Vector::from_column_slice(v),
            Some(v) => {
                return Err(Error::dim(format!(
                    "sim.x0 has {} entries, expected {n}",
                    v.len()
                )))
            }
        };
        let xhat0 = match &s.xhat0 {
            InitialEstimates::Named(name) if name == "zero" => vec![Vector::zeros(n); p],
            InitialEstimates::Named(name) => {
                return Err(Error::invalid(format!("sim.xhat0: unknown value \"{name}\"")))
            }
            InitialEstimates::Explicit(rows) => {
                if rows.len() != p {
                    return Err(Error::dim(format!(
                        "sim.xhat0 has {} estimates, expected {p}",
                        rows.len()
                    )));
                }
                rows.iter()
                    .enumerate()
                    .map(|(k, r)| {
                        if r.len() != n {
                            Err(Error::dim(format!(
                                "sim.xhat0[{k}] has {} entries, expected {n}",
                                r.len()
                            )))
                        } else {
                            Ok(Vector::from_column_slice(r))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let variant = match s.variant {
            VariantName::Nominal => Variant::Nominal,
            VariantName::Jitter => Variant::Jitter { eps_tau: s.eps_tau },
            VariantName::Delay => Variant::Delay { delta: s.delta },
        };
        let disturbance = DisturbanceSpec {
            d_inf: s.d_inf,
            w_inf: s.w_inf,
            seed: s.seed,
            kind: s.kind,
        };
        disturbance
            .validate()
            .map_err(|e| Error::invalid(format!("sim: {e}")))?;
        let h = s.h.unwrap_or(targets.t_period / 100.0);
        if !(s.t_final >= 0.0) || !s.t_final.is_finite() {
            return Err(Error::invalid("sim.t_final must be finite and non-negative"));
        }
        Ok(Problem {
            plant,
            graph,
            targets,
            sim: SimSettings {
                t_final: s.t_final,
                h,
                x0,
                xhat0,
                disturbance,
                variant,
            },
        })
    }
}

/// One consensus gain in a gains document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusEntry {
    pub i: usize,
    pub j: usize,
    pub rho: usize,
    pub matrix: Rows,
}

/// `{"l": [...], "n": [{"i", "j", "rho", "matrix"}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub l: Vec<Rows>,
    pub n: Vec<ConsensusEntry>,
}

impl GainsFile {
    pub fn from_gains(gains: &ObserverGains) -> Self {
        GainsFile {
            l: gains.locals().iter().map(to_rows).collect(),
            n: gains
                .consensus_gains()
                .iter()
                .map(|(&(i, j, rho), m)| ConsensusEntry {
                    i: i + 1,
                    j: j + 1,
                    rho,
                    matrix: to_rows(m),
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gains serialise")
    }

    /// Rebuilds the gains, resolving the shape of empty matrices from the
    /// decomposition.
    pub fn to_gains(
        &self,
        decomp: &MultiHopDecomposition,
        graph: &SensorGraph,
        plant: &PlantModel,
    ) -> Result<ObserverGains> {
        if self.l.len() != decomp.p() {
            return Err(Error::dim(format!(
                "l has {} entries, expected {}",
                self.l.len(),
                decomp.p()
            )));
        }
        let local = self
            .l
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let hint = (decomp.hop_dim(i, 0), plant.output(i).nrows());
                from_rows(rows, Some(hint)).map_err(|e| Error::dim(format!("l[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut consensus = BTreeMap::new();
        for (k, e) in self.n.iter().enumerate() {
            if e.i == 0 || e.j == 0 || e.i > decomp.p() || e.j > decomp.p() || e.rho == 0 {
                return Err(Error::invalid(format!("n[{k}] has an invalid (i, j, rho)")));
            }
            let (i, j) = (e.i - 1, e.j - 1);
            let hint = (decomp.hop_dim(i, e.rho), decomp.hop_dim(j, e.rho - 1));
            let m = from_rows(&e.matrix, Some(hint))
                .map_err(|err| Error::dim(format!("n[{k}].matrix: {err}")))?;
            if consensus.insert((i, j, e.rho), m).is_some() {
                return Err(Error::invalid(format!("n[{k}] repeats (i, j, rho)")));
            }
        }
        ObserverGains::new(decomp, graph, plant, local, consensus)
    }
}

pub fn certificate_to_json(cert: &IssCertificate) -> String {
    serde_json::to_string_pretty(cert).expect("certificate serialises")
}

pub fn certificate_from_json(text: &str) -> Result<IssCertificate> {
    parse_json(text)
}
