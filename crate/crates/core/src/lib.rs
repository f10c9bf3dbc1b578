//! Distributed hybrid observers for linear plants monitored by a sensor
//! network.
//!
//! Every agent runs a continuous-time Luenberger-like observer on the modes it
//! can see through its own output, and corrects the remaining modes by
//! impulsive consensus updates whenever neighbours exchange estimates (every
//! `T` seconds). The crate covers the whole pipeline:
//!
//! * [`decomposition`]: multi-hop observability decomposition and the
//!   collective α-detectability test,
//! * [`synthesis`]: local and consensus gains with a prescribed spectral
//!   abscissa / spectral radius,
//! * [`certification`]: the hybrid error system and a numerical ISS
//!   certificate (`κ`, `γ_C`, `γ_D`),
//! * [`simulator`]: hybrid-time simulation of plant and observers, including
//!   timer jitter and transmission delay variants,
//! * [`scenario`]: JSON scenario, gains and certificate documents.
//!
//! Agents are indexed from zero in the API and from one in JSON documents.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certification;
pub mod decomposition;
pub mod error;
mod matrix_serde;
pub mod model;
pub mod numerics;
pub mod scenario;
pub mod simulator;
pub mod synthesis;

pub use error::{Error, Result};
pub use model::{PlantModel, SensorGraph};
pub use nalgebra;
pub use num_complex::Complex64;

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type Vector = nalgebra::DVector<f64>;

pub use certification::{ErrorLayout, ErrorSystem, IssCertificate};
pub use decomposition::MultiHopDecomposition;
pub use numerics::{SubspaceBasis, Tolerance};
pub use simulator::{HybridTrajectory, Scenario};
pub use synthesis::{GainTargets, ObserverGains};
