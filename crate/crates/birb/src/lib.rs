//! Binary randomized benchmarking (BiRB) for Clifford gate sets.
//!
//! This crate implements the full BiRB pipeline:
//!
//! - [`pauli`]: signed Pauli operators, commutation algebra, and conjugation
//!   by Clifford gates and tableaus.
//! - [`circuits`]: layered Clifford circuits, gate-set descriptions, and
//!   bit-exact text/JSONL serialization.
//! - [`sampler`]: Ω-distributed layer sampling (edgegrab), BiRB circuit
//!   construction, uniform Clifford sampling, and the Clifford-group variant.
//! - [`noise`]: elementary error generators (stochastic, Hamiltonian,
//!   active), channel construction, and the random model families used in
//!   the simulation studies.
//! - [`engines`]: two simulation backends, dense Pauli-transfer evolution
//!   (exact expectations, small n) and Pauli-frame Monte Carlo (stochastic
//!   noise, scalable), plus deterministic parallel batch execution.
//! - [`analysis`]: decay fitting, bootstrap errors, the ε_Ω oracle, sample
//!   planning, and the layer-averaged superchannel eigen-check.
//!
//! # Quick start
//!
//! ```
//! use birb::analysis::{fit_decay, FitOptions};
//! use birb::circuits::GateSetSpec;
//! use birb::engines::{run_design, EngineKind, RunOptions};
//! use birb::noise::NoiseModel;
//! use birb::sampler::{ExperimentDesign, OmegaSpec};
//!
//! let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.5).unwrap();
//! let design = ExperimentDesign::birb(2, vec![0, 1, 2, 4, 8], 10, omega, 1234);
//! let noise = NoiseModel::global_depolarizing(2, 0.98).unwrap();
//! let dataset = run_design(
//!     &design,
//!     &noise,
//!     EngineKind::DenseExact,
//!     &RunOptions::default(),
//! )
//! .unwrap();
//! let fit = fit_decay(&dataset.decay_points(), &FitOptions::default()).unwrap();
//! assert!((fit.r_omega - 0.01875).abs() < 1e-9);
//! ```

pub mod analysis;
pub mod circuits;
pub mod engines;
pub mod noise;
pub mod pauli;
pub mod rng;
pub mod sampler;

mod error;

pub use error::{Error, Result};
