//! Markovian error models built from elementary generators.
//!
//! A [`NoiseModel`] attaches generator lists to gate instances, whole
//! layers, and state preparation or measurement. [`ErrorGenerator`]s come
//! in three kinds (stochastic, Hamiltonian, active) whose matrix action on
//! the Pauli basis is built exactly by [`generator_ptm`];
//! [`channel_from_generators`] exponentiates a weighted sum into a channel.
//! Stochastic-only models admit a closed-form Pauli error distribution via
//! [`pauli_error_distribution`]. [`sample_random_model`] draws the
//! benchmark's randomized model families.

mod generators;
mod model;
mod random;

pub use generators::{
    channel_from_generators, generator_ptm, pauli_error_distribution, ErrorGenerator,
};
pub use model::{measurement_channel, MeasurementErrorSpec, NoiseModel};
pub use random::{sample_random_model, NoiseFamily, RandomModelOptions};

