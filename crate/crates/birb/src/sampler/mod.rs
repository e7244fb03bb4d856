//! Circuit sampling: Ω-distributed layers, benchmarking circuit
//! construction for both the layer and Clifford-group protocols, uniform
//! Clifford tableaux with synthesis back to gates, and the scrambling
//! diagnostic.

mod birb_circuits;
mod clifford;
mod design;
mod omega;
mod scrambling;

pub use birb_circuits::{
    build_birb_circuit, measurement_layer, prep_layer, BirbCircuit,
};
pub use design::{
    circuit_from_record, circuit_to_record, CircuitVariant, ExperimentDesign,
};
pub use clifford::{
    build_clifford_group_birb_circuit, sample_uniform_clifford, synthesize_tableau,
    CliffordGroupBirbCircuit, MAX_UNIFORM_CLIFFORD_QUBITS,
};
pub use omega::{sample_omega_layer, OmegaSpec};
pub use scrambling::{estimate_scrambling, PairEstimate, ScramblingReport};
