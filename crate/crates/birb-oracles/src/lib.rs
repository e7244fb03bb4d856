//! Brute-force reference implementations used to cross-check the birb crate
//! in tests.
//!
//! Everything here works on dense complex matrices in the computational
//! basis (qubit 0 is the least significant bit), so the symplectic and
//! transfer-matrix code paths in the main crate are checked against plain
//! linear algebra.

mod density;
mod matrices;

pub use density::{
    channel_superop, density_expectation, generator_superop, initial_density, measurement_distribution, superop_apply, GeneratorTerm,
};
pub use matrices::{
    approx_eq, circuit_matrix, cnot_matrix, conjugate, gate_matrix, kron, layer_matrix,
    pauli_matrix, single_clifford_matrix, CMat,
};
