//! Simulation engines and batch execution.
//!
//! Two backends cover complementary regimes:
//!
//! - [`dense_expectation`] / [`dense_sample`]: exact Pauli-transfer
//!   evolution of all 4^n expectations. Handles every generator kind and
//!   SPAM channel, capped at [`MAX_DENSE_QUBITS`] qubits.
//! - [`frame_run`]: Pauli-frame Monte Carlo. Stochastic generators and
//!   bit-flip SPAM only, but cost scales with the circuit, not 4^n.
//!
//! [`run_design`] drives either engine over a full experiment design with
//! deterministic per-circuit random substreams, so results are
//! reproducible bit-for-bit regardless of worker count.

mod dense;
mod design;
mod frame;

pub use dense::{
    clifford_group_expectation, dense_expectation, dense_sample, sanitize_distribution,
    DenseState, MAX_DENSE_QUBITS,
};
pub(crate) use dense::{
    compile_register_error, ideal_layer_ptm, CompiledError, CorePolarizer, DenseNoise,
};
pub use design::{
    read_dataset, run_design, write_dataset, Dataset, DatasetRow, EngineKind, RunOptions,
    DATASET_SCHEMA_VERSION,
};
pub use frame::{frame_flip_probability, frame_run};

/// Library warnings go to stderr unless BIRB_LOG silences them.
pub(crate) fn warn_enabled() -> bool {
    match std::env::var("BIRB_LOG") {
        Ok(v) => {
            let v = v.trim().to_ascii_lowercase();
            !(v == "off" || v == "0" || v == "none" || v == "silent")
        }
        Err(_) => true,
    }
}
