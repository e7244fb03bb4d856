//! Signed Pauli operators, the single-qubit Clifford group, and Clifford
//! tableaux with exact phase tracking.

mod gates;
mod operator;
mod tableau;

pub use gates::{CliffordGate, SignedAxis, SingleClifford};
pub use operator::{PauliKind, PauliOperator};
pub use tableau::CliffordTableau;
