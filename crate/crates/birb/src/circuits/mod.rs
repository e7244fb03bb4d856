//! Layered Clifford circuits, gate-set descriptions, and the text and JSONL
//! serialization formats.

mod batch;
mod text;

pub use batch::{read_circuit_batch, write_circuit_batch, CircuitRecord};

use crate::error::{Error, Result};
use crate::pauli::{CliffordGate, PauliOperator, SingleClifford};

/// One circuit layer: gates with pairwise-disjoint supports.
///
/// Construction canonicalizes the layer: explicit identity gates are
/// dropped (idle qubits are implicit identities) and gates are sorted by
/// their lowest qubit, so equal layers compare equal and serialization
/// round-trips bit-exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GateLayer {
    n: usize,
    gates: Vec<(CliffordGate, Vec<usize>)>,
}

impl GateLayer {
    pub fn new(n: usize, gates: Vec<(CliffordGate, Vec<usize>)>) -> Result<Self> {
        let mut used = vec![false; n];
        let mut kept = Vec::with_capacity(gates.len());
        for (gate, qubits) in gates {
            if qubits.len() != gate.arity() {
                return Err(Error::domain(format!(
                    "gate {} takes {} qubit(s), got {}",
                    gate.name(),
                    gate.arity(),
                    qubits.len()
                )));
            }
            for &q in &qubits {
                if q >= n {
                    return Err(Error::InvalidIndex {
                        index: q,
                        n,
                        reason: "gate qubit past layer width",
                    });
                }
                if used[q] {
                    return Err(Error::InvalidIndex {
                        index: q,
                        n,
                        reason: "qubit used twice in one layer",
                    });
                }
                used[q] = true;
            }
            if !gate.is_identity() {
                kept.push((gate, qubits));
            }
        }
        kept.sort_by_key(|(_, qubits)| qubits.iter().copied().min());
        Ok(GateLayer { n, gates: kept })
    }

    pub fn empty(n: usize) -> Self {
        GateLayer { n, gates: vec![] }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[(CliffordGate, Vec<usize>)] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Qubits covered by some gate, ascending.
    pub fn covered_qubits(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = self
            .gates
            .iter()
            .flat_map(|(_, qubits)| qubits.iter().copied())
            .collect();
        qs.sort_unstable();
        qs
    }

    /// Conjugate a Pauli by the layer unitary in place.
    pub fn conjugate_in_place(&self, p: &mut PauliOperator) -> Result<()> {
        for (gate, qubits) in &self.gates {
            p.apply_gate_conjugation(*gate, qubits)?;
        }
        Ok(())
    }

    /// Layer of the inverse unitary (each gate inverted; supports disjoint,
    /// so no reordering is needed).
    #[must_use]
    pub fn inverse(&self) -> GateLayer {
        GateLayer {
            n: self.n,
            gates: self
                .gates
                .iter()
                .map(|(g, qs)| (g.inverse(), qs.clone()))
                .collect(),
        }
    }
}

/// A circuit as an ordered list of layers; layer 0 acts first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    layers: Vec<GateLayer>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, layers: vec![] }
    }

    pub fn from_layers(n: usize, layers: Vec<GateLayer>) -> Result<Self> {
        for layer in &layers {
            if layer.qubit_count() != n {
                return Err(Error::DimensionMismatch(layer.qubit_count(), n));
            }
        }
        Ok(Circuit { n, layers })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[GateLayer] {
        &self.layers
    }

    /// Total layer count (not the benchmark depth, which excludes the
    /// preparation and measurement layers a protocol adds).
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn push_layer(&mut self, layer: GateLayer) -> Result<()> {
        if layer.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(layer.qubit_count(), self.n));
        }
        self.layers.push(layer);
        Ok(())
    }

    /// Concatenation: self runs first, then `later`.
    pub fn compose(&self, later: &Circuit) -> Result<Circuit> {
        if later.n != self.n {
            return Err(Error::DimensionMismatch(later.n, self.n));
        }
        let mut out = self.clone();
        out.layers.extend(later.layers.iter().cloned());
        Ok(out)
    }

    /// Exact conjugation of a Pauli by the whole circuit unitary.
    pub fn conjugate_pauli(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(p.qubit_count(), self.n));
        }
        let mut out = p.clone();
        for layer in &self.layers {
            layer.conjugate_in_place(&mut out)?;
        }
        Ok(out)
    }

    /// Circuit of the inverse unitary: layers reversed and inverted.
    #[must_use]
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            layers: self.layers.iter().rev().map(GateLayer::inverse).collect(),
        }
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }
}

/// The gates a layer sampler may draw from, plus hardware connectivity.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSetSpec {
    n: usize,
    single_qubit_gates: Vec<SingleClifford>,
    two_qubit_gate: CliffordGate,
    connectivity: Vec<(usize, usize)>,
}

impl GateSetSpec {
    pub fn new(
        n: usize,
        single_qubit_gates: Vec<SingleClifford>,
        two_qubit_gate: CliffordGate,
        connectivity: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("gate set needs at least one qubit"));
        }
        if single_qubit_gates.is_empty() {
            return Err(Error::config("single-qubit gate list is empty"));
        }
        let mut seen = [false; SingleClifford::COUNT];
        for &g in &single_qubit_gates {
            if seen[g.index()] {
                return Err(Error::config(format!(
                    "duplicate single-qubit gate {}",
                    CliffordGate::Single(g).name()
                )));
            }
            seen[g.index()] = true;
        }
        if two_qubit_gate.arity() != 2 {
            return Err(Error::config(format!(
                "two-qubit gate slot holds {} with arity {}",
                two_qubit_gate.name(),
                two_qubit_gate.arity()
            )));
        }
        let mut edges = Vec::with_capacity(connectivity.len());
        for (a, b) in connectivity {
            if a == b {
                return Err(Error::config(format!("self-loop edge ({a}, {a})")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidIndex {
                    index: a.max(b),
                    n,
                    reason: "connectivity edge past qubit count",
                });
            }
            let e = (a.min(b), a.max(b));
            if edges.contains(&e) {
                return Err(Error::config(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            edges.push(e);
        }
        Ok(GateSetSpec {
            n,
            single_qubit_gates,
            two_qubit_gate,
            connectivity: edges,
        })
    }

    /// All-to-all connectivity with the default gate set
    /// {I, X_{π/2}, Y_{π/2}} plus CNOT.
    pub fn all_to_all_default(n: usize) -> Result<Self> {
        let mut edges = vec![];
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::new(
            n,
            vec![SingleClifford::I, SingleClifford::sx(), SingleClifford::sy()],
            CliffordGate::Cnot,
            edges,
        )
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn single_qubit_gates(&self) -> &[SingleClifford] {
        &self.single_qubit_gates
    }

    pub fn two_qubit_gate(&self) -> CliffordGate {
        self.two_qubit_gate
    }

    /// Undirected edges, normalized to (low, high).
    pub fn connectivity(&self) -> &[(usize, usize)] {
        &self.connectivity
    }
}
