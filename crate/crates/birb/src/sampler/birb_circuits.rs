
use crate::circuits::{Circuit, GateLayer};
use crate::error::{Error, Result};
use crate::pauli::{CliffordGate, PauliKind, PauliOperator, SignedAxis, SingleClifford};
use crate::sampler::omega::OmegaSpec;

/// Gate preparing the +1 eigenstate of each signed axis from |0⟩, indexed
/// by axis code: conj_g(+Z) equals the axis (verified in tests).
fn prep_gate_for_axis(axis: SignedAxis) -> SingleClifford {
    match axis.code() {
        0 => SingleClifford::h(),    // |+⟩
        1 => SingleClifford::sydg(), // |−⟩
        2 => SingleClifford::sh(),   // |+i⟩
        3 => SingleClifford::sdgh(), // |−i⟩
        4 => SingleClifford::I,      // |0⟩
        _ => SingleClifford::x(),    // |1⟩
    }
}

/// Single-qubit layer taking |0…0⟩ to a uniformly random tensor-product
/// eigenstate of s with eigenvalue +1.
///
/// Support sites get ±1 eigenstates of their letters with the sign product
/// fixed to +1 (the last support site absorbs the constraint); identity
/// sites get one of the six stabilizer states uniformly.
pub fn prep_layer(s: &PauliOperator, rng: &mut impl rand::Rng) -> Result<GateLayer> {
    if s.is_identity_up_to_sign() {
        return Err(Error::domain("prep target must be a non-identity Pauli"));
    }
    if !s.is_hermitian() || s.sign() != 1 {
        return Err(Error::domain(format!(
            "prep target must have + sign, got {s}"
        )));
    }
    let n = s.qubit_count();
    let support = s.support();
    let mut neg = vec![false; support.len()];
    let mut parity = false;
    for flag in neg.iter_mut().take(support.len() - 1) {
        *flag = rng.gen_bool(0.5);
        parity ^= *flag;
    }
    *neg.last_mut().expect("support is non-empty") = parity;

    let mut gates = vec![];
    let mut support_idx = 0;
    for q in 0..n {
        let axis = match s.site(q) {
            PauliKind::I => SignedAxis::from_code(rng.gen_range(0..6)).expect("code in range"),
            kind => {
                let axis = SignedAxis::from_kind(kind, neg[support_idx]).expect("non-identity");
                support_idx += 1;
                axis
            }
        };
        gates.push((
            CliffordGate::Single(prep_gate_for_axis(axis)),
            vec![q],
        ));
    }
    GateLayer::new(n, gates)
}

/// Single-qubit layer rotating each site of s′ into the Z basis: X sites
/// get H, Y sites get H·S†, and Z or identity sites are left alone. Signs
/// are preserved, so the conjugated target keeps the sign of s′.
pub fn measurement_layer(s_prime: &PauliOperator) -> GateLayer {
    let n = s_prime.qubit_count();
    let gates = (0..n)
        .filter_map(|q| {
            let gate = match s_prime.site(q) {
                PauliKind::X => SingleClifford::h(),
                PauliKind::Y => SingleClifford::hsdg(),
                PauliKind::I | PauliKind::Z => return None,
            };
            Some((CliffordGate::Single(gate), vec![q]))
        })
        .collect();
    GateLayer::new(n, gates).expect("one gate per qubit")
}

/// A sampled benchmarking circuit: preparation layer, core layers, and a
/// measurement-basis layer, with the Z-form target Pauli the outcome bits
/// are scored against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirbCircuit {
    circuit: Circuit,
    benchmark_depth: usize,
    core_span: (usize, usize),
    target: PauliOperator,
    initial_stabilizer: PauliOperator,
}

impl BirbCircuit {
    pub(crate) fn from_parts(
        circuit: Circuit,
        benchmark_depth: usize,
        core_span: (usize, usize),
        target: PauliOperator,
        initial_stabilizer: PauliOperator,
    ) -> Self {
        debug_assert!(core_span.0 <= core_span.1 && core_span.1 <= circuit.depth());
        debug_assert!(
            (0..circuit.qubit_count()).all(|q| !target.x_bit(q)),
            "target must be Z-form"
        );
        BirbCircuit {
            circuit,
            benchmark_depth,
            core_span,
            target,
            initial_stabilizer,
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn qubit_count(&self) -> usize {
        self.circuit.qubit_count()
    }

    /// Number of core (benchmarked) layers; prep and measurement layers do
    /// not count.
    pub fn benchmark_depth(&self) -> usize {
        self.benchmark_depth
    }

    /// Layer index range [start, end) of the core block inside `circuit`.
    pub fn core_span(&self) -> (usize, usize) {
        self.core_span
    }

    pub fn core_layers(&self) -> &[GateLayer] {
        &self.circuit.layers()[self.core_span.0..self.core_span.1]
    }

    /// The measured Pauli s_C: Z/I on every site, with a tracked sign.
    pub fn target(&self) -> &PauliOperator {
        &self.target
    }

    /// The random Pauli s the initial state is stabilized by (sign +1 for
    /// layer-sampled circuits; either sign for Clifford-group circuits).
    pub fn initial_stabilizer(&self) -> &PauliOperator {
        &self.initial_stabilizer
    }

    /// Qubits whose outcome bits enter the success parity.
    pub fn measured_qubits(&self) -> Vec<usize> {
        self.target.support()
    }

    /// Success value of one shot: sign(s_C)·(−1)^(parity of outcome bits on
    /// the target support). `bits` is the outcome bitstring packed 64 per
    /// word, qubit q at bit q % 64 of word q / 64.
    pub fn success_value(&self, bits: &[u64]) -> i8 {
        let mask = self.target.z_words();
        assert_eq!(bits.len(), mask.len(), "bitstring width mismatch");
        let parity = bits
            .iter()
            .zip(mask)
            .fold(0u32, |acc, (b, m)| acc ^ (b & m).count_ones())
            & 1;
        self.target.sign() * if parity == 1 { -1 } else { 1 }
    }
}

/// Sample one full benchmarking circuit of the given core depth.
pub fn build_birb_circuit(
    depth: usize,
    omega: &OmegaSpec,
    rng: &mut impl rand::Rng,
) -> Result<BirbCircuit> {
    let n = omega.qubit_count();
    let s = PauliOperator::sample_random_nonidentity(n, rng);
    let mut circuit = Circuit::new(n);
    circuit.push_layer(prep_layer(&s, rng)?).expect("same n");

    let mut tracked = s.clone();
    for _ in 0..depth {
        let layer = omega.sample_layer(rng);
        layer
            .conjugate_in_place(&mut tracked)
            .expect("layer and operator share n");
        circuit.push_layer(layer).expect("same n");
    }

    let meas = measurement_layer(&tracked);
    meas.conjugate_in_place(&mut tracked)
        .expect("layer and operator share n");
    circuit.push_layer(meas).expect("same n");

    Ok(BirbCircuit::from_parts(
        circuit,
        depth,
        (1, 1 + depth),
        tracked,
        s,
    ))
}
