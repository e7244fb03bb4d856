use crate::circuits::{Circuit, GateLayer};
use crate::error::{Error, Result};
use crate::pauli::{CliffordGate, CliffordTableau, PauliKind, PauliOperator, SingleClifford};
use crate::sampler::birb_circuits::{measurement_layer, BirbCircuit};

/// Uniform Clifford sampling is quadratic in memory and intended for
/// compilation targets, not wide registers.
pub const MAX_UNIFORM_CLIFFORD_QUBITS: usize = 8;

/// Symplectic form on (x | z) bit rows: |u_x ∧ v_z| ⊕ |u_z ∧ v_x|.
fn symp(u: u32, v: u32, n: usize) -> u32 {
    let mask = (1u32 << n) - 1;
    let (ux, uz) = (u & mask, u >> n);
    let (vx, vz) = (v & mask, v >> n);
    ((ux & vz).count_ones() ^ (uz & vx).count_ones()) & 1
}

fn combine(basis: &[u32], coeffs: u32) -> u32 {
    basis
        .iter()
        .enumerate()
        .filter(|(i, _)| coeffs >> i & 1 == 1)
        .fold(0, |acc, (_, &v)| acc ^ v)
}

/// F2 row reduction keeping a maximal independent subset of `rows`.
fn independent_subset(rows: &[u32]) -> Vec<u32> {
    let mut basis = [0u32; 32];
    let mut kept = vec![];
    for &row in rows {
        let mut r = row;
        while r != 0 {
            let bit = 31 - r.leading_zeros() as usize;
            if basis[bit] == 0 {
                basis[bit] = r;
                kept.push(row);
                break;
            }
            r ^= basis[bit];
        }
    }
    kept
}

fn row_to_pauli(n: usize, row: u32, negative: bool) -> PauliOperator {
    let mut sites = vec![PauliKind::I; n];
    for (q, site) in sites.iter_mut().enumerate() {
        let x = row >> q & 1 == 1;
        let z = row >> (n + q) & 1 == 1;
        *site = match (x, z) {
            (false, false) => PauliKind::I,
            (true, false) => PauliKind::X,
            (false, true) => PauliKind::Z,
            (true, true) => PauliKind::Y,
        };
    }
    PauliOperator::from_sites(&sites, if negative { -1 } else { 1 })
}

/// Draw a uniformly random n-qubit Clifford (up to global phase).
///
/// The symplectic part is built one hyperbolic pair at a time: a uniform
/// nonzero `a` from the remaining symplectic complement, a uniform partner
/// `b` with ⟨a, b⟩ = 1, then the complement shrinks to the vectors
/// orthogonal to both. Each step is uniform over its choices and every
/// symplectic matrix arises from exactly one choice sequence, so the
/// result is uniform over the group once each image gets a uniform sign.
pub fn sample_uniform_clifford(n: usize, rng: &mut impl rand::Rng) -> Result<CliffordTableau> {
    if n == 0 || n > MAX_UNIFORM_CLIFFORD_QUBITS {
        return Err(Error::capability(format!(
            "uniform Clifford sampling supports 1..={MAX_UNIFORM_CLIFFORD_QUBITS} qubits, got {n}"
        )));
    }
    let mut complement: Vec<u32> = (0..2 * n).map(|i| 1u32 << i).collect();
    let mut img_x = Vec::with_capacity(n);
    let mut img_z = Vec::with_capacity(n);
    for _ in 0..n {
        let m = complement.len();
        let a = combine(&complement, rng.gen_range(1..1u32 << m));
        let pivot = (0..m)
            .find(|&i| symp(a, complement[i], n) == 1)
            .expect("form is nondegenerate on the complement");
        // Basis of the hyperplane orthogonal to `a` inside the complement.
        let hyper: Vec<u32> = (0..m)
            .filter(|&i| i != pivot)
            .map(|i| {
                if symp(a, complement[i], n) == 1 {
                    complement[i] ^ complement[pivot]
                } else {
                    complement[i]
                }
            })
            .collect();
        let b = complement[pivot] ^ combine(&hyper, rng.gen_range(0..1u32 << hyper.len()));
        debug_assert_eq!(symp(a, b, n), 1);
        let next: Vec<u32> = hyper
            .iter()
            .map(|&u| if symp(b, u, n) == 1 { u ^ a } else { u })
            .collect();
        complement = independent_subset(&next);
        debug_assert_eq!(complement.len(), m - 2);
        img_x.push(row_to_pauli(n, a, rng.gen_bool(0.5)));
        img_z.push(row_to_pauli(n, b, rng.gen_bool(0.5)));
    }
    CliffordTableau::from_images(img_x, img_z)
}

fn emit(
    t: &mut CliffordTableau,
    ops: &mut Vec<(CliffordGate, Vec<usize>)>,
    gate: CliffordGate,
    qubits: Vec<usize>,
) {
    t.apply_gate(gate, &qubits).expect("valid gate application");
    ops.push((gate, qubits));
}

/// Reduce the image of X_j (when `x_image`) or Z_j (otherwise) to ±X_j.
/// Both images have no support below j once earlier columns are finished.
fn reduce_to_x(
    t: &mut CliffordTableau,
    ops: &mut Vec<(CliffordGate, Vec<usize>)>,
    j: usize,
    x_image: bool,
) {
    let n = t.qubit_count();
    let single = |c: SingleClifford| CliffordGate::Single(c);
    let image = |t: &CliffordTableau| {
        if x_image {
            t.image_of_x(j).clone()
        } else {
            t.image_of_z(j).clone()
        }
    };

    // Ensure an X component on qubit j.
    let p = image(t);
    if !p.x_bit(j) {
        if p.z_bit(j) {
            emit(t, ops, single(SingleClifford::h()), vec![j]);
        } else {
            let q = p
                .support()
                .into_iter()
                .find(|&q| q > j)
                .expect("image must touch an unfinished qubit");
            if !image(t).x_bit(q) {
                emit(t, ops, single(SingleClifford::h()), vec![q]);
            }
            // SWAP the X component onto qubit j.
            emit(t, ops, CliffordGate::Cnot, vec![j, q]);
            emit(t, ops, CliffordGate::Cnot, vec![q, j]);
            emit(t, ops, CliffordGate::Cnot, vec![j, q]);
        }
    }
    if image(t).z_bit(j) {
        emit(t, ops, single(SingleClifford::s()), vec![j]);
    }
    // Clear every other site: rotate it to a pure X, then absorb with CNOT.
    for q in 0..n {
        if q == j {
            continue;
        }
        let p = image(t);
        if p.z_bit(q) {
            emit(
                t,
                ops,
                single(if p.x_bit(q) { SingleClifford::s() } else { SingleClifford::h() }),
                vec![q],
            );
        }
        if image(t).x_bit(q) {
            emit(t, ops, CliffordGate::Cnot, vec![j, q]);
        }
    }
    debug_assert_eq!(image(t).support(), vec![j]);
    debug_assert!(image(t).x_bit(j) && !image(t).z_bit(j));
}

/// Compile a tableau into a circuit over the 24 single-qubit Cliffords
/// and CNOT such that `CliffordTableau::from_circuit` reproduces it.
///
/// The tableau is conjugated to the identity one qubit column at a time:
/// reduce the X image to ±X_j, park it as ±Z_j under H (CNOT controls and
/// S on j leave Z_j fixed), reduce the Z image, unpark, then fix signs.
/// The recorded ops are inverted, reversed, and packed greedily into
/// layers with disjoint supports.
pub fn synthesize_tableau(tableau: &CliffordTableau) -> Circuit {
    let n = tableau.qubit_count();
    let mut t = tableau.clone();
    let mut ops: Vec<(CliffordGate, Vec<usize>)> = vec![];
    let single = |c: SingleClifford| CliffordGate::Single(c);

    for j in 0..n {
        reduce_to_x(&mut t, &mut ops, j, true);
        emit(&mut t, &mut ops, single(SingleClifford::h()), vec![j]);
        reduce_to_x(&mut t, &mut ops, j, false);
        emit(&mut t, &mut ops, single(SingleClifford::h()), vec![j]);
    }
    for j in 0..n {
        if t.image_of_x(j).sign() < 0 {
            emit(&mut t, &mut ops, single(SingleClifford::z()), vec![j]);
        }
        if t.image_of_z(j).sign() < 0 {
            emit(&mut t, &mut ops, single(SingleClifford::x()), vec![j]);
        }
    }
    debug_assert!(t.is_identity());

    let mut next_free = vec![0usize; n];
    let mut layers: Vec<Vec<(CliffordGate, Vec<usize>)>> = vec![];
    for (gate, qubits) in ops.into_iter().rev() {
        let gate = gate.inverse();
        let at = qubits.iter().map(|&q| next_free[q]).max().expect("arity is positive");
        if at == layers.len() {
            layers.push(vec![]);
        }
        for &q in &qubits {
            next_free[q] = at + 1;
        }
        layers[at].push((gate, qubits));
    }
    let mut circuit = Circuit::new(n);
    for gates in layers {
        circuit
            .push_layer(GateLayer::new(n, gates).expect("scheduler keeps supports disjoint"))
            .expect("same n");
    }
    circuit
}

/// A Clifford-group benchmarking circuit: the compiled circuit plus the
/// sampled multi-qubit Cliffords it was built from (C_0 prepares the
/// stabilizer state, C_1..C_d are the benchmarked group elements).
#[derive(Clone, Debug)]
pub struct CliffordGroupBirbCircuit {
    birb: BirbCircuit,
    cliffords: Vec<CliffordTableau>,
}

impl CliffordGroupBirbCircuit {
    pub fn birb(&self) -> &BirbCircuit {
        &self.birb
    }

    /// C_0..C_d in application order.
    pub fn cliffords(&self) -> &[CliffordTableau] {
        &self.cliffords
    }

    pub fn benchmark_depth(&self) -> usize {
        self.cliffords.len() - 1
    }
}

/// Sample a Clifford-group benchmarking circuit: d+1 uniform Cliffords, a
/// uniform non-identity element s of the stabilizer group of C_0|0…0⟩, and
/// the final basis-change layer for the propagated s′.
pub fn build_clifford_group_birb_circuit(
    n: usize,
    depth: usize,
    rng: &mut impl rand::Rng,
) -> Result<CliffordGroupBirbCircuit> {
    let cliffords: Vec<CliffordTableau> = (0..=depth)
        .map(|_| sample_uniform_clifford(n, rng))
        .collect::<Result<_>>()?;

    // The images of Z_q under C_0 generate the stabilizer group of
    // C_0|0…0⟩; a uniform nonzero generator subset gives a uniform
    // non-identity element (sign included).
    let picks = rng.gen_range(1u64..1u64 << n);
    let mut s = PauliOperator::identity(n);
    for q in 0..n {
        if picks >> q & 1 == 1 {
            s = s.multiply(cliffords[0].image_of_z(q)).expect("same n");
        }
    }

    let mut tracked = s.clone();
    for c in &cliffords[1..] {
        tracked = c.conjugate(&tracked).expect("same n");
    }
    let meas = measurement_layer(&tracked);
    meas.conjugate_in_place(&mut tracked).expect("same n");

    let mut circuit = Circuit::new(n);
    let mut core_span = (0usize, 0usize);
    for (i, c) in cliffords.iter().enumerate() {
        let block = synthesize_tableau(c);
        if i == 1 {
            core_span.0 = circuit.depth();
        }
        circuit = circuit.compose(&block).expect("same n");
        if i + 1 == cliffords.len() {
            core_span.1 = circuit.depth();
        }
    }
    if depth == 0 {
        core_span = (circuit.depth(), circuit.depth());
    }
    circuit.push_layer(meas).expect("same n");

    Ok(CliffordGroupBirbCircuit {
        birb: BirbCircuit::from_parts(circuit, depth, core_span, tracked, s),
        cliffords,
    })
}
