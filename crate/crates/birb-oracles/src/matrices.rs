use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use birb::circuits::{Circuit, GateLayer};
use birb::pauli::{CliffordGate, PauliOperator, SignedAxis, SingleClifford};

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn letter_matrix(x: bool, z: bool) -> CMat {
    let x_mat = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let z_mat = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let id = CMat::identity(2, 2);
    match (x, z) {
        (false, false) => id,
        (true, false) => x_mat,
        (false, true) => z_mat,
        (true, true) => x_mat * z_mat,
    }
}

/// Dense matrix of a signed Pauli, `i^k Π X^x Z^z` exactly.
pub fn pauli_matrix(p: &PauliOperator) -> CMat {
    let n = p.qubit_count();
    let mut m = CMat::identity(1, 1);
    // Qubit 0 least significant: higher qubits go on the left of the product.
    for q in (0..n).rev() {
        m = kron(&m, &letter_matrix(p.x_bit(q), p.z_bit(q)));
    }
    let phase = c(0.0, 1.0).powu(u32::from(p.phase_exp()));
    m * phase
}

fn axis_matrix(axis: SignedAxis) -> CMat {
    let base = match axis.axis() {
        0 => letter_matrix(true, false),
        1 => letter_matrix(true, true) * c(0.0, 1.0),
        _ => letter_matrix(false, true),
    };
    if axis.is_negative() {
        base * c(-1.0, 0.0)
    } else {
        base
    }
}

pub fn approx_eq(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.nrows() == b.nrows()
        && a.ncols() == b.ncols()
        && (a - b).iter().all(|e| e.norm() <= tol)
}

fn classify_axis(m: &CMat) -> Option<SignedAxis> {
    for code in 0..6 {
        let axis = SignedAxis::from_code(code).unwrap();
        if approx_eq(m, &axis_matrix(axis), 1e-9) {
            return Some(axis);
        }
    }
    None
}

/// 2×2 unitaries for the canonical 24 single-qubit Cliffords, generated by
/// multiplying out H and S words and classified by conjugation action.
pub fn single_clifford_matrix(gate: SingleClifford) -> CMat {
    static TABLE: OnceLock<Vec<CMat>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let s = 1.0 / f64::sqrt(2.0);
        let h = CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        let sg = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let x_mat = letter_matrix(true, false);
        let z_mat = letter_matrix(false, true);
        let mut found: Vec<Option<CMat>> = vec![None; 24];
        let mut frontier = vec![CMat::identity(2, 2)];
        let mut n_found = 0;
        while n_found < 24 {
            let mut next = vec![];
            for u in frontier {
                let ix = classify_axis(&(&u * &x_mat * u.adjoint())).expect("Clifford word");
                let iz = classify_axis(&(&u * &z_mat * u.adjoint())).expect("Clifford word");
                let idx = SingleClifford::from_images(ix, iz).unwrap().index();
                if found[idx].is_none() {
                    found[idx] = Some(u.clone());
                    n_found += 1;
                    next.push(&h * &u);
                    next.push(&sg * &u);
                }
            }
            frontier = next;
            assert!(!frontier.is_empty() || n_found == 24, "H and S generate all 24");
        }
        found.into_iter().map(Option::unwrap).collect()
    });
    table[gate.index()].clone()
}

/// CNOT with the given control and target bit positions inside an n-qubit
/// register: permutation matrix |b⟩ → |b ⊕ (b_c · 2^t)⟩.
pub fn cnot_matrix(n: usize, control: usize, target: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for b in 0..dim {
        let out = if b >> control & 1 == 1 { b ^ (1 << target) } else { b };
        m[(out, b)] = c(1.0, 0.0);
    }
    m
}

fn embed_single(n: usize, u: &CMat, qubit: usize) -> CMat {
    let mut m = CMat::identity(1, 1);
    for q in (0..n).rev() {
        let site = if q == qubit { u.clone() } else { CMat::identity(2, 2) };
        m = kron(&m, &site);
    }
    m
}

pub fn gate_matrix(n: usize, gate: CliffordGate, qubits: &[usize]) -> CMat {
    match gate {
        CliffordGate::Single(csc) => embed_single(n, &single_clifford_matrix(csc), qubits[0]),
        CliffordGate::Cnot => cnot_matrix(n, qubits[0], qubits[1]),
    }
}

pub fn layer_matrix(n: usize, layer: &GateLayer) -> CMat {
    let mut m = CMat::identity(1 << n, 1 << n);
    for (gate, qubits) in layer.gates() {
        m = gate_matrix(n, *gate, qubits) * m;
    }
    m
}

pub fn circuit_matrix(circuit: &Circuit) -> CMat {
    let n = circuit.qubit_count();
    let mut m = CMat::identity(1 << n, 1 << n);
    for layer in circuit.layers() {
        m = layer_matrix(n, layer) * m;
    }
    m
}

/// `U P U†`.
pub fn conjugate(u: &CMat, p: &CMat) -> CMat {
    u * p * u.adjoint()
}
