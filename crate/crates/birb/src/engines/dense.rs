//! Dense Pauli-transfer evolution on the full 4^n expectation vector.
//!
//! The register state is stored as the vector of Pauli expectations
//! c[A] = Tr(P_A ρ) over the basis order shared with
//! [`PauliOperator`]: qubit q contributes its site code (I=0, Z=1, X=2,
//! Y=3) as base-4 digit q, so the z bit of qubit q sits at index bit 2q
//! and the x bit at bit 2q+1. Clifford gates permute entries with signs,
//! stochastic generators rescale them, and general channels act as
//! transfer matrices on local fibers, so expectations are exact up to
//! floating-point rounding.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::circuits::GateLayer;
use crate::engines::warn_enabled;
use crate::error::{Error, Result};
use crate::noise::{channel_from_generators, measurement_channel, ErrorGenerator, NoiseModel};
use crate::pauli::{CliffordGate, CliffordTableau, PauliOperator};
use crate::sampler::{BirbCircuit, CliffordGroupBirbCircuit};

/// Dense evolution materializes 4^n coefficients and scans them per gate,
/// so the register width is capped.
pub const MAX_DENSE_QUBITS: usize = 6;

/// Register-wide transfer matrices (needed only when a full-width error
/// has coherent parts) are materialized up to this dimension: 4^4.
const MAX_FULL_CHANNEL_DIM: usize = 256;

/// Anticommutation mask of a register-wide Pauli: basis index A
/// anticommutes with the Pauli iff popcount(A & mask) is odd.
fn pauli_mask(p: &PauliOperator) -> u64 {
    let mut mask = 0u64;
    for q in 0..p.qubit_count() {
        mask |= (p.x_bit(q) as u64) << (2 * q);
        mask |= (p.z_bit(q) as u64) << (2 * q + 1);
    }
    mask
}

/// Anticommutation mask of a local Pauli embedded with site j at
/// `qubits[j]`.
fn embedded_mask(p: &PauliOperator, qubits: &[usize]) -> u64 {
    let mut mask = 0u64;
    for (j, &q) in qubits.iter().enumerate() {
        mask |= (p.x_bit(j) as u64) << (2 * q);
        mask |= (p.z_bit(j) as u64) << (2 * q + 1);
    }
    mask
}

/// Index bits covered by a gate support.
fn support_mask(qubits: &[usize]) -> usize {
    qubits.iter().map(|&q| 3usize << (2 * q)).sum()
}

/// Global index offset of a local site-code word on the given support.
fn spread(code: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .map(|(j, &q)| ((code >> (2 * j)) & 3) << (2 * q))
        .sum()
}

fn validate_support(n: usize, qubits: &[usize]) -> Result<()> {
    for (j, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::invalid_index(q, n));
        }
        if qubits[..j].contains(&q) {
            return Err(Error::config("gate support repeats a qubit"));
        }
    }
    Ok(())
}

/// In-place Walsh-Hadamard transform: h'[b] = Σ_v h[v] (−1)^(b·v).
fn fwht(h: &mut [f64]) {
    let mut len = 1;
    while len < h.len() {
        let mut i = 0;
        while i < h.len() {
            for j in i..i + len {
                let (a, b) = (h[j], h[j + len]);
                h[j] = a + b;
                h[j + len] = a - b;
            }
            i += 2 * len;
        }
        len <<= 1;
    }
}

/// The register state as 4^n Pauli expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    coeffs: Vec<f64>,
}

impl DenseState {
    /// The computational zero state: every Z-type basis Pauli has
    /// expectation 1.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("qubit count must be positive"));
        }
        if n > MAX_DENSE_QUBITS {
            return Err(Error::capability(format!(
                "dense evolution materializes 4^n coefficients; n ≤ {MAX_DENSE_QUBITS}, got {n} \
                 (use the frame engine for stochastic models on wider registers)"
            )));
        }
        let x_bits = {
            let mut m = 0usize;
            for q in 0..n {
                m |= 1 << (2 * q + 1);
            }
            m
        };
        let coeffs = (0..1usize << (2 * n))
            .map(|a| if a & x_bits == 0 { 1.0 } else { 0.0 })
            .collect();
        Ok(DenseState { n, coeffs })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Raw expectation vector, indexed by Pauli basis index.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Conjugate the state by one gate: U ρ U†.
    pub fn apply_gate(&mut self, gate: CliffordGate, qubits: &[usize]) -> Result<()> {
        if qubits.len() != gate.arity() {
            return Err(Error::dimension(gate.arity(), qubits.len()));
        }
        validate_support(self.n, qubits)?;
        let states = 1usize << (2 * qubits.len());
        let local: Vec<usize> = (0..qubits.len()).collect();
        let mut table = Vec::with_capacity(states);
        for code in 0..states {
            let mut p = PauliOperator::from_basis_index(qubits.len(), code);
            p.apply_gate_conjugation(gate, &local)?;
            table.push((p.basis_index(), p.sign() as f64));
        }
        let offsets: Vec<usize> = (0..states).map(|code| spread(code, qubits)).collect();
        let support = support_mask(qubits);
        let mut fiber = vec![0.0; states];
        for base in 0..self.coeffs.len() {
            if base & support != 0 {
                continue;
            }
            for code in 0..states {
                fiber[code] = self.coeffs[base + offsets[code]];
            }
            for code in 0..states {
                let (to, sign) = table[code];
                self.coeffs[base + offsets[to]] = sign * fiber[code];
            }
        }
        Ok(())
    }

    pub fn apply_layer(&mut self, layer: &GateLayer) -> Result<()> {
        for (gate, qubits) in layer.gates() {
            self.apply_gate(*gate, qubits)?;
        }
        Ok(())
    }

    /// Conjugate the state by the Clifford a tableau represents.
    pub fn apply_tableau(&mut self, t: &CliffordTableau) -> Result<()> {
        let mut next = vec![0.0; self.coeffs.len()];
        next[0] = self.coeffs[0];
        for a in 1..self.coeffs.len() {
            let p = PauliOperator::from_basis_index(self.n, a);
            let q = t.conjugate(&p)?;
            next[q.basis_index()] = q.sign() as f64 * self.coeffs[a];
        }
        self.coeffs = next;
        Ok(())
    }

    /// Rescale every anticommuting entry, realizing e^(r S_P) with
    /// factor = e^(−2r).
    pub(crate) fn apply_stochastic_factor(&mut self, mask: u64, factor: f64) {
        for (a, c) in self.coeffs.iter_mut().enumerate() {
            if (a as u64 & mask).count_ones() & 1 == 1 {
                *c *= factor;
            }
        }
    }

    /// Apply a local Pauli-transfer matrix (4^k × 4^k, the shared basis
    /// order) with matrix site j acting on `qubits[j]`.
    pub fn apply_channel_local(&mut self, m: &DMatrix<f64>, qubits: &[usize]) -> Result<()> {
        validate_support(self.n, qubits)?;
        let states = 1usize << (2 * qubits.len());
        if m.nrows() != states || m.ncols() != states {
            return Err(Error::dimension(states, m.nrows().max(m.ncols())));
        }
        let offsets: Vec<usize> = (0..states).map(|code| spread(code, qubits)).collect();
        let support = support_mask(qubits);
        let mut fiber = vec![0.0; states];
        for base in 0..self.coeffs.len() {
            if base & support != 0 {
                continue;
            }
            for code in 0..states {
                fiber[code] = self.coeffs[base + offsets[code]];
            }
            for row in 0..states {
                let mut acc = 0.0;
                for col in 0..states {
                    acc += m[(row, col)] * fiber[col];
                }
                self.coeffs[base + offsets[row]] = acc;
            }
        }
        Ok(())
    }

    /// Apply a register-wide Pauli-transfer matrix.
    pub fn apply_channel_full(&mut self, m: &DMatrix<f64>) -> Result<()> {
        let len = self.coeffs.len();
        if m.nrows() != len || m.ncols() != len {
            return Err(Error::dimension(len, m.nrows().max(m.ncols())));
        }
        let out = m * DVector::from_column_slice(&self.coeffs);
        self.coeffs.copy_from_slice(out.as_slice());
        Ok(())
    }

    /// Expectation of a signed Hermitian Pauli.
    pub fn expectation(&self, p: &PauliOperator) -> Result<f64> {
        if p.qubit_count() != self.n {
            return Err(Error::dimension(self.n, p.qubit_count()));
        }
        if !p.is_hermitian() {
            return Err(Error::domain("expectation of a non-Hermitian operator"));
        }
        Ok(p.sign() as f64 * self.coeffs[p.basis_index()])
    }

    /// Computational-basis outcome distribution, indexed with the bit of
    /// qubit q at position q. Entries can dip slightly below zero when
    /// coherent noise is truncated by rounding; see
    /// [`sanitize_distribution`].
    pub fn bitstring_distribution(&self) -> Vec<f64> {
        let size = 1usize << self.n;
        let mut h = vec![0.0; size];
        for (v, slot) in h.iter_mut().enumerate() {
            let mut idx = 0usize;
            for q in 0..self.n {
                idx |= ((v >> q) & 1) << (2 * q);
            }
            *slot = self.coeffs[idx];
        }
        fwht(&mut h);
        let scale = 1.0 / size as f64;
        for p in &mut h {
            *p *= scale;
        }
        h
    }

    pub(crate) fn apply_compiled(&mut self, err: &CompiledError) -> Result<()> {
        match err {
            CompiledError::Masks(masks) => {
                for &(mask, factor) in masks {
                    self.apply_stochastic_factor(mask, factor);
                }
                Ok(())
            }
            CompiledError::Diag(diag) => {
                if diag.len() != self.coeffs.len() {
                    return Err(Error::dimension(self.coeffs.len(), diag.len()));
                }
                for (c, d) in self.coeffs.iter_mut().zip(diag) {
                    *c *= d;
                }
                Ok(())
            }
            CompiledError::Channel { m, qubits } => self.apply_channel_local(m, qubits),
            CompiledError::Full(m) => self.apply_channel_full(m),
        }
    }
}

/// Clip rounding-level negative probabilities and renormalize. Entries
/// below −10⁻⁶ indicate real loss of positivity and are reported on
/// stderr (silence with BIRB_LOG=off).
pub fn sanitize_distribution(dist: &mut [f64]) -> Result<()> {
    let min = dist.iter().fold(f64::INFINITY, |m, &p| m.min(p));
    if min < -1e-6 && warn_enabled() {
        eprintln!("warning: outcome distribution has entry {min:.3e}; clipping to zero");
    }
    let mut sum = 0.0;
    for p in dist.iter_mut() {
        if !p.is_finite() {
            return Err(Error::numerical("non-finite outcome probability"));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
        sum += *p;
    }
    if sum <= 0.0 {
        return Err(Error::numerical("outcome distribution sums to zero"));
    }
    for p in dist.iter_mut() {
        *p /= sum;
    }
    Ok(())
}

/// One error event in dense form.
pub(crate) enum CompiledError {
    /// Independent stochastic generators: (anticommutation mask, e^(−2r)).
    Masks(Vec<(u64, f64)>),
    /// Precombined stochastic diagonal over all 4^n indices.
    Diag(Vec<f64>),
    /// Local transfer matrix on an explicit support.
    Channel { m: DMatrix<f64>, qubits: Vec<usize> },
    /// Register-wide transfer matrix.
    Full(DMatrix<f64>),
}

/// A noise model lowered to dense operations for one register width.
pub(crate) struct DenseNoise {
    gate: HashMap<(CliffordGate, Vec<usize>), CompiledError>,
    layer: Option<CompiledError>,
    prep: Vec<Option<DMatrix<f64>>>,
    measurement: Vec<Option<DMatrix<f64>>>,
}

/// Lower a register-wide generator list: a stochastic diagonal when every
/// generator is stochastic, a full transfer matrix (n ≤ 4) otherwise.
pub(crate) fn compile_register_error(
    gens: &[ErrorGenerator],
    n: usize,
) -> Result<Option<CompiledError>> {
    for g in gens {
        if g.qubit_count() != n {
            return Err(Error::dimension(n, g.qubit_count()));
        }
    }
    if gens.iter().all(|g| g.rate() == 0.0) {
        return Ok(None);
    }
    if gens.iter().all(ErrorGenerator::is_stochastic) {
        let mut diag = vec![1.0; 1usize << (2 * n)];
        for g in gens {
            let ErrorGenerator::Stochastic { pauli, rate } = g else {
                unreachable!("checked stochastic")
            };
            if *rate == 0.0 {
                continue;
            }
            let mask = pauli_mask(pauli);
            let factor = (-2.0 * rate).exp();
            for (a, d) in diag.iter_mut().enumerate() {
                if (a as u64 & mask).count_ones() & 1 == 1 {
                    *d *= factor;
                }
            }
        }
        return Ok(Some(CompiledError::Diag(diag)));
    }
    if 1usize << (2 * n) > MAX_FULL_CHANNEL_DIM {
        return Err(Error::capability(format!(
            "register-wide errors with coherent parts need the full 4^n transfer matrix; \
             n ≤ 4, got {n} (restrict to stochastic generators for wider registers)"
        )));
    }
    Ok(Some(CompiledError::Full(channel_from_generators(gens, n)?)))
}

impl DenseNoise {
    pub(crate) fn compile(noise: &NoiseModel, n: usize) -> Result<Self> {
        if noise.qubit_count() != n {
            return Err(Error::dimension(n, noise.qubit_count()));
        }
        let mut gate = HashMap::new();
        for ((name, qubits), gens) in noise.gate_error_entries() {
            if gens.iter().all(|g| g.rate() == 0.0) {
                continue;
            }
            let key = CliffordGate::from_name(name)
                .ok_or_else(|| Error::config(format!("unknown gate name {name:?}")))?;
            let err = if gens.iter().all(ErrorGenerator::is_stochastic) {
                let masks = gens
                    .iter()
                    .filter(|g| g.rate() != 0.0)
                    .map(|g| {
                        let ErrorGenerator::Stochastic { pauli, rate } = g else {
                            unreachable!("checked stochastic")
                        };
                        (embedded_mask(pauli, qubits), (-2.0 * rate).exp())
                    })
                    .collect();
                CompiledError::Masks(masks)
            } else {
                CompiledError::Channel {
                    m: channel_from_generators(gens, qubits.len())?,
                    qubits: qubits.clone(),
                }
            };
            gate.insert((key, qubits.clone()), err);
        }
        let channel_for = |spec| -> Result<Option<DMatrix<f64>>> {
            if crate::noise::MeasurementErrorSpec::is_none(&spec) {
                Ok(None)
            } else {
                Ok(Some(measurement_channel(&spec)?))
            }
        };
        Ok(DenseNoise {
            gate,
            layer: compile_register_error(noise.layer_errors(), n)?,
            prep: (0..n).map(|q| channel_for(noise.prep(q))).collect::<Result<_>>()?,
            measurement: (0..n)
                .map(|q| channel_for(noise.measurement(q)))
                .collect::<Result<_>>()?,
        })
    }
}

/// Run the full noisy circuit: preparation channels, every layer with its
/// post-gate errors, register-wide layer errors after each core layer,
/// and measurement channels.
fn evolve(bc: &BirbCircuit, noise: &NoiseModel) -> Result<DenseState> {
    let n = bc.qubit_count();
    let compiled = DenseNoise::compile(noise, n)?;
    let mut state = DenseState::zero_state(n)?;
    for q in 0..n {
        if let Some(m) = &compiled.prep[q] {
            state.apply_channel_local(m, &[q])?;
        }
    }
    let (core_start, core_end) = bc.core_span();
    for (i, layer) in bc.circuit().layers().iter().enumerate() {
        state.apply_layer(layer)?;
        for (gate, qubits) in layer.gates() {
            if let Some(err) = compiled.gate.get(&(*gate, qubits.clone())) {
                state.apply_compiled(err)?;
            }
        }
        if (core_start..core_end).contains(&i) {
            if let Some(err) = &compiled.layer {
                state.apply_compiled(err)?;
            }
        }
    }
    for q in 0..n {
        if let Some(m) = &compiled.measurement[q] {
            state.apply_channel_local(m, &[q])?;
        }
    }
    Ok(state)
}

/// Exact expected success value ⟨s_C⟩ under the noise model.
pub fn dense_expectation(bc: &BirbCircuit, noise: &NoiseModel) -> Result<f64> {
    evolve(bc, noise)?.expectation(bc.target())
}

/// Cumulative outcome distribution of the noisy circuit, sanitized.
pub(crate) fn outcome_cdf(bc: &BirbCircuit, noise: &NoiseModel) -> Result<Vec<f64>> {
    let state = evolve(bc, noise)?;
    let mut dist = state.bitstring_distribution();
    sanitize_distribution(&mut dist)?;
    let mut acc = 0.0;
    Ok(dist
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect())
}

/// Sample shot success values (±1) from the exact noisy outcome
/// distribution.
pub fn dense_sample(
    bc: &BirbCircuit,
    noise: &NoiseModel,
    shots: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<i8>> {
    let cdf = outcome_cdf(bc, noise)?;
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let r: f64 = rng.gen();
        let b = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
        out.push(bc.success_value(&[b as u64]));
    }
    Ok(out)
}

/// Expected success value of a Clifford-group circuit when the same error
/// channel follows every multi-qubit Clifford, C_0 included. The outcome
/// Pauli is measured directly, so SPAM and basis-change layers drop out.
pub fn clifford_group_expectation(
    cgc: &CliffordGroupBirbCircuit,
    error: &[ErrorGenerator],
) -> Result<f64> {
    let n = cgc.birb().qubit_count();
    let compiled = compile_register_error(error, n)?;
    let mut state = DenseState::zero_state(n)?;
    for t in cgc.cliffords() {
        state.apply_tableau(t)?;
        if let Some(err) = &compiled {
            state.apply_compiled(err)?;
        }
    }
    let mut s = cgc.birb().initial_stabilizer().clone();
    for t in &cgc.cliffords()[1..] {
        s = t.conjugate(&s)?;
    }
    state.expectation(&s)
}

impl DenseState {
    /// Indicator vector e_index, for building transfer-matrix columns.
    pub(crate) fn basis_state(n: usize, index: usize) -> Result<Self> {
        let mut state = DenseState::zero_state(n)?;
        state.coeffs.fill(0.0);
        state.coeffs[index] = 1.0;
        Ok(state)
    }

    /// One core layer with its noise: the gates, their attached errors,
    /// then the register-wide layer error.
    pub(crate) fn apply_noisy_layer(&mut self, layer: &GateLayer, dn: &DenseNoise) -> Result<()> {
        self.apply_layer(layer)?;
        for (gate, qubits) in layer.gates() {
            if let Some(err) = dn.gate.get(&(*gate, qubits.clone())) {
                self.apply_compiled(err)?;
            }
        }
        if let Some(err) = &dn.layer {
            self.apply_compiled(err)?;
        }
        Ok(())
    }
}

/// Exact polarization of noisy core circuits: the entanglement fidelity
/// of the noisy layer product against the ideal circuit, rescaled to
/// γ = (4^n F − 1)/(4^n − 1).
pub(crate) struct CorePolarizer {
    n: usize,
    compiled: DenseNoise,
    stochastic: bool,
}

impl CorePolarizer {
    pub(crate) fn new(noise: &NoiseModel, n: usize) -> Result<Self> {
        if noise.qubit_count() != n {
            return Err(Error::dimension(n, noise.qubit_count()));
        }
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::capability(format!(
                "polarization evolves 4^n Pauli images; n ≤ {MAX_DENSE_QUBITS}, got {n}"
            )));
        }
        Ok(CorePolarizer {
            n,
            compiled: DenseNoise::compile(noise, n)?,
            stochastic: noise.is_stochastic_only(),
        })
    }

    pub(crate) fn qubit_count(&self) -> usize {
        self.n
    }

    pub(crate) fn polarization(&self, layers: &[GateLayer]) -> Result<f64> {
        for layer in layers {
            if layer.qubit_count() != self.n {
                return Err(Error::dimension(self.n, layer.qubit_count()));
            }
        }
        let fidelity = if self.stochastic {
            self.fidelity_stochastic(layers)?
        } else {
            self.fidelity_general(layers)?
        };
        let dim = (1u64 << (2 * self.n)) as f64;
        Ok((dim * fidelity - 1.0) / (dim - 1.0))
    }

    /// Ideal conjugation image of every basis Pauli through one layer,
    /// signs dropped (they cancel against the noisy path's).
    fn layer_index_map(&self, layer: &GateLayer) -> Result<Vec<usize>> {
        let states = 1usize << (2 * self.n);
        let mut map = Vec::with_capacity(states);
        for a in 0..states {
            let mut p = PauliOperator::from_basis_index(self.n, a);
            layer.conjugate_in_place(&mut p)?;
            map.push(p.basis_index());
        }
        Ok(map)
    }

    /// Damping factor each basis Pauli picks up from one layer's
    /// stochastic noise, evaluated after the layer's conjugation.
    fn layer_damping(&self, layer: &GateLayer) -> Result<Vec<f64>> {
        let states = 1usize << (2 * self.n);
        let mut diag = vec![1.0; states];
        let mut masks: Vec<(u64, f64)> = Vec::new();
        for (gate, qubits) in layer.gates() {
            match self.compiled.gate.get(&(*gate, qubits.clone())) {
                None => {}
                Some(CompiledError::Masks(list)) => masks.extend_from_slice(list),
                Some(_) => {
                    return Err(Error::domain(
                        "stochastic fast path hit a non-stochastic gate error",
                    ))
                }
            }
        }
        for (mask, factor) in masks {
            for (a, d) in diag.iter_mut().enumerate() {
                if (a as u64 & mask).count_ones() & 1 == 1 {
                    *d *= factor;
                }
            }
        }
        match &self.compiled.layer {
            None => {}
            Some(CompiledError::Diag(v)) => {
                for (d, f) in diag.iter_mut().zip(v) {
                    *d *= f;
                }
            }
            Some(CompiledError::Masks(list)) => {
                for &(mask, factor) in list {
                    for (a, d) in diag.iter_mut().enumerate() {
                        if (a as u64 & mask).count_ones() & 1 == 1 {
                            *d *= factor;
                        }
                    }
                }
            }
            Some(_) => {
                return Err(Error::domain(
                    "stochastic fast path hit a non-stochastic layer error",
                ))
            }
        }
        Ok(diag)
    }

    /// Stochastic noise never moves a Pauli off its conjugation path, so
    /// the fidelity is the mean accumulated damping over basis Paulis.
    fn fidelity_stochastic(&self, layers: &[GateLayer]) -> Result<f64> {
        let states = 1usize << (2 * self.n);
        let mut perm: Vec<usize> = (0..states).collect();
        let mut damp = vec![1.0; states];
        for layer in layers {
            let map = self.layer_index_map(layer)?;
            let diag = self.layer_damping(layer)?;
            for (slot, d) in perm.iter_mut().zip(damp.iter_mut()) {
                *slot = map[*slot];
                *d *= diag[*slot];
            }
        }
        Ok(damp.iter().sum::<f64>() / states as f64)
    }

    /// F = Tr(R_ideal^T R_noisy) / 4^n, one transfer-matrix column per
    /// basis Pauli.
    fn fidelity_general(&self, layers: &[GateLayer]) -> Result<f64> {
        let states = 1usize << (2 * self.n);
        let mut sum = 0.0;
        for a in 0..states {
            let mut state = DenseState::basis_state(self.n, a)?;
            let mut ideal = PauliOperator::from_basis_index(self.n, a);
            for layer in layers {
                state.apply_noisy_layer(layer, &self.compiled)?;
                layer.conjugate_in_place(&mut ideal)?;
            }
            sum += ideal.sign() as f64 * state.coeffs[ideal.basis_index()];
        }
        Ok(sum / states as f64)
    }

    /// Transfer matrix of one noisy layer (gates, gate errors, layer
    /// error), column per basis Pauli.
    pub(crate) fn noisy_layer_ptm(&self, layer: &GateLayer) -> Result<DMatrix<f64>> {
        let states = 1usize << (2 * self.n);
        let mut m = DMatrix::zeros(states, states);
        for a in 0..states {
            let mut state = DenseState::basis_state(self.n, a)?;
            state.apply_noisy_layer(layer, &self.compiled)?;
            for (b, &c) in state.coeffs.iter().enumerate() {
                m[(b, a)] = c;
            }
        }
        Ok(m)
    }
}

/// Transfer matrix of the ideal layer: a signed permutation.
pub(crate) fn ideal_layer_ptm(n: usize, layer: &GateLayer) -> Result<DMatrix<f64>> {
    let states = 1usize << (2 * n);
    let mut m = DMatrix::zeros(states, states);
    for a in 0..states {
        let mut p = PauliOperator::from_basis_index(n, a);
        layer.conjugate_in_place(&mut p)?;
        m[(p.basis_index(), a)] = p.sign() as f64;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{Circuit, GateSetSpec};
    use crate::noise::MeasurementErrorSpec;
    use crate::pauli::{PauliKind, SingleClifford};
    use crate::rng::SeedStream;
    use crate::sampler::{build_birb_circuit, build_clifford_group_birb_circuit, OmegaSpec};

    fn rng_for(test: &str) -> crate::rng::Rng {
        SeedStream::new(0xDE45E).child_named(test).rng()
    }

    fn random_circuit(n: usize, layers: usize, rng: &mut crate::rng::Rng) -> Circuit {
        let xi = if n > 1 { 0.4 } else { 0.0 };
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(n).unwrap(), xi).unwrap();
        let mut c = Circuit::new(n);
        for _ in 0..layers {
            c.push_layer(omega.sample_layer(rng)).unwrap();
        }
        c
    }

    #[test]
    fn zero_state_has_unit_z_type_expectations() {
        let state = DenseState::zero_state(2).unwrap();
        let ones = state.coeffs().iter().filter(|&&c| c == 1.0).count();
        assert_eq!(ones, 4);
        let zz = PauliOperator::from_sites(&[PauliKind::Z, PauliKind::Z], 1);
        let zi = PauliOperator::from_sites(&[PauliKind::Z, PauliKind::I], 1);
        let xi = PauliOperator::from_sites(&[PauliKind::X, PauliKind::I], 1);
        assert_eq!(state.expectation(&zz).unwrap(), 1.0);
        assert_eq!(state.expectation(&zi).unwrap(), 1.0);
        assert_eq!(state.expectation(&zi.negated()).unwrap(), -1.0);
        assert_eq!(state.expectation(&xi).unwrap(), 0.0);

        assert!(DenseState::zero_state(0).is_err());
        assert!(DenseState::zero_state(MAX_DENSE_QUBITS + 1).is_err());
    }

    // Transporting coefficients with the gate tables must match operator
    // conjugation: ⟨U P U†⟩ after the circuit equals ⟨P⟩ before it.
    #[test]
    fn gates_transport_conjugated_expectations() {
        let mut rng = rng_for("transport");
        for n in 1..=3 {
            for _ in 0..6 {
                let circuit = random_circuit(n, 4, &mut rng);
                let mut state = DenseState::zero_state(n).unwrap();
                for layer in circuit.layers() {
                    state.apply_layer(layer).unwrap();
                }
                for q in 0..n {
                    let z = PauliOperator::single(n, q, PauliKind::Z).unwrap();
                    let x = PauliOperator::single(n, q, PauliKind::X).unwrap();
                    let img_z = circuit.conjugate_pauli(&z).unwrap();
                    let img_x = circuit.conjugate_pauli(&x).unwrap();
                    assert!((state.expectation(&img_z).unwrap() - 1.0).abs() < 1e-12);
                    assert!(state.expectation(&img_x).unwrap().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tableau_application_matches_layer_application() {
        let mut rng = rng_for("tableau");
        for n in 1..=3 {
            let circuit = random_circuit(n, 5, &mut rng);
            let mut by_layers = DenseState::zero_state(n).unwrap();
            for layer in circuit.layers() {
                by_layers.apply_layer(layer).unwrap();
            }
            let mut by_tableau = DenseState::zero_state(n).unwrap();
            by_tableau
                .apply_tableau(&crate::pauli::CliffordTableau::from_circuit(&circuit))
                .unwrap();
            for (a, b) in by_layers.coeffs().iter().zip(by_tableau.coeffs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stochastic_masks_match_the_local_channel() {
        let mut rng = rng_for("masks");
        let n = 3;
        let circuit = random_circuit(n, 3, &mut rng);
        let mut state = DenseState::zero_state(n).unwrap();
        for layer in circuit.layers() {
            state.apply_layer(layer).unwrap();
        }
        let xz = PauliOperator::from_sites(&[PauliKind::X, PauliKind::Z], 1);
        let yy = PauliOperator::from_sites(&[PauliKind::Y, PauliKind::Y], 1);
        let gens = vec![
            ErrorGenerator::stochastic(xz, 0.07).unwrap(),
            ErrorGenerator::stochastic(yy, 0.03).unwrap(),
        ];
        // Deliberately reversed support: matrix site 0 acts on qubit 2.
        let qubits = [2usize, 0];

        let mut by_masks = state.clone();
        for g in &gens {
            let ErrorGenerator::Stochastic { pauli, rate } = g else {
                unreachable!()
            };
            by_masks.apply_stochastic_factor(embedded_mask(pauli, &qubits), (-2.0 * rate).exp());
        }
        let mut by_channel = state.clone();
        by_channel
            .apply_channel_local(&channel_from_generators(&gens, 2).unwrap(), &qubits)
            .unwrap();
        for (a, b) in by_masks.coeffs().iter().zip(by_channel.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn distributions_of_simple_states() {
        let n = 2;
        let mut state = DenseState::zero_state(n).unwrap();
        assert_eq!(state.bitstring_distribution(), vec![1.0, 0.0, 0.0, 0.0]);

        state
            .apply_gate(CliffordGate::Single(SingleClifford::x()), &[0])
            .unwrap();
        assert_eq!(state.bitstring_distribution(), vec![0.0, 1.0, 0.0, 0.0]);

        let mut plus = DenseState::zero_state(n).unwrap();
        plus.apply_gate(CliffordGate::from_name("H").unwrap(), &[1])
            .unwrap();
        let dist = plus.bitstring_distribution();
        assert!((dist[0] - 0.5).abs() < 1e-12 && (dist[2] - 0.5).abs() < 1e-12);
        assert!(dist[1].abs() < 1e-12 && dist[3].abs() < 1e-12);
    }

    #[test]
    fn sanitize_clips_and_renormalizes() {
        let mut dist = vec![0.5, -1e-9, 0.5, 0.0];
        sanitize_distribution(&mut dist).unwrap();
        assert_eq!(dist[1], 0.0);
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut zero = vec![0.0, 0.0];
        assert!(sanitize_distribution(&mut zero).is_err());
    }

    // Global depolarizing noise with polarization γ after each of the d
    // core layers and perfect SPAM gives exactly γ^d.
    #[test]
    fn depolarizing_layer_noise_decays_as_gamma_to_the_d() {
        let mut rng = rng_for("depolarizing");
        let n = 2;
        let gamma = 0.93;
        let noise = NoiseModel::global_depolarizing(n, gamma).unwrap();
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(n).unwrap(), 0.5).unwrap();
        for depth in [0usize, 1, 3, 6] {
            let bc = build_birb_circuit(depth, &omega, &mut rng).unwrap();
            let f = dense_expectation(&bc, &noise).unwrap();
            assert!(
                (f - gamma.powi(depth as i32)).abs() < 1e-12,
                "depth {depth}: {f} vs {}",
                gamma.powi(depth as i32)
            );
        }
    }

    #[test]
    fn spam_errors_multiply_the_depth_zero_expectation() {
        let mut rng = rng_for("spam");
        let (p_prep, p_meas) = (0.02, 0.05);
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(1).unwrap(), 0.0).unwrap();
        let mut noise = NoiseModel::ideal(1);
        noise
            .set_prep(0, MeasurementErrorSpec::BitFlip { p_m: p_prep })
            .unwrap();
        noise
            .set_measurement(0, MeasurementErrorSpec::BitFlip { p_m: p_meas })
            .unwrap();
        // A bit flip before L_0 scales ⟨Z⟩, hence ⟨s⟩, by e^(−2 p_prep);
        // one before readout scales the Z-form target by e^(−2 p_meas).
        let want = (-2.0 * (p_prep + p_meas)).exp();
        for _ in 0..8 {
            let bc = build_birb_circuit(0, &omega, &mut rng).unwrap();
            let f = dense_expectation(&bc, &noise).unwrap();
            assert!((f - want).abs() < 1e-12, "{f} vs {want}");
        }
    }

    #[test]
    fn sampling_agrees_with_the_exact_expectation() {
        let mut rng = rng_for("sampling");
        let n = 2;
        let noise = NoiseModel::global_depolarizing(n, 0.9).unwrap();
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(n).unwrap(), 0.5).unwrap();
        let bc = build_birb_circuit(3, &omega, &mut rng).unwrap();
        let exact = dense_expectation(&bc, &noise).unwrap();
        let shots = 20_000;
        let values = dense_sample(&bc, &noise, shots, &mut rng).unwrap();
        assert_eq!(values.len(), shots);
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / shots as f64;
        let sigma = ((1.0 - exact * exact) / shots as f64).sqrt();
        assert!(
            (mean - exact).abs() < 5.0 * sigma,
            "mean {mean} vs exact {exact} (σ = {sigma})"
        );
        assert!(dense_sample(&bc, &noise, 0, &mut rng).unwrap().is_empty());
    }

    // With the same depolarizing channel after every Clifford, C_0
    // included, the success value is exactly γ^(d+1).
    #[test]
    fn clifford_group_depolarizing_gives_gamma_to_the_d_plus_one() {
        let mut rng = rng_for("clifford-group");
        let n = 2;
        let gamma = 0.9;
        let error = NoiseModel::global_depolarizing(n, gamma)
            .unwrap()
            .layer_errors()
            .to_vec();
        for depth in [0usize, 1, 2] {
            let cgc = build_clifford_group_birb_circuit(n, depth, &mut rng).unwrap();
            let f = clifford_group_expectation(&cgc, &error).unwrap();
            let want = gamma.powi(depth as i32 + 1);
            assert!((f - want).abs() < 1e-10, "depth {depth}: {f} vs {want}");
        }
    }

    #[test]
    fn register_errors_with_coherent_parts_are_capped() {
        let h = ErrorGenerator::hamiltonian(
            PauliOperator::from_sites(&[PauliKind::Z; 5], 1),
            0.1,
        )
        .unwrap();
        assert!(matches!(
            compile_register_error(std::slice::from_ref(&h), 5),
            Err(Error::Capability(_))
        ));
        // The same generator fits once the register is narrow enough.
        let h2 = ErrorGenerator::hamiltonian(
            PauliOperator::from_sites(&[PauliKind::Z; 4], 1),
            0.1,
        )
        .unwrap();
        assert!(compile_register_error(std::slice::from_ref(&h2), 4).is_ok());
    }
}
