//! The layer-averaged superchannel and its spectrum.
//!
//! For a layer distribution Ω and noise ℰ, the map
//! ℒ(ℳ) = E_L[𝒰(L)⁻¹ ℳ ℰ_L 𝒰(L)] propagates the deviation of the
//! benchmark's effective channel from depth d to depth d + 1. Its second
//! largest eigenvalue modulus λ is the decay rate the benchmark fits, so
//! building ℒ directly gives an independent prediction of p.
//!
//! With column-stacking vectorization, vec(AℳB) = (Bᵀ ⊗ A)vec(ℳ), so
//! each layer contributes kron(R_noisyᵀ, R_idealᵀ) where R_noisy is the
//! transfer matrix of ℰ_L 𝒰(L) and R_ideal that of 𝒰(L). The matrix is
//! 16^n-dimensional, so construction is capped at two qubits.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::GateLayer;
use crate::engines::{ideal_layer_ptm, CorePolarizer};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::CliffordGate;
use crate::sampler::OmegaSpec;

/// Largest register the 16^n-dimensional superchannel is built for.
pub const MAX_SUPERCHANNEL_QUBITS: usize = 2;

/// Spectrum summary of the layer-averaged superchannel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LSuperchannelReport {
    pub n: usize,
    /// Number of weighted layers averaged over.
    pub layer_count: usize,
    /// Eigenvalues with modulus above 1 − 1e−9. Noise-free layer
    /// distributions whose support generates a group acting irreducibly
    /// on the traceless block have exactly two.
    pub unit_eigenvalues: usize,
    /// Second largest eigenvalue modulus: the predicted decay rate.
    pub lambda: f64,
    /// All eigenvalues as (re, im), sorted by descending modulus.
    pub eigenvalues: Vec<(f64, f64)>,
}

/// Every layer Ω can emit, with its exact probability.
///
/// Mirrors the edgegrab sampler: for one qubit the layer is a uniform
/// single-qubit gate; for two qubits the single edge is retained with
/// probability ξ and oriented uniformly, otherwise both qubits draw
/// uniform single-qubit gates.
pub fn enumerate_omega_layers(spec: &OmegaSpec) -> Result<Vec<(GateLayer, f64)>> {
    let gs = spec.gate_set();
    let n = gs.qubit_count();
    if n == 0 || n > MAX_SUPERCHANNEL_QUBITS {
        return Err(Error::capability(format!(
            "layer enumeration supports 1..={MAX_SUPERCHANNEL_QUBITS} qubits, got {n}"
        )));
    }
    let singles = gs.single_qubit_gates();
    let s = singles.len() as f64;
    let mut layers = vec![];
    if n == 1 {
        for &g in singles {
            layers.push((
                GateLayer::new(1, vec![(CliffordGate::Single(g), vec![0])])?,
                1.0 / s,
            ));
        }
        return Ok(layers);
    }
    let p_two = if gs.connectivity().is_empty() {
        0.0
    } else {
        spec.xi()
    };
    if p_two > 0.0 {
        for (c, t) in [(0usize, 1usize), (1, 0)] {
            layers.push((
                GateLayer::new(2, vec![(gs.two_qubit_gate(), vec![c, t])])?,
                p_two / 2.0,
            ));
        }
    }
    let pair = (1.0 - p_two) / (s * s);
    for &ga in singles {
        for &gb in singles {
            layers.push((
                GateLayer::new(
                    2,
                    vec![
                        (CliffordGate::Single(ga), vec![0]),
                        (CliffordGate::Single(gb), vec![1]),
                    ],
                )?,
                pair,
            ));
        }
    }
    Ok(layers)
}

fn build_from_layers(
    n: usize,
    layers: &[(GateLayer, f64)],
    noise: &NoiseModel,
) -> Result<LSuperchannelReport> {
    if n == 0 || n > MAX_SUPERCHANNEL_QUBITS {
        return Err(Error::capability(format!(
            "the superchannel is 16^n-dimensional; n = {n} exceeds {MAX_SUPERCHANNEL_QUBITS}"
        )));
    }
    let polarizer = CorePolarizer::new(noise, n)?;
    let dim = 1usize << (2 * n);
    let mut l = DMatrix::<f64>::zeros(dim * dim, dim * dim);
    for (layer, prob) in layers {
        let ideal = ideal_layer_ptm(n, layer)?;
        let noisy = polarizer.noisy_layer_ptm(layer)?;
        l += noisy.transpose().kronecker(&ideal.transpose()) * *prob;
    }
    // faer's eigensolver: the superchannel has heavily degenerate
    // eigenvalue clusters that stall simpler QR iterations.
    let fm = faer::Mat::from_fn(dim * dim, dim * dim, |i, j| l[(i, j)]);
    let mut eigenvalues: Vec<(f64, f64)> = fm
        .eigenvalues::<faer::complex_native::c64>()
        .iter()
        .map(|c| (c.re, c.im))
        .collect();
    eigenvalues.sort_by(|a, b| {
        let (ma, mb) = (a.0 * a.0 + a.1 * a.1, b.0 * b.0 + b.1 * b.1);
        mb.partial_cmp(&ma).expect("eigenvalues are finite")
    });
    let modulus = |&(re, im): &(f64, f64)| (re * re + im * im).sqrt();
    let unit_eigenvalues = eigenvalues.iter().filter(|e| modulus(e) > 1.0 - 1e-9).count();
    let lambda = modulus(&eigenvalues[1]);
    Ok(LSuperchannelReport {
        n,
        layer_count: layers.len(),
        unit_eigenvalues,
        lambda,
        eigenvalues,
    })
}

/// Build ℒ exactly from the enumerated layer distribution.
pub fn build_l_superchannel(spec: &OmegaSpec, noise: &NoiseModel) -> Result<LSuperchannelReport> {
    let layers = enumerate_omega_layers(spec)?;
    debug_assert!(
        (layers.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12,
        "layer probabilities must sum to 1"
    );
    build_from_layers(spec.qubit_count(), &layers, noise)
}

/// Build ℒ from a Monte Carlo average of `samples` layers drawn from Ω.
pub fn build_l_superchannel_sampled(
    spec: &OmegaSpec,
    noise: &NoiseModel,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<LSuperchannelReport> {
    if samples == 0 {
        return Err(Error::domain("need at least one sampled layer"));
    }
    let w = 1.0 / samples as f64;
    let layers: Vec<(GateLayer, f64)> =
        (0..samples).map(|_| (spec.sample_layer(rng), w)).collect();
    build_from_layers(spec.qubit_count(), &layers, noise)
}
