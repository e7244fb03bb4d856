//! Pauli-frame Monte Carlo engine.
//!
//! For stochastic Pauli noise and bit-flip SPAM, every error event is an
//! independent coin that either flips the measured parity or leaves it
//! alone: a Pauli error inserted at layer boundary t flips the outcome
//! iff it anticommutes with the target Pauli propagated to t. The engine
//! conjugates the tracked Pauli through the circuit once, collects the
//! coin probabilities, and folds them into the exact shot-flip
//! probability (1 − Π(1 − 2pᵢ))/2, so sampling is one Bernoulli draw per
//! shot. Cost scales with the circuit, never with 4^n.


use crate::error::{Error, Result};
use crate::noise::{ErrorGenerator, MeasurementErrorSpec, NoiseModel};
use crate::pauli::{PauliKind, PauliOperator};
use crate::sampler::BirbCircuit;

/// Flip probability of the stochastic channel e^(r S_P) on an
/// anticommuting Pauli.
fn flip_prob(rate: f64) -> f64 {
    (1.0 - (-2.0 * rate).exp()) / 2.0
}

/// A local generator Pauli placed on the register with site j at
/// `qubits[j]`.
fn embed(local: &PauliOperator, qubits: &[usize], n: usize) -> Result<PauliOperator> {
    let mut sites = vec![PauliKind::I; n];
    for (j, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::invalid_index(q, n));
        }
        sites[q] = local.site(j);
    }
    Ok(PauliOperator::from_sites(&sites, 1))
}

/// Per-event parity-flip probabilities for one circuit.
fn flip_coins(bc: &BirbCircuit, noise: &NoiseModel) -> Result<Vec<f64>> {
    let n = bc.qubit_count();
    if noise.qubit_count() != n {
        return Err(Error::dimension(n, noise.qubit_count()));
    }
    if !noise.is_stochastic_only() {
        return Err(Error::domain(
            "the frame engine handles stochastic generators and bit-flip SPAM only; \
             use the dense engine for coherent or amplitude-damping noise",
        ));
    }
    let layers = bc.circuit().layers();
    let (core_start, core_end) = bc.core_span();

    // Tracked Pauli at every layer boundary: tracked[j] is the initial
    // stabilizer transported to just before layer j. The anchor sits at
    // the end of the preparation block, which can span several layers
    // for Clifford-group circuits.
    let mut tracked = vec![bc.initial_stabilizer().clone(); layers.len() + 1];
    for j in (0..core_start).rev() {
        let mut p = tracked[j + 1].clone();
        layers[j].inverse().conjugate_in_place(&mut p)?;
        tracked[j] = p;
    }
    for j in core_start..layers.len() {
        let mut p = tracked[j].clone();
        layers[j].conjugate_in_place(&mut p)?;
        tracked[j + 1] = p;
    }
    debug_assert_eq!(
        tracked.last(),
        Some(bc.target()),
        "propagated stabilizer must land on the target"
    );

    let mut coins = Vec::new();
    for q in 0..n {
        if let MeasurementErrorSpec::BitFlip { p_m } = noise.prep(q) {
            // An X flip on q matters iff the pre-circuit Pauli has a Z
            // component there.
            if tracked[0].z_bit(q) && p_m > 0.0 {
                coins.push(flip_prob(p_m));
            }
        }
    }
    for (i, layer) in layers.iter().enumerate() {
        let after = &tracked[i + 1];
        for (gate, qubits) in layer.gates() {
            for gen in noise.gate_error(gate, qubits).unwrap_or(&[]) {
                let ErrorGenerator::Stochastic { pauli, rate } = gen else {
                    unreachable!("checked stochastic")
                };
                if *rate > 0.0 && !embed(pauli, qubits, n)?.commutes(after)? {
                    coins.push(flip_prob(*rate));
                }
            }
        }
        if (core_start..core_end).contains(&i) {
            for gen in noise.layer_errors() {
                let ErrorGenerator::Stochastic { pauli, rate } = gen else {
                    unreachable!("checked stochastic")
                };
                if *rate > 0.0 && !pauli.commutes(after)? {
                    coins.push(flip_prob(*rate));
                }
            }
        }
    }
    for q in 0..n {
        if let MeasurementErrorSpec::BitFlip { p_m } = noise.measurement(q) {
            if bc.target().z_bit(q) && p_m > 0.0 {
                coins.push(flip_prob(p_m));
            }
        }
    }
    Ok(coins)
}

/// Exact probability that one shot's success value comes out −1.
pub fn frame_flip_probability(bc: &BirbCircuit, noise: &NoiseModel) -> Result<f64> {
    let product: f64 = flip_coins(bc, noise)?
        .iter()
        .map(|p| 1.0 - 2.0 * p)
        .product();
    Ok((1.0 - product) / 2.0)
}

/// Sample shot success values (±1) under stochastic noise.
pub fn frame_run(
    bc: &BirbCircuit,
    noise: &NoiseModel,
    shots: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<i8>> {
    let p_flip = frame_flip_probability(bc, noise)?;
    Ok((0..shots)
        .map(|_| if rng.gen::<f64>() < p_flip { -1 } else { 1 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::GateSetSpec;
    use crate::engines::dense_expectation;
    use crate::noise::{sample_random_model, NoiseFamily, NoiseModel, RandomModelOptions};
    use crate::rng::SeedStream;
    use crate::sampler::{build_birb_circuit, build_clifford_group_birb_circuit, OmegaSpec};

    fn rng_for(test: &str) -> crate::rng::Rng {
        SeedStream::new(0xF4A3E).child_named(test).rng()
    }

    #[test]
    fn ideal_noise_never_flips() {
        let mut rng = rng_for("ideal");
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(3).unwrap(), 0.4).unwrap();
        let bc = build_birb_circuit(4, &omega, &mut rng).unwrap();
        let noise = NoiseModel::ideal(3);
        assert_eq!(frame_flip_probability(&bc, &noise).unwrap(), 0.0);
        let values = frame_run(&bc, &noise, 100, &mut rng).unwrap();
        assert!(values.iter().all(|&v| v == 1));
    }

    #[test]
    fn coherent_noise_is_rejected() {
        let mut rng = rng_for("rejected");
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.4).unwrap();
        let bc = build_birb_circuit(2, &omega, &mut rng).unwrap();
        let mut noise = NoiseModel::ideal(2);
        let zz: PauliOperator = "+ZZ".parse().unwrap();
        noise
            .add_layer_error(ErrorGenerator::hamiltonian(zz, 0.05).unwrap())
            .unwrap();
        assert!(matches!(
            frame_flip_probability(&bc, &noise),
            Err(Error::Domain(_))
        ));

        let mut damped = NoiseModel::ideal(2);
        damped
            .set_measurement(0, MeasurementErrorSpec::AmplitudeDamping { p_m: 0.01 })
            .unwrap();
        assert!(frame_flip_probability(&bc, &damped).is_err());
    }

    // Readout bit flips degrade a depth-zero circuit by e^(−2 p_m) per
    // measured qubit, so the flip probability has a closed form.
    #[test]
    fn measurement_flips_have_the_closed_form()  {
        let mut rng = rng_for("closed-form");
        let p_m = 0.08;
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(1).unwrap(), 0.0).unwrap();
        let bc = build_birb_circuit(0, &omega, &mut rng).unwrap();
        let mut noise = NoiseModel::ideal(1);
        noise
            .set_measurement_all(MeasurementErrorSpec::BitFlip { p_m })
            .unwrap();
        let want = (1.0 - (-2.0 * p_m).exp()) / 2.0;
        assert!((frame_flip_probability(&bc, &noise).unwrap() - want).abs() < 1e-15);
    }

    // 1 − 2·P(flip) is the exact expected success value, so the frame and
    // dense engines must agree to rounding on their shared domain.
    #[test]
    fn frame_matches_dense_exactly_on_stochastic_models() {
        let mut rng = rng_for("frame-vs-dense");
        for n in 1..=3usize {
            let gate_set = GateSetSpec::all_to_all_default(n).unwrap();
            let xi = if n > 1 { 0.5 } else { 0.0 };
            let omega = OmegaSpec::new(gate_set.clone(), xi).unwrap();
            for trial in 0..8 {
                let p = 0.002 + 0.004 * trial as f64;
                let mut noise = sample_random_model(
                    NoiseFamily::Stochastic,
                    p,
                    &gate_set,
                    RandomModelOptions::default(),
                    &mut rng,
                )
                .unwrap();
                noise
                    .set_prep(trial % n, MeasurementErrorSpec::BitFlip { p_m: 0.01 })
                    .unwrap();
                noise
                    .set_measurement_all(MeasurementErrorSpec::BitFlip { p_m: 0.004 })
                    .unwrap();
                let bc = build_birb_circuit(trial % 5, &omega, &mut rng).unwrap();
                let dense = dense_expectation(&bc, &noise).unwrap();
                let frame = 1.0 - 2.0 * frame_flip_probability(&bc, &noise).unwrap();
                assert!(
                    (dense - frame).abs() < 1e-12,
                    "n={n} trial={trial}: dense {dense} vs frame {frame}"
                );
            }
        }
    }

    // Clifford-group circuits anchor the tracked Pauli mid-circuit (the
    // preparation block can span several layers), exercising the backward
    // transport path.
    #[test]
    fn clifford_group_circuits_are_supported() {
        let mut rng = rng_for("clifford-group");
        let n = 2;
        let mut noise = NoiseModel::global_depolarizing(n, 0.95).unwrap();
        noise
            .set_prep(0, MeasurementErrorSpec::BitFlip { p_m: 0.02 })
            .unwrap();
        for depth in [0usize, 1, 3] {
            let cgc = build_clifford_group_birb_circuit(n, depth, &mut rng).unwrap();
            let dense = dense_expectation(cgc.birb(), &noise).unwrap();
            let frame = 1.0 - 2.0 * frame_flip_probability(cgc.birb(), &noise).unwrap();
            assert!(
                (dense - frame).abs() < 1e-12,
                "depth {depth}: dense {dense} vs frame {frame}"
            );
        }
    }

    #[test]
    fn sampled_mean_tracks_the_flip_probability() {
        let mut rng = rng_for("sampled-mean");
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.5).unwrap();
        let bc = build_birb_circuit(3, &omega, &mut rng).unwrap();
        let noise = NoiseModel::global_depolarizing(2, 0.9).unwrap();
        let exact = 1.0 - 2.0 * frame_flip_probability(&bc, &noise).unwrap();
        let shots = 40_000;
        let values = frame_run(&bc, &noise, shots, &mut rng).unwrap();
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / shots as f64;
        let sigma = ((1.0 - exact * exact) / shots as f64).sqrt();
        assert!((mean - exact).abs() < 5.0 * sigma, "{mean} vs {exact}");
    }
}
