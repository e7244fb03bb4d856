use crate::circuits::GateSetSpec;
use crate::error::{Error, Result};
use crate::noise::generators::ErrorGenerator;
use crate::noise::model::NoiseModel;
use crate::pauli::{CliffordGate, PauliOperator};

/// Which elementary-generator kinds a random model draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseFamily {
    /// h = 0, s = 1.2·p.
    Stochastic,
    /// s = 0, h = √(6p) for n ≤ 2, √(8p) for wider registers.
    Hamiltonian,
    /// s uniform in [0, p] and h set from the remainder (see
    /// [`RandomModelOptions::literal_h`]).
    Both,
}

/// Knobs for [`sample_random_model`].
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomModelOptions {
    /// The mixed family's Hamiltonian scale is h = √(2(p − s)) by default.
    /// Setting this uses the literal reading h = √(2p − s) instead; both
    /// keep h real because s ≤ p ≤ 2p.
    pub literal_h: bool,
}

fn family_scales(
    family: NoiseFamily,
    n: usize,
    p: f64,
    options: RandomModelOptions,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    match family {
        NoiseFamily::Stochastic => (1.2 * p, 0.0),
        NoiseFamily::Hamiltonian => {
            let h = if n <= 2 { (6.0 * p).sqrt() } else { (8.0 * p).sqrt() };
            (0.0, h)
        }
        NoiseFamily::Both => {
            let s = rng.gen_range(0.0..=p.max(f64::MIN_POSITIVE)).min(p);
            let h = if options.literal_h {
                (2.0 * p - s).sqrt()
            } else {
                (2.0 * (p - s)).sqrt()
            };
            (s, h)
        }
    }
}

/// Uniform point on the (len−1)-simplex (symmetric Dirichlet weights).
fn simplex_weights(len: usize, rng: &mut impl rand::Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            // Exponential(1) via inverse CDF; gen() is in [0, 1).
            -(1.0 - rng.gen::<f64>()).ln()
        })
        .collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    w
}

fn non_identity_paulis(k: usize) -> Vec<PauliOperator> {
    (1..4usize.pow(k as u32))
        .map(|idx| PauliOperator::from_basis_index(k, idx))
        .collect()
}

/// Generators for one gate instance: a stochastic budget uniform in
/// [0, χ·s] and a Hamiltonian budget uniform in [0, χ·h], each split
/// across the 4^k − 1 basis Paulis by a uniform simplex draw.
fn instance_generators(
    k: usize,
    chi: f64,
    s: f64,
    h: f64,
    rng: &mut impl rand::Rng,
) -> Result<Vec<ErrorGenerator>> {
    let paulis = non_identity_paulis(k);
    let mut gens = Vec::new();
    if s > 0.0 {
        let total = rng.gen_range(0.0..=chi * s);
        let weights = simplex_weights(paulis.len(), rng);
        for (pauli, w) in paulis.iter().zip(&weights) {
            gens.push(ErrorGenerator::stochastic(pauli.clone(), total * w)?);
        }
    }
    if h > 0.0 {
        let total = rng.gen_range(0.0..=chi * h);
        let weights = simplex_weights(paulis.len(), rng);
        for (pauli, w) in paulis.iter().zip(&weights) {
            gens.push(ErrorGenerator::hamiltonian(pauli.clone(), total * w)?);
        }
    }
    Ok(gens)
}

/// Draw a random noise model for every instance of the gate set, scaled by
/// the overall error parameter p.
///
/// Each single-qubit gate on each qubit and each two-qubit gate on each
/// connectivity edge (both orientations) gets independent budgets, with
/// χ = 0.1 shrinking single-qubit budgets on multi-qubit registers so
/// their expected error is a tenth of the two-qubit gates'. Identity gates
/// carry no error: layers never store them.
pub fn sample_random_model(
    family: NoiseFamily,
    p: f64,
    gate_set: &GateSetSpec,
    options: RandomModelOptions,
    rng: &mut impl rand::Rng,
) -> Result<NoiseModel> {
    if p < 0.0 || !p.is_finite() {
        return Err(Error::domain(format!(
            "error parameter must be finite and non-negative, got {p}"
        )));
    }
    let n = gate_set.qubit_count();
    let (s, h) = family_scales(family, n, p, options, rng);
    let mut model = NoiseModel::ideal(n);
    model.set_provenance(format!("random family {family:?}, p = {p}"));
    if p == 0.0 {
        return Ok(model);
    }

    let chi_single = if n >= 2 { 0.1 } else { 1.0 };
    for &gate in gate_set.single_qubit_gates() {
        if CliffordGate::Single(gate).is_identity() {
            continue;
        }
        let name = CliffordGate::Single(gate).name();
        for q in 0..n {
            let gens = instance_generators(1, chi_single, s, h, rng)?;
            model.set_gate_error(&name, vec![q], gens)?;
        }
    }
    let two = gate_set.two_qubit_gate().name();
    for &(a, b) in gate_set.connectivity() {
        for qubits in [vec![a, b], vec![b, a]] {
            let gens = instance_generators(2, 1.0, s, h, rng)?;
            model.set_gate_error(&two, qubits, gens)?;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use rand::SeedableRng as _;

    #[test]
    fn zero_p_gives_ideal_model() {
        let gs = GateSetSpec::all_to_all_default(2).unwrap();
        let mut rng = Rng::seed_from_u64(7);
        let model =
            sample_random_model(NoiseFamily::Both, 0.0, &gs, RandomModelOptions::default(), &mut rng)
                .unwrap();
        assert!(model.is_ideal());
    }

    #[test]
    fn stochastic_family_has_no_hamiltonian_rates() {
        let gs = GateSetSpec::all_to_all_default(2).unwrap();
        let mut rng = Rng::seed_from_u64(8);
        let model = sample_random_model(
            NoiseFamily::Stochastic,
            0.05,
            &gs,
            RandomModelOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(model.is_stochastic_only());
        assert!(!model.is_ideal());
        // Instances: 2 singles × 2 qubits + 2 CNOT orientations.
        assert_eq!(model.gate_error_entries().count(), 6);
        for ((_, qubits), gens) in model.gate_error_entries() {
            let k = qubits.len();
            assert_eq!(gens.len(), 4usize.pow(k as u32) - 1);
            let total: f64 = gens.iter().map(ErrorGenerator::rate).sum();
            let cap = if k == 1 { 0.1 } else { 1.0 } * 1.2 * 0.05;
            assert!(total <= cap + 1e-12, "budget {total} over cap {cap}");
        }
    }

    #[test]
    fn hamiltonian_family_has_no_stochastic_rates() {
        let gs = GateSetSpec::all_to_all_default(2).unwrap();
        let mut rng = Rng::seed_from_u64(9);
        let model = sample_random_model(
            NoiseFamily::Hamiltonian,
            0.05,
            &gs,
            RandomModelOptions::default(),
            &mut rng,
        )
        .unwrap();
        for (_, gens) in model.gate_error_entries() {
            assert!(gens
                .iter()
                .all(|g| matches!(g, ErrorGenerator::Hamiltonian { .. })));
            assert!(gens.iter().all(|g| g.rate() >= 0.0));
        }
    }

    #[test]
    fn mixed_family_budgets_stay_in_range() {
        let gs = GateSetSpec::all_to_all_default(2).unwrap();
        let p = 0.05;
        for literal in [false, true] {
            let mut rng = Rng::seed_from_u64(10);
            let model = sample_random_model(
                NoiseFamily::Both,
                p,
                &gs,
                RandomModelOptions { literal_h: literal },
                &mut rng,
            )
            .unwrap();
            let h_cap = (2.0 * p).sqrt();
            for (_, gens) in model.gate_error_entries() {
                let s_total: f64 = gens.iter().filter(|g| g.is_stochastic()).map(|g| g.rate()).sum();
                let h_total: f64 = gens
                    .iter()
                    .filter(|g| matches!(g, ErrorGenerator::Hamiltonian { .. }))
                    .map(|g| g.rate())
                    .sum();
                assert!(s_total <= p + 1e-12);
                assert!(h_total <= h_cap + 1e-12);
            }
        }
    }
}
