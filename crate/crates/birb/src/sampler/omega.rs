use rand::seq::SliceRandom as _;

use crate::circuits::{GateLayer, GateSetSpec};
use crate::error::{Error, Result};
use crate::pauli::CliffordGate;

/// A layer distribution Ω: a gate set plus the expected two-qubit gate
/// density ξ (mean fraction of qubits touched by two-qubit gates is ξ).
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSpec {
    gate_set: GateSetSpec,
    xi: f64,
}

impl OmegaSpec {
    pub fn new(gate_set: GateSetSpec, xi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::config(format!("ξ = {xi} outside [0, 1]")));
        }
        if xi > 0.0 && gate_set.connectivity().is_empty() {
            return Err(Error::config(
                "ξ > 0 needs at least one connectivity edge; set ξ = 0 for isolated qubits",
            ));
        }
        Ok(OmegaSpec { gate_set, xi })
    }

    pub fn gate_set(&self) -> &GateSetSpec {
        &self.gate_set
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn qubit_count(&self) -> usize {
        self.gate_set.qubit_count()
    }

    /// Soft sanity warnings: configurations where the requested ξ cannot be
    /// reached, so the retention probability silently caps at 1.
    pub fn warnings(&self) -> Vec<String> {
        let n = self.qubit_count();
        let want_pairs = n as f64 * self.xi / 2.0;
        let mut out = vec![];
        if want_pairs > (n / 2) as f64 {
            out.push(format!(
                "ξ = {} asks for {want_pairs} two-qubit gates per layer but at most {} fit",
                self.xi,
                n / 2
            ));
        }
        if want_pairs > self.gate_set.connectivity().len() as f64 {
            out.push(format!(
                "ξ = {} asks for {want_pairs} two-qubit gates per layer but connectivity has only {} edges",
                self.xi,
                self.gate_set.connectivity().len()
            ));
        }
        out
    }

    pub fn sample_layer(&self, rng: &mut impl rand::Rng) -> GateLayer {
        sample_omega_layer(self, rng)
    }
}

/// Draw one random layer by edgegrab: build a random greedy maximal
/// matching, retain each matched edge with probability min(1, nξ/2|M|)
/// with uniform orientation, and give every other qubit a uniform
/// single-qubit gate.
pub fn sample_omega_layer(spec: &OmegaSpec, rng: &mut impl rand::Rng) -> GateLayer {
    let gs = spec.gate_set();
    let n = gs.qubit_count();
    let mut edges = gs.connectivity().to_vec();
    edges.shuffle(rng);

    let mut covered = vec![false; n];
    let mut matching = vec![];
    for (a, b) in edges {
        if !covered[a] && !covered[b] {
            covered[a] = true;
            covered[b] = true;
            matching.push((a, b));
        }
    }

    let mut gates: Vec<(CliffordGate, Vec<usize>)> = vec![];
    let mut in_two_qubit = vec![false; n];
    if !matching.is_empty() {
        let retain = (n as f64 * spec.xi() / (2.0 * matching.len() as f64)).min(1.0);
        for (a, b) in matching {
            if rng.gen_bool(retain) {
                let (c, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                in_two_qubit[c] = true;
                in_two_qubit[t] = true;
                gates.push((gs.two_qubit_gate(), vec![c, t]));
            }
        }
    }
    let singles = gs.single_qubit_gates();
    for (q, busy) in in_two_qubit.iter().enumerate() {
        if !busy {
            let g = singles[rng.gen_range(0..singles.len())];
            gates.push((CliffordGate::Single(g), vec![q]));
        }
    }
    GateLayer::new(n, gates).expect("edgegrab assigns disjoint supports")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{CliffordGate, SingleClifford};
    use crate::rng::Rng;
    use rand::SeedableRng as _;

    #[test]
    fn xi_validation() {
        let gs = GateSetSpec::all_to_all_default(2).unwrap();
        assert!(OmegaSpec::new(gs.clone(), -0.1).is_err());
        assert!(OmegaSpec::new(gs.clone(), 1.5).is_err());
        assert!(OmegaSpec::new(gs, 0.5).is_ok());
        let isolated = GateSetSpec::all_to_all_default(1).unwrap();
        assert!(OmegaSpec::new(isolated.clone(), 0.5).is_err());
        assert!(OmegaSpec::new(isolated, 0.0).is_ok());
    }

    #[test]
    fn mean_two_qubit_density_matches_xi() {
        // The retention probability is calibrated so the expected fraction
        // of qubits inside a two-qubit gate equals ξ whenever matchings are
        // large enough to avoid the min(1, ·) cap. Checked on all-to-all
        // and line connectivity.
        let xi = 0.25;
        let mut rng = Rng::seed_from_u64(42);
        for n in [4usize, 8, 16] {
            for line in [false, true] {
                let gs = if line {
                    let edges = (0..n - 1).map(|q| (q, q + 1)).collect();
                    GateSetSpec::new(
                        n,
                        vec![SingleClifford::I, SingleClifford::sx(), SingleClifford::sy()],
                        CliffordGate::Cnot,
                        edges,
                    )
                    .unwrap()
                } else {
                    GateSetSpec::all_to_all_default(n).unwrap()
                };
                let spec = OmegaSpec::new(gs, xi).unwrap();
                let trials = 8_000usize;
                let total: usize = (0..trials)
                    .map(|_| {
                        sample_omega_layer(&spec, &mut rng)
                            .gates()
                            .iter()
                            .filter(|(g, _)| g.arity() == 2)
                            .count()
                    })
                    .sum();
                let mean = 2.0 * total as f64 / (trials * n) as f64;
                // Per-qubit indicator variance ≤ ξ(1−ξ); 3σ of the mean.
                let sigma = (xi * (1.0 - xi) / (trials * n / 2) as f64).sqrt();
                assert!(
                    (mean - xi).abs() < 3.0 * sigma + 1e-9,
                    "density {mean} vs ξ = {xi} (n = {n}, line = {line})"
                );
            }
        }
    }

    #[test]
    fn layers_cover_every_qubit_or_idle_only_on_identity() {
        let gs = GateSetSpec::all_to_all_default(5).unwrap();
        let spec = OmegaSpec::new(gs, 0.8).unwrap();
        let mut rng = Rng::seed_from_u64(3);
        for _ in 0..200 {
            let layer = sample_omega_layer(&spec, &mut rng);
            // Every qubit not covered by a stored gate drew the identity.
            for (gate, _) in layer.gates() {
                assert!(!gate.is_identity());
            }
            assert!(layer.covered_qubits().len() <= 5);
        }
    }

    #[test]
    fn warnings_flag_unreachable_density() {
        let gs = GateSetSpec::new(
            3,
            vec![crate::pauli::SingleClifford::sx()],
            CliffordGate::Cnot,
            vec![(0, 1)],
        )
        .unwrap();
        let spec = OmegaSpec::new(gs, 1.0).unwrap();
        assert!(!spec.warnings().is_empty());
    }
}
