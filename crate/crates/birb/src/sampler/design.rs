//! Experiment designs: the declarative sampling plan for one run.
//!
//! A design fixes the register width, the depths, the number of circuits
//! per depth, the layer distribution, the master seed, and the protocol
//! variant. Every circuit is reproducible from (seed, depth, index)
//! alone, so two runs of the same design sample identical circuits even
//! across engines and worker counts.

use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitRecord, Circuit, GateSetSpec};
use crate::error::{Error, Result};
use crate::pauli::{CliffordGate, PauliOperator};
use crate::rng::{Rng, SeedStream};
use crate::sampler::{build_birb_circuit, build_clifford_group_birb_circuit, BirbCircuit, OmegaSpec};

/// Which circuit family the design samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitVariant {
    /// Ω-distributed layers between preparation and measurement.
    #[default]
    Birb,
    /// Uniform multi-qubit Cliffords, compiled to layers.
    CliffordGroupBirb,
}

/// The sampling plan for one benchmarking experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentDesign {
    n: usize,
    depths: Vec<usize>,
    circuits_per_depth: usize,
    omega: OmegaSpec,
    seed: u64,
    variant: CircuitVariant,
}

impl ExperimentDesign {
    /// A layer-sampled design. The width is stated explicitly so configs
    /// stay self-describing; it must match the gate set.
    pub fn birb(
        n: usize,
        depths: Vec<usize>,
        circuits_per_depth: usize,
        omega: OmegaSpec,
        seed: u64,
    ) -> Self {
        assert_eq!(n, omega.qubit_count(), "design width must match the gate set");
        ExperimentDesign {
            n,
            depths,
            circuits_per_depth,
            omega,
            seed,
            variant: CircuitVariant::Birb,
        }
    }

    /// A Clifford-group design: depth counts uniform Cliffords, and the
    /// gate set is used only for its width.
    pub fn clifford_group(
        n: usize,
        depths: Vec<usize>,
        circuits_per_depth: usize,
        omega: OmegaSpec,
        seed: u64,
    ) -> Self {
        let mut design = Self::birb(n, depths, circuits_per_depth, omega, seed);
        design.variant = CircuitVariant::CliffordGroupBirb;
        design
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn depths(&self) -> &[usize] {
        &self.depths
    }

    pub fn circuits_per_depth(&self) -> usize {
        self.circuits_per_depth
    }

    pub fn omega(&self) -> &OmegaSpec {
        &self.omega
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn variant(&self) -> CircuitVariant {
        self.variant
    }

    /// Stable circuit identifier inside dataset and batch files.
    pub fn circuit_id(depth: usize, index: usize) -> String {
        format!("d{depth:04}-c{index:04}")
    }

    /// The RNG that samples circuit (depth, index). Keyed by ids only, so
    /// sampling order and worker count cannot change the circuit.
    pub fn circuit_rng(&self, depth: usize, index: usize) -> Rng {
        SeedStream::new(self.seed)
            .child_named("circuit")
            .child(depth as u64)
            .child(index as u64)
            .rng()
    }

    /// The RNG for one shot block of circuit (depth, index).
    pub fn shot_rng(&self, depth: usize, index: usize, block: usize) -> Rng {
        SeedStream::new(self.seed)
            .child_named("shots")
            .child(depth as u64)
            .child(index as u64)
            .child(block as u64)
            .rng()
    }

    /// Sample circuit (depth, index) of the design.
    pub fn sample_circuit(&self, depth: usize, index: usize) -> Result<BirbCircuit> {
        let mut rng = self.circuit_rng(depth, index);
        match self.variant {
            CircuitVariant::Birb => build_birb_circuit(depth, &self.omega, &mut rng),
            CircuitVariant::CliffordGroupBirb => {
                Ok(build_clifford_group_birb_circuit(self.n, depth, &mut rng)?
                    .birb()
                    .clone())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct OmegaDto {
    xi: f64,
    gate_set: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    connectivity: Option<Vec<(usize, usize)>>,
}

#[derive(Serialize, Deserialize)]
struct DesignDto {
    n: usize,
    depths: Vec<usize>,
    #[serde(rename = "K")]
    circuits_per_depth: usize,
    omega: OmegaDto,
    seed: u64,
    #[serde(default)]
    variant: CircuitVariant,
}

impl Serialize for ExperimentDesign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let gate_set = self.omega.gate_set();
        let mut names: Vec<String> = gate_set
            .single_qubit_gates()
            .iter()
            .map(|&g| CliffordGate::Single(g).name())
            .collect();
        if self.n > 1 {
            names.push(gate_set.two_qubit_gate().name());
        }
        DesignDto {
            n: self.n,
            depths: self.depths.clone(),
            circuits_per_depth: self.circuits_per_depth,
            omega: OmegaDto {
                xi: self.omega.xi(),
                gate_set: names,
                connectivity: Some(gate_set.connectivity().to_vec()),
            },
            seed: self.seed,
            variant: self.variant,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExperimentDesign {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let dto = DesignDto::deserialize(deserializer)?;
        let build = || -> Result<ExperimentDesign> {
            let mut singles = vec![];
            let mut two_qubit = None;
            for name in &dto.omega.gate_set {
                match CliffordGate::from_name(name) {
                    Some(CliffordGate::Single(g)) => singles.push(g),
                    Some(gate @ CliffordGate::Cnot) => two_qubit = Some(gate),
                    None => return Err(Error::config(format!("unknown gate name {name:?}"))),
                }
            }
            let connectivity = match dto.omega.connectivity {
                Some(edges) => edges,
                // Omitted connectivity means all-to-all.
                None => (0..dto.n)
                    .flat_map(|a| (a + 1..dto.n).map(move |b| (a, b)))
                    .collect(),
            };
            let gate_set = GateSetSpec::new(
                dto.n,
                singles,
                two_qubit.unwrap_or(CliffordGate::Cnot),
                connectivity,
            )?;
            let omega = OmegaSpec::new(gate_set, dto.omega.xi)?;
            let mut design = ExperimentDesign::birb(
                dto.n,
                dto.depths,
                dto.circuits_per_depth,
                omega,
                dto.seed,
            );
            design.variant = dto.variant;
            Ok(design)
        };
        build().map_err(serde::de::Error::custom)
    }
}

/// Serialize a sampled circuit as a batch record. The metadata keeps the
/// pieces a simulator needs beyond the gate list: the core span and the
/// prepared stabilizer.
pub fn circuit_to_record(bc: &BirbCircuit, id: String) -> CircuitRecord {
    CircuitRecord {
        id,
        depth: bc.benchmark_depth(),
        circuit_text: bc.circuit().to_text(),
        target_pauli: bc.target().to_string(),
        metadata: serde_json::json!({
            "core_span": [bc.core_span().0, bc.core_span().1],
            "initial_stabilizer": bc.initial_stabilizer().to_string(),
        }),
    }
}

/// Rebuild a benchmark circuit from a batch record, checking that the
/// stabilizer actually propagates to the recorded target.
pub fn circuit_from_record(record: &CircuitRecord) -> Result<BirbCircuit> {
    let circuit = Circuit::from_text(&record.circuit_text)?;
    let target: PauliOperator = record.target_pauli.parse()?;
    let meta = &record.metadata;
    let span = meta
        .get("core_span")
        .and_then(|v| v.as_array())
        .filter(|v| v.len() == 2)
        .and_then(|v| Some((v[0].as_u64()? as usize, v[1].as_u64()? as usize)))
        .ok_or_else(|| Error::config(format!("record {}: missing core_span metadata", record.id)))?;
    let stabilizer: PauliOperator = meta
        .get("initial_stabilizer")
        .and_then(|v| v.as_str())
        .ok_or_else(|| {
            Error::config(format!(
                "record {}: missing initial_stabilizer metadata",
                record.id
            ))
        })?
        .parse()?;
    if span.0 > span.1 || span.1 > circuit.depth() {
        return Err(Error::config(format!(
            "record {}: core span {:?} outside circuit of {} layers",
            record.id,
            span,
            circuit.depth()
        )));
    }
    let mut tracked = stabilizer.clone();
    for layer in &circuit.layers()[span.0..] {
        layer.conjugate_in_place(&mut tracked)?;
    }
    if tracked != target {
        return Err(Error::config(format!(
            "record {}: stabilizer propagates to {tracked}, but the target is {target}",
            record.id
        )));
    }
    Ok(BirbCircuit::from_parts(
        circuit,
        record.depth,
        span,
        target,
        stabilizer,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_design() -> ExperimentDesign {
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.5).unwrap();
        ExperimentDesign::birb(2, vec![0, 1, 4], 3, omega, 99)
    }

    #[test]
    fn sampling_is_keyed_by_ids_only() {
        let design = small_design();
        let a = design.sample_circuit(4, 1).unwrap();
        let b = design.sample_circuit(4, 1).unwrap();
        assert_eq!(a, b);
        let c = design.sample_circuit(4, 2).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.benchmark_depth(), 4);
        assert_eq!(ExperimentDesign::circuit_id(4, 2), "d0004-c0002");
    }

    #[test]
    fn clifford_group_variant_samples_compiled_circuits() {
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.5).unwrap();
        let design = ExperimentDesign::clifford_group(2, vec![0, 2], 2, omega, 7);
        let bc = design.sample_circuit(2, 0).unwrap();
        assert_eq!(bc.benchmark_depth(), 2);
        // Same key, same circuit, independent of variant plumbing.
        assert_eq!(bc, design.sample_circuit(2, 0).unwrap());
    }

    #[test]
    fn json_round_trip_preserves_the_design() {
        let design = small_design();
        let text = serde_json::to_string_pretty(&design).unwrap();
        assert!(text.contains("\"K\": 3"), "{text}");
        let back: ExperimentDesign = serde_json::from_str(&text).unwrap();
        assert_eq!(back, design);
        // The round-tripped design samples identical circuits.
        assert_eq!(
            back.sample_circuit(1, 0).unwrap(),
            design.sample_circuit(1, 0).unwrap()
        );
    }

    #[test]
    fn missing_connectivity_means_all_to_all() {
        let text = r#"{
            "n": 3,
            "depths": [0, 2],
            "K": 2,
            "omega": {"xi": 0.4, "gate_set": ["I", "SX", "SY", "CNOT"]},
            "seed": 5
        }"#;
        let design: ExperimentDesign = serde_json::from_str(text).unwrap();
        assert_eq!(design.variant(), CircuitVariant::Birb);
        assert_eq!(design.omega().gate_set().connectivity().len(), 3);
        assert!(serde_json::from_str::<ExperimentDesign>(
            r#"{"n": 1, "depths": [], "K": 1, "omega": {"xi": 0.5, "gate_set": ["NOPE"]}, "seed": 0}"#
        )
        .is_err());
    }

    #[test]
    fn records_round_trip_through_text() {
        let design = small_design();
        for &(depth, index) in &[(0usize, 0usize), (4, 2)] {
            let bc = design.sample_circuit(depth, index).unwrap();
            let record = circuit_to_record(&bc, ExperimentDesign::circuit_id(depth, index));
            let back = circuit_from_record(&record).unwrap();
            assert_eq!(back, bc);
        }
    }

    #[test]
    fn tampered_records_are_rejected() {
        let design = small_design();
        let bc = design.sample_circuit(1, 0).unwrap();
        let mut record = circuit_to_record(&bc, "x".into());
        record.target_pauli = if record.target_pauli.starts_with('+') {
            record.target_pauli.replacen('+', "-", 1)
        } else {
            record.target_pauli.replacen('-', "+", 1)
        };
        assert!(circuit_from_record(&record).is_err());

        let mut no_meta = circuit_to_record(&bc, "y".into());
        no_meta.metadata = serde_json::Value::Null;
        assert!(circuit_from_record(&no_meta).is_err());
    }
}
