use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::generators::{channel_from_generators, ErrorGenerator};
use crate::pauli::{CliffordGate, PauliKind, PauliOperator};

/// Pre-measurement (or post-preparation) error channel on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum MeasurementErrorSpec {
    #[default]
    None,
    /// e^(p_m · S_X): flips the readout with probability (1 − e^(−2p_m))/2.
    BitFlip { p_m: f64 },
    /// e^(p_m · (S_X + S_Y − A_{X,Y})): decay toward |0⟩.
    AmplitudeDamping { p_m: f64 },
}

impl MeasurementErrorSpec {
    pub fn validate(&self) -> Result<()> {
        let p_m = match self {
            MeasurementErrorSpec::None => return Ok(()),
            MeasurementErrorSpec::BitFlip { p_m }
            | MeasurementErrorSpec::AmplitudeDamping { p_m } => *p_m,
        };
        if p_m < 0.0 || !p_m.is_finite() {
            return Err(Error::domain(format!(
                "measurement error strength must be finite and non-negative, got {p_m}"
            )));
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        matches!(self, MeasurementErrorSpec::None)
            || matches!(
                self,
                MeasurementErrorSpec::BitFlip { p_m } | MeasurementErrorSpec::AmplitudeDamping { p_m }
                if *p_m == 0.0
            )
    }

    /// The generators whose exponential realizes this channel.
    pub fn generators(&self) -> Vec<ErrorGenerator> {
        let x = PauliOperator::single(1, 0, PauliKind::X).expect("one qubit");
        let y = PauliOperator::single(1, 0, PauliKind::Y).expect("one qubit");
        match *self {
            MeasurementErrorSpec::None => vec![],
            MeasurementErrorSpec::BitFlip { p_m } => {
                vec![ErrorGenerator::stochastic(x, p_m).expect("validated")]
            }
            MeasurementErrorSpec::AmplitudeDamping { p_m } => vec![
                ErrorGenerator::stochastic(x.clone(), p_m).expect("validated"),
                ErrorGenerator::stochastic(y.clone(), p_m).expect("validated"),
                ErrorGenerator::active(x, y, -p_m).expect("validated"),
            ],
        }
    }
}

/// Single-qubit Pauli-transfer matrix of a measurement-error spec.
pub fn measurement_channel(spec: &MeasurementErrorSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    channel_from_generators(&spec.generators(), 1)
}

/// A Markovian noise model: per-gate-instance post-gate error generators,
/// an optional per-core-layer error on the full register, and per-qubit
/// preparation and measurement channels.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    n: usize,
    gate_errors: BTreeMap<(String, Vec<usize>), Vec<ErrorGenerator>>,
    layer_errors: Vec<ErrorGenerator>,
    prep: Vec<MeasurementErrorSpec>,
    measurement: Vec<MeasurementErrorSpec>,
    provenance: Option<String>,
}

impl NoiseModel {
    /// The ideal (error-free) model on n qubits.
    pub fn ideal(n: usize) -> Self {
        NoiseModel {
            n,
            gate_errors: BTreeMap::new(),
            layer_errors: vec![],
            prep: vec![MeasurementErrorSpec::None; n],
            measurement: vec![MeasurementErrorSpec::None; n],
            provenance: None,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Attach post-gate generators to one gate instance. Generator Paulis
    /// are local to the instance: width must equal the gate arity, with
    /// generator qubit i meaning `qubits[i]`. Register wider-than-gate
    /// (crosstalk) effects through `add_layer_error` instead.
    pub fn set_gate_error(
        &mut self,
        gate: &str,
        qubits: Vec<usize>,
        generators: Vec<ErrorGenerator>,
    ) -> Result<&mut Self> {
        let gate = CliffordGate::from_name(gate)
            .ok_or_else(|| Error::config(format!("unknown gate name {gate:?}")))?;
        if qubits.len() != gate.arity() {
            return Err(Error::dimension(gate.arity(), qubits.len()));
        }
        for &q in &qubits {
            if q >= self.n {
                return Err(Error::invalid_index(q, self.n));
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::config("gate instance repeats a qubit"));
        }
        for g in &generators {
            if g.qubit_count() != qubits.len() {
                return Err(Error::dimension(qubits.len(), g.qubit_count()));
            }
        }
        self.gate_errors.insert((gate.name(), qubits), generators);
        Ok(self)
    }

    /// Generators attached to a gate instance, if any.
    pub fn gate_error(&self, gate: &CliffordGate, qubits: &[usize]) -> Option<&[ErrorGenerator]> {
        self.gate_errors
            .get(&(gate.name(), qubits.to_vec()))
            .map(|v| v.as_slice())
    }

    pub fn gate_error_entries(
        &self,
    ) -> impl Iterator<Item = (&(String, Vec<usize>), &Vec<ErrorGenerator>)> {
        self.gate_errors.iter()
    }

    /// Add a full-register generator applied after every core layer
    /// (crosstalk and global noise live here).
    pub fn add_layer_error(&mut self, gen: ErrorGenerator) -> Result<&mut Self> {
        if gen.qubit_count() != self.n {
            return Err(Error::dimension(self.n, gen.qubit_count()));
        }
        self.layer_errors.push(gen);
        Ok(self)
    }

    pub fn layer_errors(&self) -> &[ErrorGenerator] {
        &self.layer_errors
    }

    pub fn set_measurement(&mut self, qubit: usize, spec: MeasurementErrorSpec) -> Result<&mut Self> {
        spec.validate()?;
        if qubit >= self.n {
            return Err(Error::invalid_index(qubit, self.n));
        }
        self.measurement[qubit] = spec;
        Ok(self)
    }

    pub fn set_measurement_all(&mut self, spec: MeasurementErrorSpec) -> Result<&mut Self> {
        for q in 0..self.n {
            self.set_measurement(q, spec)?;
        }
        Ok(self)
    }

    pub fn measurement(&self, qubit: usize) -> MeasurementErrorSpec {
        self.measurement[qubit]
    }

    pub fn set_prep(&mut self, qubit: usize, spec: MeasurementErrorSpec) -> Result<&mut Self> {
        spec.validate()?;
        if qubit >= self.n {
            return Err(Error::invalid_index(qubit, self.n));
        }
        self.prep[qubit] = spec;
        Ok(self)
    }

    pub fn prep(&self, qubit: usize) -> MeasurementErrorSpec {
        self.prep[qubit]
    }

    pub fn set_provenance(&mut self, text: impl Into<String>) -> &mut Self {
        self.provenance = Some(text.into());
        self
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// True when every generator in the model is stochastic and every
    /// SPAM channel is a bit flip (the Pauli-frame engine's domain).
    pub fn is_stochastic_only(&self) -> bool {
        let spam_ok = |spec: &MeasurementErrorSpec| {
            matches!(spec, MeasurementErrorSpec::None | MeasurementErrorSpec::BitFlip { .. })
        };
        self.gate_errors
            .values()
            .flatten()
            .chain(self.layer_errors.iter())
            .all(ErrorGenerator::is_stochastic)
            && self.prep.iter().all(spam_ok)
            && self.measurement.iter().all(spam_ok)
    }

    pub fn is_ideal(&self) -> bool {
        self.gate_errors.values().flatten().all(|g| g.rate() == 0.0)
            && self.layer_errors.iter().all(|g| g.rate() == 0.0)
            && self.prep.iter().all(MeasurementErrorSpec::is_none)
            && self.measurement.iter().all(MeasurementErrorSpec::is_none)
    }

    /// Global depolarizing layer noise with polarization γ per core layer:
    /// a uniform stochastic rate −ln(γ)/4^n on every non-identity Pauli,
    /// which sets every Pauli fidelity to exactly γ.
    pub fn global_depolarizing(n: usize, gamma: f64) -> Result<NoiseModel> {
        if !(0.0 < gamma && gamma <= 1.0) {
            return Err(Error::domain(format!(
                "polarization must be in (0, 1], got {gamma}"
            )));
        }
        if n > 8 {
            return Err(Error::capability(
                "global depolarizing enumerates 4^n generators; n ≤ 8 required",
            ));
        }
        let rate = -gamma.ln() / 4f64.powi(n as i32);
        let mut model = NoiseModel::ideal(n);
        for idx in 1..4usize.pow(n as u32) {
            let p = PauliOperator::from_basis_index(n, idx);
            model.add_layer_error(ErrorGenerator::stochastic(p, rate)?)?;
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorDto {
    kind: String,
    paulis: Vec<String>,
    rate: f64,
}

impl From<&ErrorGenerator> for GeneratorDto {
    fn from(gen: &ErrorGenerator) -> Self {
        match gen {
            ErrorGenerator::Stochastic { pauli, rate } => GeneratorDto {
                kind: "stochastic".into(),
                paulis: vec![pauli.to_string()],
                rate: *rate,
            },
            ErrorGenerator::Hamiltonian { pauli, rate } => GeneratorDto {
                kind: "hamiltonian".into(),
                paulis: vec![pauli.to_string()],
                rate: *rate,
            },
            ErrorGenerator::Active { p, q, rate } => GeneratorDto {
                kind: "active".into(),
                paulis: vec![p.to_string(), q.to_string()],
                rate: *rate,
            },
        }
    }
}

impl TryFrom<GeneratorDto> for ErrorGenerator {
    type Error = Error;

    fn try_from(dto: GeneratorDto) -> Result<Self> {
        let pauli = |i: usize| -> Result<PauliOperator> {
            dto.paulis
                .get(i)
                .ok_or_else(|| Error::config(format!("{} generator needs {} Paulis", dto.kind, i + 1)))?
                .parse()
        };
        match dto.kind.as_str() {
            "stochastic" => ErrorGenerator::stochastic(pauli(0)?, dto.rate),
            "hamiltonian" => ErrorGenerator::hamiltonian(pauli(0)?, dto.rate),
            "active" => ErrorGenerator::active(pauli(0)?, pauli(1)?, dto.rate),
            other => Err(Error::config(format!("unknown generator kind {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MeasurementDto {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_m: Option<f64>,
}

impl From<&MeasurementErrorSpec> for MeasurementDto {
    fn from(spec: &MeasurementErrorSpec) -> Self {
        match *spec {
            MeasurementErrorSpec::None => MeasurementDto { kind: "none".into(), p_m: None },
            MeasurementErrorSpec::BitFlip { p_m } => {
                MeasurementDto { kind: "bitflip".into(), p_m: Some(p_m) }
            }
            MeasurementErrorSpec::AmplitudeDamping { p_m } => {
                MeasurementDto { kind: "amplitude_damping".into(), p_m: Some(p_m) }
            }
        }
    }
}

impl TryFrom<MeasurementDto> for MeasurementErrorSpec {
    type Error = Error;

    fn try_from(dto: MeasurementDto) -> Result<Self> {
        let p_m = || dto.p_m.ok_or_else(|| Error::config("missing p_m"));
        let spec = match dto.kind.as_str() {
            "none" => MeasurementErrorSpec::None,
            "bitflip" => MeasurementErrorSpec::BitFlip { p_m: p_m()? },
            "amplitude_damping" => MeasurementErrorSpec::AmplitudeDamping { p_m: p_m()? },
            other => return Err(Error::config(format!("unknown channel kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
struct GateErrorDto {
    gate: String,
    qubits: Vec<usize>,
    generators: Vec<GeneratorDto>,
}

#[derive(Serialize, Deserialize)]
struct NoiseModelDto {
    n: usize,
    #[serde(default)]
    gates: Vec<GateErrorDto>,
    #[serde(default)]
    layer_errors: Vec<GeneratorDto>,
    #[serde(default)]
    prep: Vec<MeasurementDto>,
    #[serde(default)]
    measurement: Vec<MeasurementDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

impl Serialize for NoiseModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = NoiseModelDto {
            n: self.n,
            gates: self
                .gate_errors
                .iter()
                .map(|((gate, qubits), gens)| GateErrorDto {
                    gate: gate.clone(),
                    qubits: qubits.clone(),
                    generators: gens.iter().map(GeneratorDto::from).collect(),
                })
                .collect(),
            layer_errors: self.layer_errors.iter().map(GeneratorDto::from).collect(),
            prep: self.prep.iter().map(MeasurementDto::from).collect(),
            measurement: self.measurement.iter().map(MeasurementDto::from).collect(),
            provenance: self.provenance.clone(),
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NoiseModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = NoiseModelDto::deserialize(deserializer)?;
        let build = || -> Result<NoiseModel> {
            let mut model = NoiseModel::ideal(dto.n);
            for entry in dto.gates {
                let gens: Vec<ErrorGenerator> = entry
                    .generators
                    .into_iter()
                    .map(ErrorGenerator::try_from)
                    .collect::<Result<_>>()?;
                model.set_gate_error(&entry.gate, entry.qubits, gens)?;
            }
            for gen in dto.layer_errors {
                model.add_layer_error(gen.try_into()?)?;
            }
            if !dto.prep.is_empty() {
                if dto.prep.len() != dto.n {
                    return Err(Error::dimension(dto.n, dto.prep.len()));
                }
                for (q, spec) in dto.prep.into_iter().enumerate() {
                    model.set_prep(q, spec.try_into()?)?;
                }
            }
            if !dto.measurement.is_empty() {
                if dto.measurement.len() != dto.n {
                    return Err(Error::dimension(dto.n, dto.measurement.len()));
                }
                for (q, spec) in dto.measurement.into_iter().enumerate() {
                    model.set_measurement(q, spec.try_into()?)?;
                }
            }
            if let Some(text) = dto.provenance {
                model.set_provenance(text);
            }
            Ok(model)
        };
        build().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_error_registration_validates() {
        let mut model = NoiseModel::ideal(2);
        let z = PauliOperator::single(1, 0, PauliKind::Z).unwrap();
        let gen = ErrorGenerator::stochastic(z, 0.01).unwrap();
        assert!(model.set_gate_error("SX", vec![0], vec![gen.clone()]).is_ok());
        assert!(model.set_gate_error("NOTAGATE", vec![0], vec![]).is_err());
        assert!(model.set_gate_error("SX", vec![5], vec![]).is_err());
        assert!(model.set_gate_error("CNOT", vec![0], vec![]).is_err());
        assert!(model.set_gate_error("CNOT", vec![0, 0], vec![]).is_err());
        // Width mismatch: one-qubit generator on a two-qubit instance.
        assert!(model.set_gate_error("CNOT", vec![0, 1], vec![gen]).is_err());

        let gate = CliffordGate::from_name("SX").unwrap();
        assert!(model.gate_error(&gate, &[0]).is_some());
        assert!(model.gate_error(&gate, &[1]).is_none());
        assert!(!model.is_ideal());
        assert!(model.is_stochastic_only());
    }

    #[test]
    fn measurement_channel_closed_forms() {
        let flip = measurement_channel(&MeasurementErrorSpec::BitFlip { p_m: 0.2 }).unwrap();
        // Z readout degrades by e^(−2 p_m); X is untouched.
        let z = PauliOperator::single(1, 0, PauliKind::Z).unwrap().basis_index();
        let x = PauliOperator::single(1, 0, PauliKind::X).unwrap().basis_index();
        assert!((flip[(z, z)] - (-0.4f64).exp()).abs() < 1e-12);
        assert!((flip[(x, x)] - 1.0).abs() < 1e-12);

        let id = measurement_channel(&MeasurementErrorSpec::AmplitudeDamping { p_m: 0.0 }).unwrap();
        assert!((id - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-12);
        assert!(measurement_channel(&MeasurementErrorSpec::BitFlip { p_m: -0.1 }).is_err());
    }

    #[test]
    fn amplitude_damping_matches_the_textbook_channel() {
        let p_m = 0.31;
        let m = measurement_channel(&MeasurementErrorSpec::AmplitudeDamping { p_m }).unwrap();
        let idx = |kind: PauliKind| PauliOperator::single(1, 0, kind).unwrap().basis_index();
        let (x, y, z) = (idx(PauliKind::X), idx(PauliKind::Y), idx(PauliKind::Z));
        let gamma = 1.0 - (-4.0 * p_m).exp();
        assert!((m[(x, x)] - (1.0 - gamma).sqrt()).abs() < 1e-10);
        assert!((m[(y, y)] - (1.0 - gamma).sqrt()).abs() < 1e-10);
        assert!((m[(z, z)] - (1.0 - gamma)).abs() < 1e-10);
        assert!((m[(z, 0)] - gamma).abs() < 1e-10, "decay toward +Z, got {}", m[(z, 0)]);
        // Trace preservation: the identity row is e_1.
        assert!((m[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(m[(0, x)].abs() + m[(0, y)].abs() + m[(0, z)].abs() < 1e-12);
    }

    #[test]
    fn global_depolarizing_sets_uniform_fidelities() {
        let n = 2;
        let gamma = 0.97;
        let model = NoiseModel::global_depolarizing(n, gamma).unwrap();
        assert_eq!(model.layer_errors().len(), 15);
        let probs_rate: f64 = model.layer_errors().iter().map(|g| g.rate()).sum();
        assert!(probs_rate > 0.0);
        // λ_Q = exp(−2·rate·|{P : anticommutes}|) = γ for every Q ≠ I.
        for idx in 1..16 {
            let q = PauliOperator::from_basis_index(n, idx);
            let anti = model
                .layer_errors()
                .iter()
                .filter(|g| {
                    let ErrorGenerator::Stochastic { pauli, .. } = g else { unreachable!() };
                    !pauli.commutes(&q).unwrap()
                })
                .count();
            assert_eq!(anti, 8);
        }
        assert!(NoiseModel::global_depolarizing(2, 0.0).is_err());
        assert!(NoiseModel::global_depolarizing(2, 1.2).is_err());
        assert!(NoiseModel::global_depolarizing(9, 0.9).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut model = NoiseModel::ideal(2);
        let z = PauliOperator::single(1, 0, PauliKind::Z).unwrap();
        let x = PauliOperator::single(1, 0, PauliKind::X).unwrap();
        let y = PauliOperator::single(1, 0, PauliKind::Y).unwrap();
        model
            .set_gate_error(
                "SX",
                vec![1],
                vec![
                    ErrorGenerator::stochastic(z.clone(), 0.01).unwrap(),
                    ErrorGenerator::hamiltonian(x.clone(), -0.02).unwrap(),
                    ErrorGenerator::active(x, y, 0.005).unwrap(),
                ],
            )
            .unwrap();
        let zz: PauliOperator = "+ZZ".parse().unwrap();
        model
            .add_layer_error(ErrorGenerator::stochastic(zz, 0.001).unwrap())
            .unwrap();
        model.set_measurement(0, MeasurementErrorSpec::BitFlip { p_m: 0.05 }).unwrap();
        model
            .set_prep(1, MeasurementErrorSpec::AmplitudeDamping { p_m: 0.02 })
            .unwrap();
        model.set_provenance("unit test");

        let text = serde_json::to_string_pretty(&model).unwrap();
        let back: NoiseModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, model);

        let bad = r#"{"n": 1, "gates": [{"gate": "SX", "qubits": [0], "generators": [{"kind": "stochastic", "paulis": ["+X"], "rate": -1.0}]}]}"#;
        assert!(serde_json::from_str::<NoiseModel>(bad).is_err());
    }
}
