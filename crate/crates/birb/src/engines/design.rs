//! Deterministic batch execution of an experiment design.
//!
//! Work splits into (circuit, shot-block) units. Each unit draws from an
//! RNG substream keyed by (design seed, depth, circuit index, block), so
//! the dataset is bit-identical for any worker count or scheduling
//! order.

use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engines::dense::outcome_cdf;
use crate::engines::frame::frame_flip_probability;
use crate::engines::MAX_DENSE_QUBITS;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::sampler::{BirbCircuit, ExperimentDesign};

/// Dataset rows are stamped with this version; readers accept any 1.x.y.
pub const DATASET_SCHEMA_VERSION: &str = "1.0.0";

/// Shots per RNG block. Fixed: changing it would change sampled data.
const SHOT_BLOCK: usize = 16_384;

/// Which simulation backend executes the circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    /// Dense evolution, finite shots from the exact outcome distribution.
    Dense,
    /// Dense evolution, exact expectations instead of shots.
    DenseExact,
    /// Pauli-frame Monte Carlo (stochastic noise and bit-flip SPAM only).
    Frame,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Dense => "dense",
            EngineKind::DenseExact => "dense-exact",
            EngineKind::Frame => "frame",
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(EngineKind::Dense),
            "dense-exact" => Ok(EngineKind::DenseExact),
            "frame" => Ok(EngineKind::Frame),
            other => Err(Error::config(format!(
                "unknown engine {other:?}; expected dense, dense-exact, or frame"
            ))),
        }
    }
}

/// Execution knobs independent of the experiment design.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Shots per circuit for the sampling engines.
    pub shots: usize,
    /// Worker threads; None uses the global thread pool.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            shots: 1000,
            workers: None,
        }
    }
}

/// One circuit's results.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DatasetRow {
    pub schema_version: String,
    pub id: String,
    pub n: usize,
    /// Benchmark depth.
    pub d: usize,
    /// The measured Pauli, e.g. `+ZIZ`.
    pub target: String,
    /// Shots taken; 0 for exact rows.
    #[serde(rename = "N")]
    pub shots: usize,
    /// Sum of the ±1 success values over all shots.
    pub success_sum: i64,
    /// Exact expected success value, when the engine computes one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

impl DatasetRow {
    /// Mean success value of this row.
    pub fn mean(&self) -> f64 {
        match self.exact {
            Some(f) => f,
            None if self.shots > 0 => self.success_sum as f64 / self.shots as f64,
            None => 0.0,
        }
    }
}

/// The rows produced by one run, in design order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<DatasetRow>,
}

/// One JSON object per line, one line per circuit.
pub fn write_dataset<W: Write>(mut writer: W, dataset: &Dataset) -> Result<()> {
    for row in &dataset.rows {
        let line = serde_json::to_string(row)
            .map_err(|e| Error::domain(format!("dataset row serialization: {e}")))?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = vec![];
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: DatasetRow = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            column: e.column().max(1),
            message: format!("dataset row: {e}"),
        })?;
        let major = row.schema_version.split('.').next().unwrap_or("");
        if major != "1" {
            return Err(Error::Parse {
                line: idx + 1,
                column: 1,
                message: format!(
                    "unsupported dataset schema version {:?}; this reader handles 1.x.y",
                    row.schema_version
                ),
            });
        }
        rows.push(row);
    }
    Ok(Dataset { rows })
}

/// Per-circuit sampling state, computed once and reused across blocks.
enum Sampler {
    Cdf(Vec<f64>),
    FlipProbability(f64),
}

fn run_unit(
    design: &ExperimentDesign,
    noise: &NoiseModel,
    engine: EngineKind,
    shots: usize,
    depth: usize,
    index: usize,
) -> Result<DatasetRow> {
    let bc = design.sample_circuit(depth, index)?;
    let mut row = DatasetRow {
        schema_version: DATASET_SCHEMA_VERSION.to_string(),
        id: ExperimentDesign::circuit_id(depth, index),
        n: bc.qubit_count(),
        d: bc.benchmark_depth(),
        target: bc.target().to_string(),
        shots: 0,
        success_sum: 0,
        exact: None,
    };
    if engine == EngineKind::DenseExact {
        row.exact = Some(crate::engines::dense_expectation(&bc, noise)?);
        return Ok(row);
    }
    let sampler = match engine {
        EngineKind::Dense => Sampler::Cdf(outcome_cdf(&bc, noise)?),
        EngineKind::Frame => Sampler::FlipProbability(frame_flip_probability(&bc, noise)?),
        EngineKind::DenseExact => unreachable!("handled above"),
    };
    row.shots = shots;
    let mut taken = 0;
    let mut block = 0;
    while taken < shots {
        let count = SHOT_BLOCK.min(shots - taken);
        let mut rng = design.shot_rng(depth, index, block);
        match &sampler {
            Sampler::Cdf(cdf) => {
                for _ in 0..count {
                    let r: f64 = rng.gen();
                    let b = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
                    row.success_sum += i64::from(bc.success_value(&[b as u64]));
                }
            }
            Sampler::FlipProbability(p_flip) => {
                for _ in 0..count {
                    row.success_sum += if rng.gen::<f64>() < *p_flip { -1 } else { 1 };
                }
            }
        }
        taken += count;
        block += 1;
    }
    Ok(row)
}

/// Execute the design: every (depth, index) circuit, rows in design
/// order. The dataset depends only on (design, noise, engine, shots),
/// never on worker count.
pub fn run_design(
    design: &ExperimentDesign,
    noise: &NoiseModel,
    engine: EngineKind,
    options: &RunOptions,
) -> Result<Dataset> {
    let n = design.qubit_count();
    if noise.qubit_count() != n {
        return Err(Error::dimension(n, noise.qubit_count()));
    }
    match engine {
        EngineKind::Dense | EngineKind::DenseExact => {
            if n > MAX_DENSE_QUBITS {
                return Err(Error::capability(format!(
                    "the dense engine is capped at {MAX_DENSE_QUBITS} qubits, got {n} \
                     (the frame engine handles wider stochastic models)"
                )));
            }
        }
        EngineKind::Frame => {
            if !noise.is_stochastic_only() {
                return Err(Error::domain(
                    "the frame engine handles stochastic generators and bit-flip SPAM only; \
                     rerun with --engine dense for this noise model",
                ));
            }
        }
    }
    let units: Vec<(usize, usize)> = design
        .depths()
        .iter()
        .flat_map(|&d| (0..design.circuits_per_depth()).map(move |k| (d, k)))
        .collect();
    let execute = || -> Result<Vec<DatasetRow>> {
        units
            .par_iter()
            .map(|&(depth, index)| run_unit(design, noise, engine, options.shots, depth, index))
            .collect()
    };
    let rows = match options.workers {
        None => execute()?,
        Some(0) => return Err(Error::config("worker count must be positive")),
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(execute)?,
    };
    Ok(Dataset { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::GateSetSpec;
    use crate::noise::{ErrorGenerator, NoiseModel};
    use crate::pauli::PauliOperator;
    use crate::sampler::OmegaSpec;

    fn design(n: usize, seed: u64) -> ExperimentDesign {
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(n).unwrap(), 0.5).unwrap();
        ExperimentDesign::birb(n, vec![0, 1, 3], 2, omega, seed)
    }

    #[test]
    fn engine_names_round_trip() {
        for engine in [EngineKind::Dense, EngineKind::DenseExact, EngineKind::Frame] {
            assert_eq!(engine.name().parse::<EngineKind>().unwrap(), engine);
        }
        assert!("fast".parse::<EngineKind>().is_err());
    }

    #[test]
    fn exact_rows_carry_expectations_and_no_shots() {
        let noise = NoiseModel::global_depolarizing(2, 0.95).unwrap();
        let dataset = run_design(
            &design(2, 11),
            &noise,
            EngineKind::DenseExact,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(dataset.rows.len(), 6);
        for row in &dataset.rows {
            assert_eq!(row.shots, 0);
            let want = 0.95f64.powi(row.d as i32);
            assert!((row.exact.unwrap() - want).abs() < 1e-12);
            assert!((row.mean() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn datasets_are_independent_of_worker_count() {
        let noise = NoiseModel::global_depolarizing(2, 0.9).unwrap();
        let options = |workers| RunOptions {
            shots: 700,
            workers,
        };
        for engine in [EngineKind::Dense, EngineKind::Frame] {
            let serial = run_design(&design(2, 17), &noise, engine, &options(Some(1))).unwrap();
            let pooled = run_design(&design(2, 17), &noise, engine, &options(Some(3))).unwrap();
            let global = run_design(&design(2, 17), &noise, engine, &options(None)).unwrap();
            assert_eq!(serial, pooled);
            assert_eq!(serial, global);
            assert!(serial.rows.iter().all(|r| r.shots == 700));
        }
        assert!(matches!(
            run_design(
                &design(2, 17),
                &noise,
                EngineKind::Dense,
                &options(Some(0))
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn shot_blocks_split_reproducibly() {
        // More shots than one block, so the block loop must advance the
        // substream rather than reuse it.
        let noise = NoiseModel::global_depolarizing(1, 0.8).unwrap();
        let omega = OmegaSpec::new(GateSetSpec::all_to_all_default(1).unwrap(), 0.0).unwrap();
        let design = ExperimentDesign::birb(1, vec![2], 1, omega, 23);
        let options = RunOptions {
            shots: SHOT_BLOCK + 100,
            workers: None,
        };
        let a = run_design(&design, &noise, EngineKind::Frame, &options).unwrap();
        let b = run_design(&design, &noise, EngineKind::Frame, &options).unwrap();
        assert_eq!(a, b);
        let row = &a.rows[0];
        assert_eq!(row.shots, SHOT_BLOCK + 100);
        // The mean must sit near the exact value, not at a degenerate ±1.
        assert!(row.mean().abs() < 1.0);
    }

    #[test]
    fn frame_rejects_incompatible_noise_upfront() {
        let mut noise = NoiseModel::ideal(2);
        let zz: PauliOperator = "+ZZ".parse().unwrap();
        noise
            .add_layer_error(ErrorGenerator::hamiltonian(zz, 0.02).unwrap())
            .unwrap();
        assert!(matches!(
            run_design(
                &design(2, 3),
                &noise,
                EngineKind::Frame,
                &RunOptions::default()
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dataset_jsonl_round_trips() {
        let noise = NoiseModel::global_depolarizing(2, 0.92).unwrap();
        let dataset = run_design(
            &design(2, 29),
            &noise,
            EngineKind::Dense,
            &RunOptions {
                shots: 50,
                workers: None,
            },
        )
        .unwrap();
        let mut buffer = vec![];
        write_dataset(&mut buffer, &dataset).unwrap();
        let back = read_dataset(buffer.as_slice()).unwrap();
        assert_eq!(back, dataset);

        let v2 = String::from_utf8(buffer).unwrap().replacen("1.0.0", "2.0.0", 1);
        assert!(matches!(
            read_dataset(v2.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }
}
