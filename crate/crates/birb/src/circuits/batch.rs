//! JSONL circuit batches: one record per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sampled benchmark circuit, as stored in a JSONL batch file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CircuitRecord {
    pub id: String,
    /// Benchmark depth (core layers only).
    pub depth: usize,
    /// The full circuit in the plain-text format.
    pub circuit_text: String,
    /// The measured Pauli, e.g. `+ZIZ`.
    pub target_pauli: String,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

pub fn write_circuit_batch<W: Write>(mut writer: W, records: &[CircuitRecord]) -> Result<()> {
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::domain(format!("circuit record serialization: {e}")))?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_circuit_batch<R: BufRead>(reader: R) -> Result<Vec<CircuitRecord>> {
    let mut records = vec![];
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CircuitRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            column: e.column().max(1),
            message: format!("circuit record: {e}"),
        })?;
        records.push(record);
    }
    Ok(records)
}
