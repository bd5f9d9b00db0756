//! JSON Lines record files: a header line, then one `PairRecord` per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{EprError, ExperimentConfig, PairRecord};

pub const RECORD_FORMAT: &str = "retroloop-records/1";

/// First line of a record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    /// Run manifest of the producing command, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
    pub format: String,
    pub config: ExperimentConfig,
}

impl RecordHeader {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            manifest: None,
            format: RECORD_FORMAT.to_string(),
            config,
        }
    }
}

pub fn write_records<W: Write>(mut w: W, header: &RecordHeader, records: &[PairRecord]) -> Result<(), EprError> {
    let line = serde_json::to_string(header).map_err(|e| EprError::Format(e.to_string()))?;
    writeln!(w, "{line}")?;
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| EprError::Format(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: BufRead>(r: R) -> Result<(RecordHeader, Vec<PairRecord>), EprError> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| EprError::Format("empty file".into()))??;
    let header: RecordHeader = serde_json::from_str(&first).map_err(|e| EprError::Format(format!("header: {e}")))?;
    if header.format != RECORD_FORMAT {
        return Err(EprError::Format(format!("unsupported format {:?}", header.format)));
    }
    header.config.validate()?;
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PairRecord =
            serde_json::from_str(&line).map_err(|e| EprError::Format(format!("line {}: {e}", n + 2)))?;
        if !rec.weak_a.iter().chain(rec.weak_b.iter()).all(|x| x.is_finite()) || rec.choice_a > 2 || rec.choice_b > 2 {
            return Err(EprError::Format(format!("line {}: invalid record", n + 2)));
        }
        if rec.pair_id != records.len() as u64 {
            return Err(EprError::Format(format!(
                "line {}: expected pair {}, found {}",
                n + 2,
                records.len(),
                rec.pair_id
            )));
        }
        records.push(rec);
    }
    if records.len() != header.config.pairs {
        return Err(EprError::Format(format!(
            "header declares {} pairs, file holds {}",
            header.config.pairs,
            records.len()
        )));
    }
    Ok((header, records))
}
