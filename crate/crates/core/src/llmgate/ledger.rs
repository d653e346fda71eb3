use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::GateError;

pub const LEDGER_HEADER: [&str; 6] = [
    "timestamp",
    "model",
    "input_tokens",
    "output_tokens",
    "cost_usd",
    "cached",
];

/// One charged (or free, if cached) completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub timestamp: String,
    pub model: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cost_usd: f64,
    pub cached: bool,
}

/// Append-only spend log. `total_usd` covers rows recorded by this
/// instance, not rows already present in the file.
#[derive(Debug)]
pub struct CostLedger {
    sink: Option<(PathBuf, csv::Writer<File>)>,
    entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn in_memory() -> Self {
        Self {
            sink: None,
            entries: Vec::new(),
        }
    }

    /// Appends to `path`, writing the header if the file is new or empty.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, GateError> {
        let path = path.as_ref().to_path_buf();
        let io = |e| GateError::ledger(&path, e);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        let fresh = file.metadata().map_err(io)?.len() == 0;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            writer
                .write_record(LEDGER_HEADER)
                .and_then(|_| writer.flush().map_err(Into::into))
                .map_err(|e| GateError::ledger(&path, e.into()))?;
        }
        Ok(Self {
            sink: Some((path, writer)),
            entries: Vec::new(),
        })
    }

    pub fn record(&mut self, entry: LedgerEntry) -> Result<(), GateError> {
        if let Some((path, writer)) = &mut self.sink {
            writer
                .serialize(&entry)
                .map_err(|e| GateError::ledger(path, e.into()))?;
            writer.flush().map_err(|e| GateError::ledger(path, e))?;
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_usd(&self) -> f64 {
        self.entries.iter().map(|e| e.cost_usd).sum()
    }
}

pub fn read_ledger(path: impl AsRef<Path>) -> Result<Vec<LedgerEntry>, GateError> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| GateError::ledger(path, e.into()))?;
    reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| GateError::ledger(path, e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(cost: f64, cached: bool) -> LedgerEntry {
        LedgerEntry {
            timestamp: "2024-01-01T00:00:00+00:00".into(),
            model: "llama-3.1-8b".into(),
            input_tokens: 10,
            output_tokens: 20,
            cost_usd: cost,
            cached,
        }
    }

    #[test]
    fn appends_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spend.csv");
        let mut ledger = CostLedger::open(&path).unwrap();
        ledger.record(entry(0.25, false)).unwrap();
        drop(ledger);
        let mut ledger = CostLedger::open(&path).unwrap();
        ledger.record(entry(0.0, true)).unwrap();
        assert_eq!(ledger.total_usd(), 0.0);

        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), LEDGER_HEADER.join(","));
        assert_eq!(text.lines().count(), 3);
        let rows = read_ledger(&path).unwrap();
        assert_eq!(rows, vec![entry(0.25, false), entry(0.0, true)]);
    }
}
