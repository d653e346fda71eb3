//! JSON Lines code-story dataset: one object per line with keys `id`,
//! `language`, `code`, `nloc`, `stratum`, `reference_story`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CodeSnippet, CorpusError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRecord {
    pub snippet: CodeSnippet,
    pub reference_story: String,
}

impl DatasetRecord {
    pub fn new(snippet: CodeSnippet, reference_story: impl Into<String>) -> Result<Self, CorpusError> {
        let reference_story = reference_story.into();
        if reference_story.trim().is_empty() {
            return Err(CorpusError::InvalidRecord {
                id: snippet.id().to_string(),
                reason: "empty reference story".into(),
            });
        }
        Ok(Self {
            snippet,
            reference_story,
        })
    }
}

impl AsRef<CodeSnippet> for DatasetRecord {
    fn as_ref(&self) -> &CodeSnippet {
        &self.snippet
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    id: String,
    language: String,
    code: String,
    nloc: usize,
    stratum: usize,
    reference_story: String,
}

impl From<&DatasetRecord> for Row {
    fn from(r: &DatasetRecord) -> Self {
        Row {
            id: r.snippet.id().to_string(),
            language: r.snippet.language_tag().to_string(),
            code: r.snippet.source_text().to_string(),
            nloc: r.snippet.nloc(),
            stratum: r.snippet.stratum().index(),
            reference_story: r.reference_story.clone(),
        }
    }
}

impl TryFrom<Row> for DatasetRecord {
    type Error = CorpusError;

    fn try_from(row: Row) -> Result<Self, Self::Error> {
        let snippet = CodeSnippet::from_parts(row.id, row.code, row.language, row.nloc, row.stratum)?;
        DatasetRecord::new(snippet, row.reference_story)
    }
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<Vec<DatasetRecord>, CorpusError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push(DatasetRecord::try_from(row)?);
    }
    Ok(records)
}

pub fn write_dataset<W: Write>(mut writer: W, records: &[DatasetRecord]) -> Result<(), CorpusError> {
    for record in records {
        let line = serde_json::to_string(&Row::from(record)).expect("dataset rows serialize");
        writeln!(writer, "{line}").map_err(CorpusError::io("<writer>"))?;
    }
    writer.flush().map_err(CorpusError::io("<writer>"))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(CorpusError::io(path))?;
    read_dataset(BufReader::new(file))
}

pub fn save_dataset(path: impl AsRef<Path>, records: &[DatasetRecord]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(CorpusError::io(path))?;
    write_dataset(BufWriter::new(file), records)
}
