//! Source ingestion: NLOC measurement, NLOC strata, seeded stratified
//! sampling and the JSON Lines code-story dataset.

mod dataset;
mod nloc;
mod profile;
mod sampling;
mod snippet;
mod stratum;

use std::path::Path;

use thiserror::Error;

pub use dataset::{load_dataset, read_dataset, save_dataset, write_dataset, DatasetRecord};
pub use nloc::{count_nloc, Language};
pub use profile::{profile_dir, write_profile_csv, Profile, ProfileEntry};
pub use sampling::{sample_stratified, Deficiency};
pub use snippet::CodeSnippet;
pub use stratum::Stratum;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unsupported language tag `{0}`")]
    UnsupportedLanguage(String),
    #[error("unterminated block comment opened at line {line}")]
    UnterminatedBlockComment { line: usize },
    #[error("no code lines")]
    NoCodeLines,
    #[error("nloc {0} outside the stratified range 1..=350")]
    NlocOutOfRange(usize),
    #[error("stratum index {0} outside 0..35")]
    StratumOutOfRange(usize),
    #[error("per-stratum sample size must be positive")]
    InvalidSampleSize,
    #[error("duplicate snippet id `{0}`")]
    DuplicateId(String),
    #[error("strata with fewer than {needed} members: {}", format_deficient(.deficient))]
    DeficientStrata {
        needed: usize,
        deficient: Vec<Deficiency>,
    },
    #[error("malformed record on line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid record `{id}`: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.as_ref().display().to_string();
        move |source| Self::Io { path, source }
    }
}

fn format_deficient(deficient: &[Deficiency]) -> String {
    deficient
        .iter()
        .map(|d| format!("{} ({} available)", d.stratum, d.available))
        .collect::<Vec<_>>()
        .join(", ")
}
