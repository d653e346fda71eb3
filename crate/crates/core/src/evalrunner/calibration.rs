use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::metrics::{bleu, greedy_embedding_score, names, rouge_l, tokenize, EmbeddingProvider};

/// How far a calibration candidate departs from its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CalibrationCategory {
    /// Near-identical wording.
    TwinMinimal,
    /// Same meaning, roughly half the wording changed.
    Paraphrase50,
    DifferentMeaning,
}

impl CalibrationCategory {
    pub const ALL: [Self; 3] = [Self::TwinMinimal, Self::Paraphrase50, Self::DifferentMeaning];
}

impl fmt::Display for CalibrationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationPair {
    pub candidate: String,
    pub reference: String,
    pub category: CalibrationCategory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationMetric {
    /// One column per embedding provider.
    GreedyEmbedding,
    Bleu,
    BleuSmoothed,
    RougeL,
    RougeLNostem,
}

impl CalibrationMetric {
    pub const ALL: [Self; 5] = [
        Self::GreedyEmbedding,
        Self::Bleu,
        Self::BleuSmoothed,
        Self::RougeL,
        Self::RougeLNostem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GreedyEmbedding => names::GREEDY_EMBEDDING,
            Self::Bleu => names::BLEU,
            Self::BleuSmoothed => names::BLEU_SMOOTHED,
            Self::RougeL => names::ROUGE_L,
            Self::RougeLNostem => names::ROUGE_L_NOSTEM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub category: CalibrationCategory,
    pub n: usize,
    /// Mean F1 ×100, aligned with `CalibrationTable::columns`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub columns: Vec<String>,
    /// Ordered twin, paraphrase, different.
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationTable {
    pub fn value(&self, category: CalibrationCategory, column: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.rows.iter().find(|r| r.category == category).map(|r| r.values[col])
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["category".to_string(), "n".to_string()];
        header.extend(self.columns.iter().cloned());
        out.write_record(&header)?;
        for row in &self.rows {
            let mut fields = vec![row.category.to_string(), row.n.to_string()];
            fields.extend(row.values.iter().map(|v| format!("{v:.2}")));
            out.write_record(&fields)?;
        }
        out.flush()?;
        Ok(())
    }
}

const BLEU_MAX_N: usize = 4;

pub fn greedy_column(embedder: &dyn EmbeddingProvider) -> String {
    format!("{}[{}]", names::GREEDY_EMBEDDING, embedder.provider_id())
}

/// Per-category mean F1 (×100) of each metric variant.
pub fn calibration_experiment(
    pairs: &[CalibrationPair],
    metrics: &[CalibrationMetric],
    embedders: &[&dyn EmbeddingProvider],
) -> Result<CalibrationTable, EvalError> {
    let mut columns = Vec::new();
    for metric in metrics {
        match metric {
            CalibrationMetric::GreedyEmbedding => columns.extend(embedders.iter().map(|e| greedy_column(*e))),
            other => columns.push(other.name().to_string()),
        }
    }

    let mut sums: BTreeMap<CalibrationCategory, (usize, Vec<f64>)> = BTreeMap::new();
    for pair in pairs {
        let (cand, refr) = (tokenize(&pair.candidate), tokenize(&pair.reference));
        let mut values = Vec::with_capacity(columns.len());
        for metric in metrics {
            match metric {
                CalibrationMetric::GreedyEmbedding => {
                    for embedder in embedders {
                        let c = embedder.embed(&pair.candidate)?;
                        let r = embedder.embed(&pair.reference)?;
                        values.push(greedy_embedding_score(&c, &r)?.f1);
                    }
                }
                CalibrationMetric::Bleu => values.push(bleu(&cand, &refr, BLEU_MAX_N, false)?),
                CalibrationMetric::BleuSmoothed => values.push(bleu(&cand, &refr, BLEU_MAX_N, true)?),
                CalibrationMetric::RougeL => values.push(rouge_l(&cand, &refr, true).f1),
                CalibrationMetric::RougeLNostem => values.push(rouge_l(&cand, &refr, false).f1),
            }
        }
        let (n, acc) = sums
            .entry(pair.category)
            .or_insert_with(|| (0, vec![0.0; columns.len()]));
        *n += 1;
        acc.iter_mut().zip(values).for_each(|(a, v)| *a += v);
    }

    let rows = CalibrationCategory::ALL
        .into_iter()
        .map(|category| {
            let (n, acc) = sums.remove(&category).ok_or(EvalError::EmptyCategory(category))?;
            Ok(CalibrationRow {
                category,
                n,
                values: acc.into_iter().map(|s| 100.0 * s / n as f64).collect(),
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(CalibrationTable { columns, rows })
}

pub fn parse_calibration_pairs(text: &str) -> Result<Vec<CalibrationPair>, EvalError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: CalibrationPair = serde_json::from_str(line).map_err(|e| EvalError::InvalidPair {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if pair.candidate.trim().is_empty() || pair.reference.trim().is_empty() {
            return Err(EvalError::InvalidPair {
                line: i + 1,
                reason: "empty text".into(),
            });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn load_calibration_pairs(path: impl AsRef<Path>) -> Result<Vec<CalibrationPair>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(EvalError::io(path))?;
    parse_calibration_pairs(&text)
}

/// The shipped fixture: 20 pairs per category.
pub fn default_calibration_pairs() -> Vec<CalibrationPair> {
    parse_calibration_pairs(include_str!("../../fixtures/calibration_pairs.jsonl"))
        .expect("shipped calibration fixture is valid")
}
