//! Similarity metrics used to compare generated stories with references:
//! BLEU, ROUGE-L and greedy embedding matching, plus fidelity bands.

mod bleu;
mod embedding;
mod fidelity;
mod rouge;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{bleu, bleu_tokens, NgramProfile, NgramStats};
pub use embedding::{
    greedy_embedding_score, EmbeddedText, EmbeddingProvider, HashEmbedder, OneHotEmbedder,
};
pub use fidelity::{classify_fidelity, FidelityBand};
pub use rouge::{lcs_len, rouge_l, rouge_l_tokens, stem_tokens};
pub use tokenize::{tokenize, TokenSequence};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("max n-gram order must be at least 1")]
    InvalidMaxN,
    #[error("n-gram order mismatch: candidate {candidate}, reference {reference}")]
    OrderMismatch { candidate: usize, reference: usize },
    #[error("empty token at position {0}")]
    EmptyToken(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{tokens} tokens but {vectors} vectors")]
    LengthMismatch { tokens: usize, vectors: usize },
    #[error("vector {index} has norm {norm}, expected 1")]
    NotUnitNorm { index: usize, norm: f64 },
    #[error("score {0} outside [0, 1]")]
    OutOfRange(f64),
}

/// Precision, recall and their harmonic mean, all in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreTriple {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    /// A single-valued score (e.g. BLEU) stored in all three slots.
    pub fn uniform(value: f64) -> Self {
        Self {
            precision: value,
            recall: value,
            f1: value,
        }
    }

    pub fn zero() -> Self {
        Self::uniform(0.0)
    }
}

/// Metric names used as keys in per-record score maps.
pub mod names {
    pub const GREEDY_EMBEDDING: &str = "greedy-embedding";
    pub const BLEU: &str = "bleu";
    pub const BLEU_SMOOTHED: &str = "bleu-smoothed";
    pub const ROUGE_L: &str = "rouge-l";
    pub const ROUGE_L_NOSTEM: &str = "rouge-l-nostem";
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn f1_between_precision_and_recall(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let s = ScoreTriple::from_pr(p, r);
            prop_assert!((0.0..=1.0).contains(&s.f1));
            if p + r > 0.0 {
                prop_assert!(s.f1 <= p.max(r) + 1e-15);
                prop_assert!(s.f1 >= p.min(r) - 1e-15);
            }
        }
    }
}
