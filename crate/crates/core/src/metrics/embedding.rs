//! Per-token embeddings and the greedy max-cosine matching score.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::{tokenize, MetricError, ScoreTriple, TokenSequence};

const NORM_TOLERANCE: f64 = 1e-6;

/// Tokens paired with one unit-norm vector each.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedText {
    tokens: TokenSequence,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddedText {
    pub fn new(tokens: TokenSequence, vectors: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        if tokens.len() != vectors.len() {
            return Err(MetricError::LengthMismatch {
                tokens: tokens.len(),
                vectors: vectors.len(),
            });
        }
        if let Some(first) = vectors.first() {
            let dim = first.len();
            for (index, v) in vectors.iter().enumerate() {
                if v.len() != dim {
                    return Err(MetricError::DimensionMismatch {
                        left: dim,
                        right: v.len(),
                    });
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > NORM_TOLERANCE {
                    return Err(MetricError::NotUnitNorm { index, norm });
                }
            }
        }
        Ok(Self { tokens, vectors })
    }

    pub fn tokens(&self) -> &TokenSequence {
        &self.tokens
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.vectors.first().map(Vec::len)
    }
}

/// Source of per-token vectors. Implementations must be deterministic.
pub trait EmbeddingProvider: Send + Sync {
    fn provider_id(&self) -> &str;

    fn embed(&self, text: &str) -> Result<EmbeddedText, MetricError>;
}

fn token_digest(token: &str) -> [u8; 32] {
    Sha256::digest(token.as_bytes()).into()
}

/// Gaussian unit vectors seeded from a digest of each token type. Distinct
/// tokens are nearly orthogonal in high dimension; equal tokens are identical.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    id: String,
    dim: usize,
}

impl HashEmbedder {
    pub const DEFAULT_DIM: usize = 384;

    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            id: format!("synthetic-hash-{dim}"),
            dim,
        }
    }

    pub fn vector(&self, token: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::from_seed(token_digest(token));
        let mut v: Vec<f64> = (0..self.dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIM)
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn embed(&self, text: &str) -> Result<EmbeddedText, MetricError> {
        let tokens = tokenize(text);
        let vectors = tokens.iter().map(|t| self.vector(t)).collect();
        EmbeddedText::new(tokens, vectors)
    }
}

/// One-hot vectors in a hashed bucket space: tokens in different buckets
/// are exactly orthogonal.
#[derive(Debug, Clone)]
pub struct OneHotEmbedder {
    id: String,
    dim: usize,
}

impl OneHotEmbedder {
    pub const DEFAULT_DIM: usize = 1 << 16;

    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            id: format!("synthetic-onehot-{dim}"),
            dim,
        }
    }

    pub fn bucket(&self, token: &str) -> usize {
        let d = token_digest(token);
        let word = u64::from_le_bytes(d[..8].try_into().expect("8-byte prefix"));
        (word % self.dim as u64) as usize
    }
}

impl Default for OneHotEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIM)
    }
}

impl EmbeddingProvider for OneHotEmbedder {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn embed(&self, text: &str) -> Result<EmbeddedText, MetricError> {
        let tokens = tokenize(text);
        let vectors = tokens
            .iter()
            .map(|t| {
                let mut v = vec![0.0; self.dim];
                v[self.bucket(t)] = 1.0;
                v
            })
            .collect();
        EmbeddedText::new(tokens, vectors)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean_best_match(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|u| {
            to.iter()
                .map(|v| dot(u, v))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    total / from.len() as f64
}

/// Greedy token matching: precision averages each candidate token's best
/// cosine against the reference, recall the converse. No importance
/// weighting and no baseline rescaling. P and R are clamped into [0, 1]
/// (unit vectors can have negative cosine).
pub fn greedy_embedding_score(
    candidate: &EmbeddedText,
    reference: &EmbeddedText,
) -> Result<ScoreTriple, MetricError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let (cd, rd) = (candidate.vectors[0].len(), reference.vectors[0].len());
    if cd != rd {
        return Err(MetricError::DimensionMismatch {
            left: cd,
            right: rd,
        });
    }
    let p = mean_best_match(&candidate.vectors, &reference.vectors).clamp(0.0, 1.0);
    let r = mean_best_match(&reference.vectors, &candidate.vectors).clamp(0.0, 1.0);
    Ok(ScoreTriple::from_pr(p, r))
}
