//! ROUGE-L: longest-common-subsequence precision/recall/F1.

use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::{ScoreTriple, TokenSequence};

/// Length of the longest common subsequence. Bit-parallel when `b` has at
/// most 64 items, single-row DP otherwise.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    if b.len() <= 64 {
        lcs_bits(a, b)
    } else {
        lcs_dp(a, b)
    }
}

// Hyyrö's bit-vector LCS: zero bits of `v` mark matched positions of `b`.
fn lcs_bits<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let m = b.len();
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut v = full;
    for x in a {
        let mut matches = 0u64;
        for (j, y) in b.iter().enumerate() {
            matches |= u64::from(x == y) << j;
        }
        let u = v & matches;
        v = (v.wrapping_add(u) | (v - u)) & full;
    }
    m - v.count_ones() as usize
}

fn lcs_dp<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

pub fn rouge_l_tokens<T: PartialEq>(candidate: &[T], reference: &[T]) -> ScoreTriple {
    if candidate.is_empty() || reference.is_empty() {
        return ScoreTriple::zero();
    }
    let l = lcs_len(candidate, reference) as f64;
    ScoreTriple::from_pr(l / candidate.len() as f64, l / reference.len() as f64)
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Suffix-stripping stem of every token.
pub fn stem_tokens(tokens: &TokenSequence) -> Vec<String> {
    let stemmer = stemmer();
    tokens.iter().map(|t| stemmer.stem(t).into_owned()).collect()
}

pub fn rouge_l(
    candidate: &TokenSequence,
    reference: &TokenSequence,
    use_stemming: bool,
) -> ScoreTriple {
    if use_stemming {
        rouge_l_tokens(&stem_tokens(candidate), &stem_tokens(reference))
    } else {
        rouge_l_tokens(candidate.as_slice(), reference.as_slice())
    }
}
