//! Sentence-level BLEU with optional add-one smoothing of higher-order
//! n-gram precisions.

use smallvec::SmallVec;

use super::{MetricError, TokenSequence};

/// Sorted n-grams of one token sequence for orders `1..=max_n`. Build once
/// per sentence when the same sentence is scored against many others.
#[derive(Debug, Clone)]
pub struct NgramProfile<'a, T> {
    len: usize,
    /// Distinct grams of every order with their counts, each order's run
    /// sorted.
    grams: Vec<(&'a [T], usize)>,
    /// Candidate n-gram count per order, duplicates included.
    totals: SmallVec<[usize; 4]>,
    /// Order `n` occupies `grams[bounds[n - 1]..bounds[n]]`.
    bounds: SmallVec<[usize; 5]>,
}

impl<'a, T: Ord> NgramProfile<'a, T> {
    pub fn new(tokens: &'a [T], max_n: usize) -> Result<Self, MetricError> {
        if max_n == 0 {
            return Err(MetricError::InvalidMaxN);
        }
        let mut grams = Vec::with_capacity((1..=max_n).map(|n| tokens.len().saturating_sub(n - 1)).sum());
        let mut bounds = SmallVec::with_capacity(max_n + 1);
        let mut totals = SmallVec::with_capacity(max_n);
        let mut window = Vec::new();
        bounds.push(0);
        for n in 1..=max_n {
            window.clear();
            if tokens.len() >= n {
                window.extend(tokens.windows(n));
            }
            window.sort_unstable();
            totals.push(window.len());
            for w in window.chunk_by(|x, y| x == y) {
                grams.push((w[0], w.len()));
            }
            bounds.push(grams.len());
        }
        Ok(Self {
            len: tokens.len(),
            grams,
            totals,
            bounds,
        })
    }

    fn order(&self, n: usize) -> &[(&'a [T], usize)] {
        &self.grams[self.bounds[n - 1]..self.bounds[n]]
    }

    pub fn max_n(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Clipped n-gram match counts for one candidate/reference pair.
///
/// Both the smoothed and unsmoothed scores derive from the same counts, so
/// callers that want both compute the statistics once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramStats {
    matches: SmallVec<[usize; 4]>,
    totals: SmallVec<[usize; 4]>,
    candidate_len: usize,
    reference_len: usize,
}

impl NgramStats {
    pub fn collect<T: Ord>(
        candidate: &[T],
        reference: &[T],
        max_n: usize,
    ) -> Result<Self, MetricError> {
        Self::between(
            &NgramProfile::new(candidate, max_n)?,
            &NgramProfile::new(reference, max_n)?,
        )
    }

    pub fn between<T: Ord>(
        candidate: &NgramProfile<'_, T>,
        reference: &NgramProfile<'_, T>,
    ) -> Result<Self, MetricError> {
        if candidate.max_n() != reference.max_n() {
            return Err(MetricError::OrderMismatch {
                candidate: candidate.max_n(),
                reference: reference.max_n(),
            });
        }
        let mut matches = SmallVec::new();
        let mut totals = SmallVec::new();
        let mut any = true;
        for n in 1..=candidate.max_n() {
            let c = candidate.order(n);
            // A shared (n+1)-gram would contain a shared n-gram.
            let m = if any { sorted_overlap(c, reference.order(n)) } else { 0 };
            any = m > 0;
            matches.push(m);
            totals.push(candidate.totals[n - 1]);
        }
        Ok(Self {
            matches,
            totals,
            candidate_len: candidate.len,
            reference_len: reference.len,
        })
    }

    pub fn max_n(&self) -> usize {
        self.matches.len()
    }

    /// `matches()[n - 1]` = clipped matches for order n.
    pub fn matches(&self) -> &[usize] {
        &self.matches
    }

    /// `totals()[n - 1]` = candidate n-gram count for order n.
    pub fn totals(&self) -> &[usize] {
        &self.totals
    }

    pub fn candidate_len(&self) -> usize {
        self.candidate_len
    }

    pub fn reference_len(&self) -> usize {
        self.reference_len
    }

    /// Precision for order `n` (1-based), after smoothing when requested.
    pub fn precision(&self, n: usize, smoothing: bool) -> f64 {
        let (m, t) = (self.matches[n - 1], self.totals[n - 1]);
        if smoothing && n >= 2 {
            (m as f64 + 1.0) / (t as f64 + 1.0)
        } else if t == 0 {
            0.0
        } else {
            m as f64 / t as f64
        }
    }

    pub fn brevity_penalty(&self) -> f64 {
        let (c, r) = (self.candidate_len as f64, self.reference_len as f64);
        if self.candidate_len == 0 {
            0.0
        } else if c > r {
            1.0
        } else {
            (1.0 - r / c).exp()
        }
    }

    pub fn score(&self, smoothing: bool) -> f64 {
        if self.candidate_len == 0 || self.reference_len == 0 {
            return 0.0;
        }
        let max_n = self.max_n();
        let mut product = 1.0;
        for n in 1..=max_n {
            product *= self.precision(n, smoothing);
        }
        // Each factor is at least 1/(len + 1): no underflow at sentence scale.
        if product == 0.0 {
            return 0.0;
        }
        self.brevity_penalty() * product.powf(1.0 / max_n as f64)
    }
}

// Sum over distinct grams of min(count_a, count_b) for two sorted,
// deduplicated gram lists. Element-wise comparison: grams are short, so this
// beats `memcmp`.
fn sorted_overlap<T: Ord>(a: &[(&[T], usize)], b: &[(&[T], usize)]) -> usize {
    use std::cmp::Ordering;
    let (mut i, mut j, mut hits) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.iter().cmp(b[j].0.iter()) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                hits += a[i].1.min(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    hits
}

/// BLEU over arbitrary ordered tokens.
pub fn bleu_tokens<T: Ord>(
    candidate: &[T],
    reference: &[T],
    max_n: usize,
    smoothing: bool,
) -> Result<f64, MetricError> {
    Ok(NgramStats::collect(candidate, reference, max_n)?.score(smoothing))
}

/// Geometric mean of clipped n-gram precisions (orders 1..=max_n) times the
/// brevity penalty. An empty side scores 0 and logs a warning.
pub fn bleu(
    candidate: &TokenSequence,
    reference: &TokenSequence,
    max_n: usize,
    smoothing: bool,
) -> Result<f64, MetricError> {
    if candidate.is_empty() || reference.is_empty() {
        if max_n == 0 {
            return Err(MetricError::InvalidMaxN);
        }
        log::warn!("bleu: empty candidate or reference, scoring 0");
        return Ok(0.0);
    }
    bleu_tokens(candidate.as_slice(), reference.as_slice(), max_n, smoothing)
}
