use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CodeSnippet, CorpusError, Stratum};

/// A stratum that cannot supply the requested sample size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deficiency {
    pub stratum: Stratum,
    pub available: usize,
}

/// Draws exactly `per_stratum` items from every one of the 35 strata.
///
/// Each stratum's members are ordered by id, shuffled with a ChaCha stream
/// derived from `(seed, stratum index)`, and the prefix is kept. Output is
/// grouped by stratum in ascending order. Any stratum with fewer than
/// `per_stratum` members (including none) fails the whole draw.
pub fn sample_stratified<T>(
    corpus: &[T],
    per_stratum: usize,
    seed: u64,
) -> Result<Vec<T>, CorpusError>
where
    T: AsRef<CodeSnippet> + Clone,
{
    if per_stratum == 0 {
        return Err(CorpusError::InvalidSampleSize);
    }
    let mut seen = HashSet::new();
    let mut buckets: Vec<Vec<&T>> = vec![Vec::new(); Stratum::COUNT];
    for item in corpus {
        let snippet = item.as_ref();
        if !seen.insert(snippet.id()) {
            return Err(CorpusError::DuplicateId(snippet.id().to_string()));
        }
        let stratum = Stratum::for_nloc(snippet.nloc())?;
        buckets[stratum.index()].push(item);
    }

    let deficient: Vec<Deficiency> = Stratum::all()
        .filter(|s| buckets[s.index()].len() < per_stratum)
        .map(|s| Deficiency {
            stratum: s,
            available: buckets[s.index()].len(),
        })
        .collect();
    if !deficient.is_empty() {
        return Err(CorpusError::DeficientStrata {
            needed: per_stratum,
            deficient,
        });
    }

    let mut out = Vec::with_capacity(per_stratum * Stratum::COUNT);
    for (index, mut bucket) in buckets.into_iter().enumerate() {
        bucket.sort_by(|a, b| a.as_ref().id().cmp(b.as_ref().id()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        bucket.shuffle(&mut rng);
        out.extend(bucket.into_iter().take(per_stratum).cloned());
    }
    Ok(out)
}
