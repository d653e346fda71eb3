//! Brute-force reference computations, kept independent of the library's
//! metric code paths.

#![allow(dead_code)]

/// All token sequences of length `0..=max_len` over `vocab` symbols
/// (`u8` ids), shortest first.
pub fn all_sentences(vocab: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for t in 0..vocab {
                let mut s2: Vec<u8> = s.clone();
                s2.push(t);
                next.push(s2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// BLEU from clipped counts, written out directly from the definition:
/// product of precisions, N-th root, times brevity penalty.
pub fn bleu_from_counts(
    matches: &[usize],
    cand_len: usize,
    ref_len: usize,
    smoothing: bool,
) -> f64 {
    if cand_len == 0 || ref_len == 0 {
        return 0.0;
    }
    let max_n = matches.len();
    let mut product = 1.0f64;
    for n in 1..=max_n {
        let total = cand_len.saturating_sub(n - 1);
        let p = if smoothing && n >= 2 {
            (matches[n - 1] as f64 + 1.0) / (total as f64 + 1.0)
        } else if total == 0 {
            0.0
        } else {
            matches[n - 1] as f64 / total as f64
        };
        product *= p;
    }
    if product == 0.0 {
        return 0.0;
    }
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    bp * product.powf(1.0 / max_n as f64)
}

/// Slow but obviously-correct clipped count for one order.
pub fn clipped_naive(cand: &[u8], refr: &[u8], n: usize) -> usize {
    if cand.len() < n {
        return 0;
    }
    let count = |s: &[u8], g: &[u8]| {
        if s.len() < n {
            0
        } else {
            (0..=s.len() - n).filter(|&j| &s[j..j + n] == g).count()
        }
    };
    let mut m = 0;
    for i in 0..=cand.len() - n {
        let g = &cand[i..i + n];
        if (0..i).any(|j| &cand[j..j + n] == g) {
            continue;
        }
        m += count(cand, g).min(count(refr, g));
    }
    m
}

/// [`bleu_from_counts`] evaluated over its whole domain for sentences of at
/// most `max_len` tokens.
pub struct BleuTable {
    base: usize,
    max_n: usize,
    values: Vec<f64>,
}

impl BleuTable {
    pub fn new(max_len: usize, max_n: usize) -> Self {
        let base = max_len + 1;
        let size = base.pow(max_n as u32 + 2) * 2;
        let mut values = vec![0.0; size];
        let mut m = vec![0usize; max_n];
        for (key, v) in values.iter_mut().enumerate() {
            let mut k = key / 2;
            let rl = k % base;
            k /= base;
            let cl = k % base;
            k /= base;
            for slot in m.iter_mut().rev() {
                *slot = k % base;
                k /= base;
            }
            *v = bleu_from_counts(&m, cl, rl, key % 2 == 1);
        }
        Self { base, max_n, values }
    }

    pub fn get(&self, matches: &[usize], cand_len: usize, ref_len: usize, smoothing: bool) -> f64 {
        debug_assert_eq!(matches.len(), self.max_n);
        let mut k = 0;
        for &x in matches {
            k = k * self.base + x;
        }
        k = (k * self.base + cand_len) * self.base + ref_len;
        self.values[k * 2 + usize::from(smoothing)]
    }
}

/// Every subsequence of every sentence, as a bitset over sentence ids. The
/// LCS of two sentences is the longest sentence present in both sets.
pub struct SubsequenceSets {
    words: usize,
    bits: Vec<u64>,
    lengths: Vec<usize>,
}

impl SubsequenceSets {
    /// `sentences` must be the output of [`all_sentences`] (length-sorted).
    pub fn new(sentences: &[Vec<u8>], vocab: u8) -> Self {
        let words = sentences.len().div_ceil(64);
        let index = |s: &[u8]| -> usize {
            // ids are assigned length-major, lexicographic within a length
            let mut base = 0;
            for l in 0..s.len() {
                base += (vocab as usize).pow(l as u32);
            }
            let mut code = 0;
            for &t in s {
                code = code * vocab as usize + t as usize;
            }
            base + code
        };
        let mut bits = vec![0u64; words * sentences.len()];
        for (id, s) in sentences.iter().enumerate() {
            assert_eq!(index(s), id);
            let row = &mut bits[id * words..(id + 1) * words];
            for mask in 0u32..(1 << s.len()) {
                let sub: Vec<u8> = (0..s.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| s[i])
                    .collect();
                let sid = index(&sub);
                row[sid / 64] |= 1 << (sid % 64);
            }
        }
        Self {
            words,
            bits,
            lengths: sentences.iter().map(Vec::len).collect(),
        }
    }

    /// All-pairs LCS, row-major. Each unordered pair is looked up once.
    pub fn lcs_table(&self) -> Vec<u8> {
        let n = self.lengths.len();
        const TILE: usize = 128;
        let mut out = vec![0u8; n * n];
        for ta in (0..n).step_by(TILE) {
            for tb in (ta..n).step_by(TILE) {
                for a in ta..(ta + TILE).min(n) {
                    for b in tb.max(a)..(tb + TILE).min(n) {
                        let l = self.lcs(a, b) as u8;
                        out[a * n + b] = l;
                        out[b * n + a] = l;
                    }
                }
            }
        }
        out
    }

    pub fn lcs(&self, a: usize, b: usize) -> usize {
        let ra = &self.bits[a * self.words..(a + 1) * self.words];
        let rb = &self.bits[b * self.words..(b + 1) * self.words];
        for w in (0..self.words).rev() {
            let both = ra[w] & rb[w];
            if both != 0 {
                let bit = 63 - both.leading_zeros() as usize;
                return self.lengths[w * 64 + bit];
            }
        }
        0
    }
}

/// LCS by trying every subsequence of `a` against `b`.
pub fn lcs_naive(a: &[u8], b: &[u8]) -> usize {
    let is_subseq = |sub: &[u8]| {
        let mut it = b.iter();
        sub.iter().all(|x| it.any(|y| y == x))
    };
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let sub: Vec<u8> = (0..a.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| a[i])
            .collect();
        if sub.len() > best && is_subseq(&sub) {
            best = sub.len();
        }
    }
    best
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Per-sentence gram count tables indexed by gram code, one block per order
/// (each padded to 16 bytes), laid out contiguously for every sentence.
pub struct DenseCounts {
    /// Order `n` occupies `offsets[n - 1]..offsets[n]` within a row.
    offsets: Vec<usize>,
    table: Vec<u8>,
}

impl DenseCounts {
    pub fn new(sentences: &[Vec<u8>], vocab: usize, max_n: usize) -> Self {
        let mut offsets = vec![0];
        for n in 1..=max_n {
            let last = *offsets.last().unwrap();
            offsets.push(last + vocab.pow(n as u32).next_multiple_of(16));
        }
        let stride = *offsets.last().unwrap();
        let mut table = vec![0u8; stride * sentences.len()];
        for (row, s) in table.chunks_mut(stride).zip(sentences) {
            for n in 1..=max_n.min(s.len()) {
                for g in s.windows(n) {
                    let code = g.iter().fold(0, |c, &t| c * vocab + t as usize);
                    row[offsets[n - 1] + code] += 1;
                }
            }
        }
        Self { offsets, table }
    }

    fn row(&self, i: usize) -> &[u8] {
        let stride = *self.offsets.last().unwrap();
        &self.table[i * stride..(i + 1) * stride]
    }

    /// Clipped matches per order: sum over gram codes of min(count_a, count_b).
    pub fn clipped(&self, a: usize, b: usize, out: &mut [usize]) {
        let (ra, rb) = (self.row(a), self.row(b));
        for (n, slot) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.offsets[n], self.offsets[n + 1]);
            // Sentence-scale counts never wrap a u8.
            *slot = ra[lo..hi]
                .iter()
                .zip(&rb[lo..hi])
                .fold(0u8, |acc, (x, y)| acc.wrapping_add(*x.min(y))) as usize;
        }
    }
}

/// Spreadsheet-style band means: for each band, list the member rows
/// explicitly, then divide column sums by the row count. Rows are
/// `(stratum index, precision, recall, f1)`; bands are inclusive stratum
/// index ranges. Empty bands yield `None`.
pub fn band_means(rows: &[(usize, f64, f64, f64)], bands: &[(usize, usize)]) -> Vec<Option<(usize, f64, f64, f64)>> {
    bands
        .iter()
        .map(|&(lo, hi)| {
            let members: Vec<_> = rows.iter().filter(|r| r.0 >= lo && r.0 <= hi).collect();
            if members.is_empty() {
                return None;
            }
            let k = members.len() as f64;
            let col = |f: fn(&&(usize, f64, f64, f64)) -> f64| members.iter().map(f).sum::<f64>() / k;
            Some((members.len(), col(|r| r.1), col(|r| r.2), col(|r| r.3)))
        })
        .collect()
}

/// Cohen's kappa from a full contingency table.
pub fn kappa_table(a: &[usize], b: &[usize], labels: usize) -> f64 {
    let n = a.len() as f64;
    let mut table = vec![vec![0.0; labels]; labels];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let po: f64 = (0..labels).map(|i| table[i][i]).sum::<f64>() / n;
    let pe: f64 = (0..labels)
        .map(|i| {
            let row: f64 = table[i].iter().sum();
            let col: f64 = table.iter().map(|r| r[i]).sum();
            row * col / (n * n)
        })
        .sum();
    if pe == 1.0 {
        1.0
    } else {
        (po - pe) / (1.0 - pe)
    }
}
