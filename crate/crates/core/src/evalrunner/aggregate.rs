use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EvalError, GenerationRecord};
use crate::corpus::Stratum;
use crate::metrics::names;
use crate::promptkit::PromptVariant;

/// How records are grouped by size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandScheme {
    /// `1-100`, `101-200`, `201-350`.
    Coarse3,
    /// One row per width-10 stratum.
    PerStratum,
}

impl BandScheme {
    const COARSE: [(&'static str, usize); 3] = [("1-100", 9), ("101-200", 19), ("201-350", 34)];

    fn band_of(self, stratum: Stratum) -> usize {
        match self {
            Self::PerStratum => stratum.index(),
            Self::Coarse3 => Self::COARSE
                .iter()
                .position(|&(_, last)| stratum.index() <= last)
                .expect("stratum index below 35"),
        }
    }

    fn label(self, band: usize) -> String {
        match self {
            Self::PerStratum => Stratum::new(band).expect("valid band").to_string(),
            Self::Coarse3 => Self::COARSE[band].0.to_string(),
        }
    }

    // Bands lying inside 101..=200 NLOC.
    fn of_interest(self, band: usize) -> bool {
        match self {
            Self::PerStratum => (10..=19).contains(&band),
            Self::Coarse3 => band == 1,
        }
    }
}

impl FromStr for BandScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coarse3" => Ok(Self::Coarse3),
            "per-stratum" => Ok(Self::PerStratum),
            other => Err(format!("unknown scheme {other:?} (expected coarse3 or per-stratum)")),
        }
    }
}

impl fmt::Display for BandScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Coarse3 => "coarse3",
            Self::PerStratum => "per-stratum",
        })
    }
}

/// Mean scores over the `n` successful records of one band and one
/// model/prompt configuration. `failures` counts records of the same group
/// that produced no score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandAggregate {
    pub band_label: String,
    pub n: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    pub scot: bool,
    /// Shot label, e.g. `few-shot`.
    pub prompt: String,
    pub model_id: String,
    pub failures: usize,
    pub range_of_interest: bool,
}

#[derive(Default)]
struct Acc {
    n: usize,
    p: f64,
    r: f64,
    f1: f64,
    failures: usize,
}

/// Greedy-embedding means by band.
pub fn aggregate_by_band(records: &[GenerationRecord], scheme: BandScheme) -> Result<Vec<BandAggregate>, EvalError> {
    aggregate_metric(records, scheme, names::GREEDY_EMBEDDING)
}

/// Pooled means of `metric` by band, grouped by model and prompt variant.
/// Groups are ordered by model id then variant; bands ascend. Bands with no
/// scored record are omitted, so their failures are not reported.
pub fn aggregate_metric(
    records: &[GenerationRecord],
    scheme: BandScheme,
    metric: &str,
) -> Result<Vec<BandAggregate>, EvalError> {
    if records.is_empty() {
        return Err(EvalError::NoRecords);
    }
    let rank = |v: PromptVariant| PromptVariant::NAMES.iter().position(|n| *n == v.name()).expect("named variant");
    let mut groups: BTreeMap<(&str, usize, usize), (PromptVariant, Acc)> = BTreeMap::new();
    for record in records {
        let key = (
            record.model_id.as_str(),
            rank(record.prompt_variant),
            scheme.band_of(record.stratum),
        );
        let (_, acc) = groups
            .entry(key)
            .or_insert_with(|| (record.prompt_variant, Acc::default()));
        match record.scores.get(metric).filter(|_| record.is_success()) {
            Some(s) => {
                acc.n += 1;
                acc.p += s.precision;
                acc.r += s.recall;
                acc.f1 += s.f1;
            }
            None => acc.failures += 1,
        }
    }

    let mut rows = Vec::with_capacity(groups.len());
    for ((model, _, band), (variant, acc)) in groups {
        if acc.n == 0 {
            log::warn!(
                "{model} {variant} band {}: {} failures and no scored records; row omitted",
                scheme.label(band),
                acc.failures
            );
            continue;
        }
        let n = acc.n as f64;
        rows.push(BandAggregate {
            band_label: scheme.label(band),
            n: acc.n,
            mean_precision: acc.p / n,
            mean_recall: acc.r / n,
            mean_f1: acc.f1 / n,
            scot: variant.scot,
            prompt: variant.shots(std::num::NonZeroUsize::MIN).label().to_string(),
            model_id: model.to_string(),
            failures: acc.failures,
            range_of_interest: scheme.of_interest(band),
        });
    }
    Ok(rows)
}
