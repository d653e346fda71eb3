mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::oracles::{band_means, kappa_table};
use storyrev::corpus::Stratum;
use storyrev::evalrunner::{
    aggregate_by_band, cohen_kappa, AnnotationSet, BandAggregate, BandScheme, GenerationRecord,
};
use storyrev::metrics::{classify_fidelity, greedy_embedding_score, names, EmbeddingProvider, HashEmbedder, ScoreTriple};
use storyrev::promptkit::PromptVariant;

fn record(i: usize, stratum: usize, p: f64, r: f64, variant: &str, failed: bool) -> GenerationRecord {
    let triple = ScoreTriple::from_pr(p, r);
    GenerationRecord {
        snippet_id: format!("r{i}"),
        nloc: stratum * 10 + 1,
        stratum: Stratum::new(stratum).unwrap(),
        model_id: "llama-3.1-8b".into(),
        prompt_variant: variant.parse().unwrap(),
        scot: variant.ends_with("-scot"),
        prompt_fingerprint: "f".into(),
        candidate_story: "As a user, I want x.".into(),
        scores: if failed {
            BTreeMap::new()
        } else {
            BTreeMap::from([(names::GREEDY_EMBEDDING.to_string(), triple)])
        },
        band: (!failed).then(|| classify_fidelity(triple.f1).unwrap()),
        cost_usd: 0.0,
        flags: BTreeSet::new(),
        error: failed.then(|| "provider failed".to_string()),
    }
}

#[test]
fn thirty_records_match_spreadsheet() {
    // Deterministic spread over strata 0..35 with irregular scores.
    let rows: Vec<(usize, f64, f64)> = (0..30)
        .map(|i| ((i * 7) % 35, ((i * 37) % 100) as f64 / 100.0, ((i * 53 + 11) % 100) as f64 / 100.0))
        .collect();
    let records: Vec<_> = rows
        .iter()
        .enumerate()
        .map(|(i, &(s, p, r))| record(i, s, p, r, "few-shot", false))
        .collect();
    let oracle_rows: Vec<_> = rows
        .iter()
        .map(|&(s, p, r)| (s, p, r, if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 }))
        .collect();

    let coarse = aggregate_by_band(&records, BandScheme::Coarse3).unwrap();
    let expected = band_means(&oracle_rows, &[(0, 9), (10, 19), (20, 34)]);
    let expected: Vec<_> = expected.into_iter().flatten().collect();
    assert_eq!(coarse.len(), expected.len());
    for (a, e) in coarse.iter().zip(&expected) {
        assert_eq!(a.n, e.0);
        assert!((a.mean_precision - e.1).abs() <= 1e-12);
        assert!((a.mean_recall - e.2).abs() <= 1e-12);
        assert!((a.mean_f1 - e.3).abs() <= 1e-12);
    }

    let per = aggregate_by_band(&records, BandScheme::PerStratum).unwrap();
    let bands: Vec<_> = (0..35).map(|s| (s, s)).collect();
    let expected: Vec<_> = band_means(&oracle_rows, &bands).into_iter().flatten().collect();
    assert_eq!(per.len(), expected.len());
    for (a, e) in per.iter().zip(&expected) {
        assert_eq!(a.n, e.0);
        assert!((a.mean_f1 - e.3).abs() <= 1e-12);
    }
}

#[test]
fn trivial_means() {
    let same: Vec<_> = (0..4).map(|i| record(i, 3, 0.8, 0.8, "zero-shot", false)).collect();
    let a = aggregate_by_band(&same, BandScheme::PerStratum).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(a[0].n, 4);
    assert!((a[0].mean_f1 - 0.8).abs() < 1e-15);

    let two = vec![record(0, 1, 0.6, 0.6, "zero-shot", false), record(1, 8, 1.0, 1.0, "zero-shot", false)];
    let a = aggregate_by_band(&two, BandScheme::Coarse3).unwrap();
    assert_eq!((a.len(), a[0].band_label.as_str()), (1, "1-100"));
    assert!((a[0].mean_f1 - 0.8).abs() < 1e-15);
}

fn check_consistency(records: &[GenerationRecord]) -> Result<(), TestCaseError> {
    let coarse = aggregate_by_band(records, BandScheme::Coarse3).unwrap();
    let per = aggregate_by_band(records, BandScheme::PerStratum).unwrap();
    let scored = records.iter().filter(|r| r.error.is_none()).count();
    prop_assert_eq!(coarse.iter().map(|a| a.n).sum::<usize>(), scored);
    prop_assert_eq!(per.iter().map(|a| a.n).sum::<usize>(), scored);

    let coarse_of = |label: &str| match label.split('-').next().unwrap().parse::<usize>().unwrap() {
        1..=100 => "1-100",
        101..=200 => "101-200",
        _ => "201-350",
    };
    let key = |a: &BandAggregate| (a.model_id.clone(), a.prompt.clone(), a.scot);
    for c in &coarse {
        let members: Vec<_> = per
            .iter()
            .filter(|p| key(p) == key(c) && coarse_of(&p.band_label) == c.band_label)
            .collect();
        let n: usize = members.iter().map(|p| p.n).sum();
        prop_assert_eq!(n, c.n);
        let weighted = |f: fn(&BandAggregate) -> f64| members.iter().map(|p| p.n as f64 * f(p)).sum::<f64>() / n as f64;
        prop_assert!((weighted(|a| a.mean_precision) - c.mean_precision).abs() <= 1e-12);
        prop_assert!((weighted(|a| a.mean_recall) - c.mean_recall).abs() <= 1e-12);
        prop_assert!((weighted(|a| a.mean_f1) - c.mean_f1).abs() <= 1e-12);
        prop_assert_eq!(c.range_of_interest, c.band_label == "101-200");
    }
    for p in &per {
        let lower: usize = p.band_label.split('-').next().unwrap().parse().unwrap();
        prop_assert_eq!(p.range_of_interest, (101..=191).contains(&lower));
    }
    Ok(())
}

proptest! {
    #[test]
    fn coarse_is_weighted_per_stratum(
        rows in prop::collection::vec((0usize..35, 0.0f64..=1.0, 0.0f64..=1.0, 0usize..6, prop::bool::weighted(0.1)), 1..120)
    ) {
        let records: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, &(s, p, r, v, failed))| record(i, s, p, r, PromptVariant::NAMES[v], failed))
            .collect();
        if records.iter().all(|r| r.error.is_some()) {
            return Ok(());
        }
        check_consistency(&records)?;
    }

    #[test]
    fn kappa_symmetric_and_relabel_invariant(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let names = ["w", "x", "y", "z"];
        let build = |f: &dyn Fn(usize) -> String| {
            AnnotationSet::new(
                (0..pairs.len()).map(|i| i.to_string()).collect(),
                pairs.iter().map(|p| f(p.0)).collect(),
                pairs.iter().map(|p| f(p.1)).collect(),
                (0..4).map(f).collect(),
            ).unwrap()
        };
        let set = build(&|l| names[l].to_string());
        let renamed = build(&|l| format!("label-{}", perm[l]));
        let k = cohen_kappa(&set).unwrap();
        prop_assert!((-1.0..=1.0).contains(&k));
        prop_assert!((k - cohen_kappa(&set.swapped()).unwrap()).abs() <= 1e-12);
        prop_assert!((k - cohen_kappa(&renamed).unwrap()).abs() <= 1e-12);
        let a: Vec<_> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<_> = pairs.iter().map(|p| p.1).collect();
        prop_assert!((k - kappa_table(&a, &b, 4)).abs() <= 1e-12);
    }

    #[test]
    fn greedy_swap_symmetry(a in "[a-e]{1,3}( [a-e]{1,3}){0,8}", b in "[a-e]{1,3}( [a-e]{1,3}){0,8}") {
        let e = HashEmbedder::default();
        let (ea, eb) = (e.embed(&a).unwrap(), e.embed(&b).unwrap());
        let ab = greedy_embedding_score(&ea, &eb).unwrap();
        let ba = greedy_embedding_score(&eb, &ea).unwrap();
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
        prop_assert!((ab.f1 - ba.f1).abs() <= 1e-15);
    }
}
