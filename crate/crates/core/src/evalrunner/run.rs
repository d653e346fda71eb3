use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::{DatasetRecord, Stratum};
use crate::llmgate::{CompletionProvider, GateError, Gateway, GenerationConfig, ModelSpec, TokenSource};
use crate::metrics::{
    bleu, classify_fidelity, greedy_embedding_score, names, rouge_l, tokenize, EmbeddingProvider, FidelityBand,
    MetricError, ScoreTriple,
};
use crate::promptkit::{select_exemplars, Exemplar, PromptConfig, PromptKit, PromptVariant};
use crate::story::scoring_text;

/// Audit markers attached to a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordFlag {
    /// No story parsed; the raw completion was scored.
    StoryFallback,
    MultipleStories,
    EmptyCandidate,
    BelowMinOutput,
    EstimatedTokens,
}

/// One scored generation. `band` is `None` exactly when `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub snippet_id: String,
    pub nloc: usize,
    pub stratum: Stratum,
    pub model_id: String,
    pub prompt_variant: PromptVariant,
    pub scot: bool,
    pub prompt_fingerprint: String,
    pub candidate_story: String,
    pub scores: BTreeMap<String, ScoreTriple>,
    pub band: Option<FidelityBand>,
    /// Nominal price, whether or not the call was served from cache.
    pub cost_usd: f64,
    pub flags: BTreeSet<RecordFlag>,
    pub error: Option<String>,
}

impl GenerationRecord {
    pub fn is_success(&self) -> bool {
        self.error.is_none()
    }
}

/// Everything a run needs besides the dataset and configuration.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    pub gateway: &'a Gateway,
    pub completion: &'a dyn CompletionProvider,
    pub embedder: &'a dyn EmbeddingProvider,
    pub kit: &'a PromptKit,
    pub exemplar_pool: &'a [Exemplar],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// In dataset order.
    pub records: Vec<GenerationRecord>,
    pub provider_calls: usize,
    pub cache_hits: usize,
    /// Money actually charged; cache hits are free.
    pub spent_usd: f64,
}

const BLEU_MAX_N: usize = 4;

/// All metric variants for one candidate/reference pair. An empty
/// candidate scores zero everywhere.
pub fn score_pair(
    candidate: &str,
    reference: &str,
    embedder: &dyn EmbeddingProvider,
) -> Result<BTreeMap<String, ScoreTriple>, MetricError> {
    let (cand, refr) = (tokenize(candidate), tokenize(reference));
    if refr.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let metrics = [
        names::GREEDY_EMBEDDING,
        names::BLEU,
        names::BLEU_SMOOTHED,
        names::ROUGE_L,
        names::ROUGE_L_NOSTEM,
    ];
    if cand.is_empty() {
        return Ok(metrics.iter().map(|m| (m.to_string(), ScoreTriple::zero())).collect());
    }
    let greedy = greedy_embedding_score(&embedder.embed(candidate)?, &embedder.embed(reference)?)?;
    Ok(BTreeMap::from([
        (names::GREEDY_EMBEDDING.to_string(), greedy),
        (names::BLEU.to_string(), ScoreTriple::uniform(bleu(&cand, &refr, BLEU_MAX_N, false)?)),
        (names::BLEU_SMOOTHED.to_string(), ScoreTriple::uniform(bleu(&cand, &refr, BLEU_MAX_N, true)?)),
        (names::ROUGE_L.to_string(), rouge_l(&cand, &refr, true)),
        (names::ROUGE_L_NOSTEM.to_string(), rouge_l(&cand, &refr, false)),
    ]))
}

enum Outcome {
    Done { record: GenerationRecord, charged: f64, cached: bool },
    OverBudget(GateError),
}

struct Job<'a> {
    ctx: RunContext<'a>,
    model: &'a ModelSpec,
    prompt_config: &'a PromptConfig,
    gen_config: &'a GenerationConfig,
    exemplars: &'a [Exemplar],
    fingerprint: String,
}

impl Job<'_> {
    fn process(&self, entry: &DatasetRecord) -> Outcome {
        let snippet = &entry.snippet;
        let variant = self.prompt_config.variant();
        let mut record = GenerationRecord {
            snippet_id: snippet.id().to_string(),
            nloc: snippet.nloc(),
            stratum: snippet.stratum(),
            model_id: self.model.model_id.clone(),
            prompt_variant: variant,
            scot: variant.scot,
            prompt_fingerprint: self.fingerprint.clone(),
            candidate_story: String::new(),
            scores: BTreeMap::new(),
            band: None,
            cost_usd: 0.0,
            flags: BTreeSet::new(),
            error: None,
        };
        let fail = |mut record: GenerationRecord, err: String| {
            log::warn!("{}: {err}", record.snippet_id);
            record.error = Some(err);
            Outcome::Done { record, charged: 0.0, cached: false }
        };

        let prompt = match self.ctx.kit.render(self.prompt_config, snippet, self.exemplars) {
            Ok(p) => p,
            Err(e) => return fail(record, e.to_string()),
        };
        let completion =
            match self.ctx.gateway.complete(&prompt.text, self.model, self.gen_config, self.ctx.completion) {
                Ok(c) => c,
                Err(e @ GateError::BudgetExceeded { .. }) => return Outcome::OverBudget(e),
                Err(e) => return fail(record, e.to_string()),
            };
        record.cost_usd = completion.cost_usd;
        let charged = if completion.cached { 0.0 } else { completion.cost_usd };
        if completion.below_min_output {
            record.flags.insert(RecordFlag::BelowMinOutput);
        }
        if completion.token_source == TokenSource::Estimated {
            record.flags.insert(RecordFlag::EstimatedTokens);
        }

        let candidate = scoring_text(&completion.text);
        if candidate.fallback {
            record.flags.insert(RecordFlag::StoryFallback);
        }
        if candidate.story_count > 1 {
            record.flags.insert(RecordFlag::MultipleStories);
        }
        if candidate.text.trim().is_empty() {
            record.flags.insert(RecordFlag::EmptyCandidate);
        }
        let reference = scoring_text(&entry.reference_story).text;
        record.candidate_story = candidate.text;

        let scored = score_pair(&record.candidate_story, &reference, self.ctx.embedder).and_then(|scores| {
            let band = classify_fidelity(scores[names::GREEDY_EMBEDDING].f1)?;
            Ok((scores, band))
        });
        match scored {
            Ok((scores, band)) => {
                record.scores = scores;
                record.band = Some(band);
                Outcome::Done { record, charged, cached: completion.cached }
            }
            Err(e) => {
                record.error = Some(format!("scoring failed: {e}"));
                Outcome::Done { record, charged, cached: completion.cached }
            }
        }
    }
}

struct Sink {
    out: Option<(std::path::PathBuf, BufWriter<File>)>,
}

impl Sink {
    fn write(&mut self, record: &GenerationRecord) -> Result<(), EvalError> {
        if let Some((path, out)) = &mut self.out {
            let line = serde_json::to_string(record).expect("record serializes");
            writeln!(out, "{line}")
                .and_then(|_| out.flush())
                .map_err(EvalError::io(path.clone()))?;
        }
        Ok(())
    }
}

/// Generates and scores one record per dataset entry, fanning out up to the
/// gateway's concurrency width. Entry-level failures are recorded, not
/// raised. When `results_path` is given, records are appended there in
/// dataset order as they complete, so the file is always a valid prefix.
pub fn run_experiment(
    dataset: &[DatasetRecord],
    model: &ModelSpec,
    prompt_config: &PromptConfig,
    gen_config: &GenerationConfig,
    ctx: RunContext<'_>,
    results_path: Option<&Path>,
) -> Result<RunOutcome, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    prompt_config.validate()?;
    ctx.kit.supports(prompt_config)?;
    gen_config.validate()?;
    model.validate()?;
    let exemplars = select_exemplars(ctx.exemplar_pool, prompt_config.shots)?;
    let job = Job {
        ctx,
        model,
        prompt_config,
        gen_config,
        exemplars,
        fingerprint: ctx.kit.fingerprint(prompt_config),
    };

    let mut sink = Sink { out: None };
    if let Some(path) = results_path {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(EvalError::io(parent))?;
        }
        let file = File::create(path).map_err(EvalError::io(path))?;
        sink.out = Some((path.to_path_buf(), BufWriter::new(file)));
    }

    let calls_before = ctx.gateway.provider_calls();
    let hits_before = ctx.gateway.cache_hits();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let workers = ctx.gateway.concurrency().get().min(dataset.len());

    let mut pending: BTreeMap<usize, GenerationRecord> = BTreeMap::new();
    let mut written = 0;
    let mut records = Vec::with_capacity(dataset.len());
    let mut spent = 0.0;
    let mut overrun: Option<GateError> = None;
    let mut sink_error = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers {
            let tx = tx.clone();
            let (job, next, abort) = (&job, &next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(entry) = dataset.get(i) else { break };
                if tx.send((i, job.process(entry))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        for (i, outcome) in rx {
            match outcome {
                Outcome::Done { record, charged, cached } => {
                    log::debug!("{} done (cached: {cached})", record.snippet_id);
                    spent += charged;
                    pending.insert(i, record);
                }
                Outcome::OverBudget(e) => {
                    abort.store(true, Ordering::SeqCst);
                    overrun.get_or_insert(e);
                }
            }
            while let Some(record) = pending.remove(&written) {
                if sink_error.is_none() {
                    sink_error = sink.write(&record).err();
                }
                records.push(record);
                written += 1;
            }
        }
    });
    // Only an aborted run leaves gaps; keep what finished, in order.
    for (_, record) in std::mem::take(&mut pending) {
        if sink_error.is_none() {
            sink_error = sink.write(&record).err();
        }
        records.push(record);
    }
    if let Some(e) = sink_error {
        return Err(e);
    }

    let outcome = RunOutcome {
        records,
        provider_calls: ctx.gateway.provider_calls() - calls_before,
        cache_hits: ctx.gateway.cache_hits() - hits_before,
        spent_usd: spent,
    };
    match overrun {
        None => Ok(outcome),
        Some(GateError::BudgetExceeded { spent_usd, budget_usd }) => Err(EvalError::BudgetExceeded {
            partial: Box::new(outcome),
            total: dataset.len(),
            spent_usd,
            budget_usd,
        }),
        Some(other) => Err(other.into()),
    }
}

pub fn write_results<W: Write>(mut writer: W, records: &[GenerationRecord]) -> std::io::Result<()> {
    for record in records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(writer, "{line}")?;
    }
    writer.flush()
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<GenerationRecord>, EvalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(EvalError::io(path))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(EvalError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| EvalError::Malformed {
            what: "results record",
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CodeSnippet;
    use crate::llmgate::mock::{EchoReferenceProvider, FixedProvider, ScriptedProvider};
    use crate::llmgate::{roster_model, CostLedger, ProviderError, ResponseCache, RetryPolicy};
    use crate::metrics::{HashEmbedder, OneHotEmbedder};
    use crate::promptkit::{default_exemplars, Shots};

    fn dataset(n: usize) -> Vec<DatasetRecord> {
        (0..n)
            .map(|i| {
                let code = format!("int f{i}(int x) {{\n  return x + {i};\n}}\n");
                let snippet = CodeSnippet::new(format!("s{i}"), &code, "cpp").unwrap();
                DatasetRecord::new(
                    snippet,
                    format!("As a developer, I want to add {i} to a value so that offsets apply."),
                )
                .unwrap()
            })
            .collect()
    }

    fn run(
        data: &[DatasetRecord],
        provider: &dyn CompletionProvider,
        embedder: &dyn EmbeddingProvider,
        gateway: &Gateway,
        path: Option<&Path>,
    ) -> Result<RunOutcome, EvalError> {
        let kit = PromptKit::default();
        let pool = default_exemplars();
        let ctx = RunContext {
            gateway,
            completion: provider,
            embedder,
            kit: &kit,
            exemplar_pool: &pool,
        };
        run_experiment(
            data,
            &roster_model("llama-3.1-8b").unwrap(),
            &PromptConfig::new(Shots::One, true),
            &GenerationConfig::default(),
            ctx,
            path,
        )
    }

    #[test]
    fn echo_provider_is_faithful() {
        let data = dataset(3);
        let echo = EchoReferenceProvider::new(
            data.iter().map(|r| (r.snippet.source_text().to_string(), r.reference_story.clone())),
        );
        let gw = Gateway::new(CostLedger::in_memory());
        let out = run(&data, &echo, &HashEmbedder::default(), &gw, None).unwrap();
        assert_eq!(out.records.len(), 3);
        for (r, d) in out.records.iter().zip(&data) {
            assert_eq!(r.snippet_id, d.snippet.id());
            assert_eq!(r.band, Some(FidelityBand::Faithful));
            assert!((r.scores[names::GREEDY_EMBEDDING].f1 - 1.0).abs() < 1e-12);
            assert_eq!(r.scores[names::ROUGE_L].f1, 1.0);
        }
    }

    #[test]
    fn unrelated_text_is_divergent() {
        let data = dataset(3);
        let p = FixedProvider::new("zqxv wmpl krtz");
        let gw = Gateway::new(CostLedger::in_memory());
        let out = run(&data, &p, &OneHotEmbedder::default(), &gw, None).unwrap();
        for r in &out.records {
            assert_eq!(r.band, Some(FidelityBand::Divergent));
            assert!(r.flags.contains(&RecordFlag::StoryFallback));
        }
    }

    #[test]
    fn failures_are_recorded_per_entry() {
        let data = dataset(2);
        let p = ScriptedProvider::new(vec![Err(ProviderError::Rejected {
            status: 400,
            message: "nope".into(),
        })]);
        let gw = Gateway::new(CostLedger::in_memory()).with_retry(RetryPolicy::immediate(0));
        let out = run(&data, &p, &HashEmbedder::default(), &gw, None).unwrap();
        assert_eq!(out.records.len(), 2);
        assert!(out.records.iter().all(|r| r.error.is_some() && r.band.is_none()));
    }

    #[test]
    fn warm_cache_rerun_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let data = dataset(4);
        let p = FixedProvider::new("As a user, I want to add numbers so that totals are right.");
        let gw = Gateway::new(CostLedger::in_memory()).with_cache(ResponseCache::open(dir.path().join("c")).unwrap());
        let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        let cold = run(&data, &p, &HashEmbedder::default(), &gw, Some(&a)).unwrap();
        let warm = run(&data, &p, &HashEmbedder::default(), &gw, Some(&b)).unwrap();
        assert_eq!(cold.provider_calls, 4);
        assert_eq!(warm.provider_calls, 0);
        assert_eq!(warm.cache_hits, 4);
        assert_eq!(warm.spent_usd, 0.0);
        assert_eq!(cold.records, warm.records);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(read_results(&a).unwrap(), cold.records);
    }

    #[test]
    fn budget_abort_keeps_partial_results() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let data = dataset(5);
        let p = FixedProvider::new("As a user, I want x.");
        let gw = Gateway::new(CostLedger::in_memory()).with_budget(1e-9).unwrap();
        let err = run(&data, &p, &HashEmbedder::default(), &gw, Some(&path)).unwrap_err();
        let EvalError::BudgetExceeded { partial, total, .. } = err else {
            panic!("expected budget error, got {err}");
        };
        assert_eq!(total, 5);
        assert!(partial.records.len() < 5);
        assert_eq!(read_results(&path).unwrap(), partial.records);
        assert_eq!(partial.records.len(), 1);
        assert_eq!(partial.spent_usd, gw.spent_usd());
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let gw = Gateway::new(CostLedger::in_memory());
        let p = FixedProvider::new("x");
        assert!(matches!(
            run(&[], &p, &HashEmbedder::default(), &gw, None),
            Err(EvalError::EmptyDataset)
        ));
    }
}
