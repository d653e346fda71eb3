//! Command-line front end.

mod manifest;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use manifest::{EmbedderKind, ProviderKind, RunManifest};

use crate::corpus::{self, CorpusError, Stratum};
use crate::evalrunner::{
    self, aggregate_by_band, calibration_experiment, cohen_kappa, AnnotationSet, BandScheme, CalibrationMetric,
    EvalError, ReportFormat, RunContext,
};
use crate::llmgate::mock::{EchoReferenceProvider, FixedProvider};
use crate::llmgate::{CompletionProvider, CostLedger, GateError, Gateway, HttpProvider, ResponseCache};
use crate::metrics::{EmbeddingProvider, HashEmbedder, OneHotEmbedder};
use crate::promptkit::{default_exemplars, load_exemplars, PromptKit, PromptVariant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_PROVIDER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Data(_) => EXIT_DATA,
            Self::Provider(_) => EXIT_PROVIDER,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<GateError> for CliError {
    fn from(e: GateError) -> Self {
        match e {
            GateError::InvalidConfig(_) => Self::Usage(e.to_string()),
            GateError::Cache { .. } | GateError::Ledger { .. } => Self::Data(e.to_string()),
            _ => Self::Provider(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Prompt(_) => Self::Usage(e.to_string()),
            EvalError::Gate(g) => g.into(),
            EvalError::BudgetExceeded { .. } => Self::Provider(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "storyrev", version, about = "Generate user stories from code with LLMs and score them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// NLOC histogram of the source files under a directory.
    Profile {
        dir: PathBuf,
        /// Also write per-file `path,nloc,stratum` rows here.
        #[arg(long)]
        files: Option<PathBuf>,
    },
    /// Draw the same number of snippets from every stratum.
    Sample {
        /// Dataset JSONL to draw from.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        per_stratum: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate and score stories as described by a manifest.
    Generate {
        #[arg(long)]
        manifest: PathBuf,
        /// Run all six prompt variants, one output subdirectory each.
        #[arg(long)]
        grid: bool,
    },
    /// Aggregate a results file by NLOC band.
    Evaluate {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "coarse3")]
        scheme: BandScheme,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean metric scores per calibration category.
    Calibrate {
        /// Defaults to the built-in fixture.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cohen's kappa between two annotators.
    Kappa {
        /// JSONL rows with `item`, `a` and `b`.
        #[arg(long)]
        labels: PathBuf,
        /// Comma-separated; defaults to the labels that occur.
        #[arg(long, value_delimiter = ',')]
        label_set: Option<Vec<String>>,
    },
    /// Re-emit an aggregate report, optionally as paired SCoT columns.
    Report {
        /// Aggregate report in JSON, as written by `evaluate`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        #[arg(long)]
        scot_pairs: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs one command line (including the program name) and returns the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Profile { dir, files } => profile(&dir, files.as_deref()),
        Command::Sample {
            corpus,
            per_stratum,
            seed,
            out,
        } => {
            let records = corpus::load_dataset(&corpus)?;
            let sample = corpus::sample_stratified(&records, per_stratum, seed)?;
            create_parent(&out)?;
            corpus::save_dataset(&out, &sample)?;
            eprintln!("sampled {} snippets into {}", sample.len(), out.display());
            Ok(())
        }
        Command::Generate { manifest, grid } => generate(&manifest, grid),
        Command::Evaluate {
            results,
            scheme,
            format,
            out,
        } => {
            let records = evalrunner::read_results(&results)?;
            let aggregates = aggregate_by_band(&records, scheme)?;
            emit(out.as_deref(), |w| evalrunner::write_report(w, &aggregates, format))
        }
        Command::Calibrate { pairs, out } => {
            let pairs = match pairs {
                Some(path) => evalrunner::load_calibration_pairs(path)?,
                None => evalrunner::default_calibration_pairs(),
            };
            let (hash, onehot) = (HashEmbedder::default(), OneHotEmbedder::default());
            let table = calibration_experiment(&pairs, &CalibrationMetric::ALL, &[&hash, &onehot])?;
            emit(out.as_deref(), |w| table.write_csv(w).map_err(std::io::Error::other))
        }
        Command::Kappa { labels, label_set } => {
            let set = read_annotations(&labels, label_set)?;
            println!("{:.3}", cohen_kappa(&set)?);
            Ok(())
        }
        Command::Report {
            input,
            format,
            scot_pairs,
            out,
        } => {
            let aggregates = evalrunner::read_report(&input, ReportFormat::Json)?;
            if scot_pairs {
                let pairs = evalrunner::scot_comparison(&aggregates);
                emit(out.as_deref(), |w| evalrunner::write_scot_comparison(w, &pairs))
            } else {
                emit(out.as_deref(), |w| evalrunner::write_report(w, &aggregates, format))
            }
        }
    }
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(parent) => std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("{}: {e}", parent.display()))),
        None => Ok(()),
    }
}

// Writes to `out`, or stdout when absent.
fn emit<F>(out: Option<&Path>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let fail = |what: String, e: std::io::Error| CliError::Data(format!("{what}: {e}"));
    match out {
        Some(path) => {
            create_parent(path)?;
            let mut file = std::fs::File::create(path).map_err(|e| fail(path.display().to_string(), e))?;
            write(&mut file).map_err(|e| fail(path.display().to_string(), e))
        }
        None => write(&mut std::io::stdout().lock()).map_err(|e| fail("stdout".into(), e)),
    }
}

fn profile(dir: &Path, files: Option<&Path>) -> Result<(), CliError> {
    let profile = corpus::profile_dir(dir)?;
    for (path, reason) in &profile.skipped {
        log::warn!("skipped {}: {reason}", path.display());
    }
    if let Some(path) = files {
        emit(Some(path), |w| {
            corpus::write_profile_csv(w, &profile).map_err(std::io::Error::other)
        })?;
    }
    let mut counts = [0usize; Stratum::COUNT];
    let mut oversized = 0;
    for entry in &profile.entries {
        match entry.stratum {
            Some(s) => counts[s.index()] += 1,
            None => oversized += 1,
        }
    }
    emit(None, |w| {
        writeln!(w, "stratum,files")?;
        for s in Stratum::all() {
            writeln!(w, "{s},{}", counts[s.index()])?;
        }
        writeln!(w, ">{},{oversized}", Stratum::MAX_NLOC)
    })
}

fn read_annotations(path: &Path, label_set: Option<Vec<String>>) -> Result<AnnotationSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let label = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(_) | serde_json::Value::Bool(_) => Some(v.to_string()),
        _ => None,
    };
    let (mut ids, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |m: &str| CliError::Data(format!("{}:{}: {m}", path.display(), i + 1));
        let row: serde_json::Value = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
        let field = |k: &str| row.get(k).and_then(label).ok_or_else(|| bad(&format!("missing or invalid `{k}`")));
        ids.push(field("item")?);
        a.push(field("a")?);
        b.push(field("b")?);
    }
    let set = match label_set {
        Some(labels) => AnnotationSet::new(ids, a, b, labels.into_iter().collect::<BTreeSet<_>>()),
        None => AnnotationSet::inferred(ids, a, b),
    };
    Ok(set?)
}

fn generate(manifest_path: &Path, grid: bool) -> Result<(), CliError> {
    let manifest = RunManifest::load(manifest_path)?;
    let variants: Vec<PromptVariant> = if grid {
        PromptVariant::all().collect()
    } else {
        vec![manifest.variant()?]
    };
    let configs = variants
        .iter()
        .map(|&v| manifest.prompt_config(v).map(|c| (v, c)))
        .collect::<Result<Vec<_>, _>>()?;
    let model = manifest.model()?;
    let gen_config = manifest.generation_config()?;
    let dataset = corpus::load_dataset(&manifest.dataset)?;
    let pool = match &manifest.exemplars {
        Some(path) => load_exemplars(path).map_err(|e| CliError::Data(e.to_string()))?,
        None => default_exemplars(),
    };

    let provider: Box<dyn CompletionProvider> = match manifest.provider {
        ProviderKind::Http => {
            let url = manifest
                .base_url
                .as_deref()
                .ok_or_else(|| CliError::Usage("provider = \"http\" needs base_url".into()))?;
            match &manifest.api_key_env {
                Some(var) => Box::new(HttpProvider::from_env(url, var)?),
                None => Box::new(HttpProvider::new(url, None)?),
            }
        }
        ProviderKind::Echo => Box::new(EchoReferenceProvider::new(
            dataset
                .iter()
                .map(|r| (r.snippet.source_text().to_string(), r.reference_story.clone())),
        )),
        ProviderKind::Fixed => Box::new(FixedProvider::new(manifest.fixed_text.clone().ok_or_else(|| {
            CliError::Usage("provider = \"fixed\" needs fixed_text".into())
        })?)),
    };
    let embedder: Box<dyn EmbeddingProvider> = match manifest.embedder {
        EmbedderKind::Hash => Box::new(HashEmbedder::default()),
        EmbedderKind::Onehot => Box::new(OneHotEmbedder::default()),
    };

    let out = &manifest.output_dir;
    std::fs::create_dir_all(out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    let mut gateway = Gateway::new(CostLedger::open(out.join("ledger.csv"))?)
        .with_cache(ResponseCache::open(out.join("cache"))?)
        .with_retry(manifest.retry())
        .with_concurrency(manifest.concurrency()?);
    if let Some(budget) = manifest.budget_usd {
        gateway = gateway.with_budget(budget)?;
    }
    let kit = PromptKit::default();
    let ctx = RunContext {
        gateway: &gateway,
        completion: provider.as_ref(),
        embedder: embedder.as_ref(),
        kit: &kit,
        exemplar_pool: &pool,
    };

    for (variant, config) in configs {
        let results = if grid {
            out.join(variant.name()).join("results.jsonl")
        } else {
            out.join("results.jsonl")
        };
        let outcome = evalrunner::run_experiment(&dataset, &model, &config, &gen_config, ctx, Some(&results))?;
        let failures = outcome.records.iter().filter(|r| !r.is_success()).count();
        eprintln!(
            "{variant}: {} records ({failures} failed), {} provider calls, {} cache hits, ${:.4} spent -> {}",
            outcome.records.len(),
            outcome.provider_calls,
            outcome.cache_hits,
            outcome.spent_usd,
            results.display()
        );
    }
    Ok(())
}
