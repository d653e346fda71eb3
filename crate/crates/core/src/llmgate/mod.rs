//! Cached, budgeted, retrying access to completion providers.

mod cache;
mod config;
mod http;
mod ledger;
pub mod mock;
mod provider;

use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{cache_key, CacheEntry, ResponseCache};
pub use config::{estimate_cost, roster_model, GenerationConfig, ModelSpec, ROSTER};
pub use http::HttpProvider;
pub use ledger::{read_ledger, CostLedger, LedgerEntry, LEDGER_HEADER};
pub use provider::{CompletionProvider, ProviderError, ProviderRequest, ProviderResponse};

#[derive(Debug, Error)]
pub enum GateError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("provider still failing after {retries} retries: {last}")]
    TransientExhausted { retries: u32, last: String },
    #[error("provider rejected request (status {status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("budget exhausted: spent ${spent_usd:.4} of ${budget_usd:.4}")]
    BudgetExceeded { spent_usd: f64, budget_usd: f64 },
    #[error("cache {path}: {source}")]
    Cache {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("ledger {path}: {source}")]
    Ledger {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl GateError {
    fn cache(path: &Path, source: std::io::Error) -> Self {
        Self::Cache {
            path: path.to_path_buf(),
            source,
        }
    }

    fn ledger(path: &Path, source: std::io::Error) -> Self {
        Self::Ledger {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Where token counts came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenSource {
    Provider,
    /// `ceil(chars / 4)` because the provider omitted usage.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
    /// Nominal price of the completion, charged or not.
    pub cost_usd: f64,
    pub cached: bool,
    pub retries: u32,
    pub token_source: TokenSource,
    /// Output shorter than the requested minimum.
    pub below_min_output: bool,
}

/// Exponential backoff: `base * 2^attempt`, plus up to half that again as jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_secs(1),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    /// Same retry count, no waiting.
    pub fn immediate(max_retries: u32) -> Self {
        Self {
            max_retries,
            base_delay: Duration::ZERO,
            jitter: false,
        }
    }

    pub fn delay(&self, attempt: u32) -> Duration {
        let backoff = self.base_delay.saturating_mul(1u32 << attempt.min(16));
        if !self.jitter || backoff.is_zero() {
            return backoff;
        }
        let extra = rand::thread_rng().gen_range(0.0..=0.5);
        backoff + backoff.mul_f64(extra)
    }
}

// Counting semaphore over in-flight provider calls.
#[derive(Debug)]
struct Slots {
    free: Mutex<usize>,
    released: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock poisoned");
        while *free == 0 {
            free = self.released.wait(free).expect("slot lock poisoned");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock poisoned") += 1;
        self.0.released.notify_one();
    }
}

/// Shared front door for all completions. `Sync`; call from many threads.
#[derive(Debug)]
pub struct Gateway {
    cache: Option<ResponseCache>,
    ledger: Mutex<CostLedger>,
    retry: RetryPolicy,
    budget_usd: Option<f64>,
    width: NonZeroUsize,
    slots: Slots,
    provider_calls: AtomicUsize,
    cache_hits: AtomicUsize,
}

impl Gateway {
    pub fn new(ledger: CostLedger) -> Self {
        Self {
            cache: None,
            ledger: Mutex::new(ledger),
            retry: RetryPolicy::default(),
            budget_usd: None,
            width: NonZeroUsize::MIN,
            slots: Slots {
                free: Mutex::new(1),
                released: Condvar::new(),
            },
            provider_calls: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_budget(mut self, budget_usd: f64) -> Result<Self, GateError> {
        if !(budget_usd.is_finite() && budget_usd >= 0.0) {
            return Err(GateError::InvalidConfig(format!("budget {budget_usd} must be >= 0")));
        }
        self.budget_usd = Some(budget_usd);
        Ok(self)
    }

    /// Maximum provider calls in flight at once.
    pub fn with_concurrency(mut self, width: NonZeroUsize) -> Self {
        self.width = width;
        self.slots = Slots {
            free: Mutex::new(width.get()),
            released: Condvar::new(),
        };
        self
    }

    pub fn concurrency(&self) -> NonZeroUsize {
        self.width
    }

    /// Provider attempts made, retries included.
    pub fn provider_calls(&self) -> usize {
        self.provider_calls.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits.load(Ordering::SeqCst)
    }

    pub fn spent_usd(&self) -> f64 {
        self.ledger.lock().expect("ledger lock poisoned").total_usd()
    }

    pub fn ledger_entries(&self) -> Vec<LedgerEntry> {
        self.ledger.lock().expect("ledger lock poisoned").entries().to_vec()
    }

    fn check_budget(&self) -> Result<(), GateError> {
        match self.budget_usd {
            Some(budget_usd) => {
                let spent_usd = self.spent_usd();
                if spent_usd >= budget_usd {
                    Err(GateError::BudgetExceeded { spent_usd, budget_usd })
                } else {
                    Ok(())
                }
            }
            None => Ok(()),
        }
    }

    fn record(&self, model: &str, input: u64, output: u64, cost: f64, cached: bool) -> Result<(), GateError> {
        self.ledger.lock().expect("ledger lock poisoned").record(LedgerEntry {
            timestamp: chrono::Utc::now().to_rfc3339(),
            model: model.to_string(),
            input_tokens: input,
            output_tokens: output,
            cost_usd: cost,
            cached,
        })
    }

    /// Serves from cache when possible; otherwise calls `provider`, retrying
    /// transient failures, then caches and bills the result. Once spend
    /// reaches the budget, uncached calls fail with `BudgetExceeded`; the
    /// call that crosses it still returns its (paid) result.
    pub fn complete(
        &self,
        prompt: &str,
        model: &ModelSpec,
        config: &GenerationConfig,
        provider: &dyn CompletionProvider,
    ) -> Result<CompletionResult, GateError> {
        config.validate()?;
        model.validate()?;
        if prompt.trim().is_empty() {
            return Err(GateError::EmptyPrompt);
        }
        let key = cache_key(provider.provider_id(), &model.model_id, config, prompt);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            if hit.model_id == model.model_id {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                self.record(&model.model_id, hit.input_tokens, hit.output_tokens, 0.0, true)?;
                return Ok(finish(hit, model, config, true, 0));
            }
        }
        self.check_budget()?;

        let request = ProviderRequest {
            model_id: model.model_id.clone(),
            prompt: prompt.to_string(),
            temperature: config.temperature,
            min_output_tokens: config.min_output_tokens,
            max_output_tokens: config.max_output_tokens,
            repetition_penalty: config.repetition_penalty,
            seed: config.seed,
        };
        let mut retries = 0;
        let (response, latency) = loop {
            let started = Instant::now();
            let outcome = {
                let _slot = self.slots.acquire();
                self.provider_calls.fetch_add(1, Ordering::SeqCst);
                provider.complete(&request)
            };
            match outcome {
                Ok(response) => break (response, started.elapsed()),
                Err(ProviderError::Rejected { status, message }) => {
                    return Err(GateError::Rejected { status, message });
                }
                Err(ProviderError::Transient(last)) => {
                    if retries >= self.retry.max_retries {
                        return Err(GateError::TransientExhausted { retries, last });
                    }
                    let wait = self.retry.delay(retries);
                    log::debug!("transient failure ({last}); retry {} in {wait:?}", retries + 1);
                    std::thread::sleep(wait);
                    retries += 1;
                }
            }
        };

        let token_source = match (response.input_tokens, response.output_tokens) {
            (Some(_), Some(_)) => TokenSource::Provider,
            _ => TokenSource::Estimated,
        };
        let entry = CacheEntry {
            model_id: model.model_id.clone(),
            input_tokens: response
                .input_tokens
                .unwrap_or_else(|| approx_tokens(prompt)),
            output_tokens: response
                .output_tokens
                .unwrap_or_else(|| approx_tokens(&response.text)),
            text: response.text,
            token_source,
            latency_ms: latency.as_millis() as u64,
        };
        if let Some(cache) = &self.cache {
            cache.put(&key, &entry)?;
        }
        let result = finish(entry, model, config, false, retries);
        self.record(&model.model_id, result.input_tokens, result.output_tokens, result.cost_usd, false)?;
        Ok(result)
    }
}

fn approx_tokens(text: &str) -> u64 {
    text.chars().count().div_ceil(4) as u64
}

fn finish(
    entry: CacheEntry,
    model: &ModelSpec,
    config: &GenerationConfig,
    cached: bool,
    retries: u32,
) -> CompletionResult {
    let below_min_output = entry.output_tokens < u64::from(config.min_output_tokens);
    if below_min_output && !cached {
        log::warn!(
            "{}: {} output tokens, below requested minimum {}",
            model.model_id,
            entry.output_tokens,
            config.min_output_tokens
        );
    }
    CompletionResult {
        cost_usd: estimate_cost(entry.input_tokens, entry.output_tokens, model),
        text: entry.text,
        input_tokens: entry.input_tokens,
        output_tokens: entry.output_tokens,
        latency_ms: entry.latency_ms,
        cached,
        retries,
        token_source: entry.token_source,
        below_min_output,
    }
}
