//! Offline providers for tests and dry runs.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{CompletionProvider, ProviderError, ProviderRequest, ProviderResponse};

/// Always returns the same text.
#[derive(Debug)]
pub struct FixedProvider {
    text: String,
    report_usage: bool,
    calls: AtomicUsize,
}

impl FixedProvider {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            report_usage: true,
            calls: AtomicUsize::new(0),
        }
    }

    /// Omits token counts from responses.
    pub fn without_usage(mut self) -> Self {
        self.report_usage = false;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

fn words(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

impl CompletionProvider for FixedProvider {
    fn provider_id(&self) -> &str {
        "mock-fixed"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let usage = self.report_usage;
        Ok(ProviderResponse {
            text: self.text.clone(),
            input_tokens: usage.then(|| words(&request.prompt)),
            output_tokens: usage.then(|| words(&self.text)),
        })
    }
}

/// Replays a fixed script of outcomes, then repeats the last one.
#[derive(Debug)]
pub struct ScriptedProvider {
    script: Mutex<VecDeque<Result<ProviderResponse, ProviderError>>>,
    calls: AtomicUsize,
}

impl ScriptedProvider {
    /// Panics on an empty script.
    pub fn new(script: Vec<Result<ProviderResponse, ProviderError>>) -> Self {
        assert!(!script.is_empty(), "script must not be empty");
        Self {
            script: Mutex::new(script.into()),
            calls: AtomicUsize::new(0),
        }
    }

    /// `failures` transient errors followed by `text` forever.
    pub fn flaky(failures: usize, text: &str) -> Self {
        let mut script: Vec<_> = (0..failures)
            .map(|i| Err(ProviderError::Transient(format!("scripted failure {}", i + 1))))
            .collect();
        script.push(Ok(ProviderResponse {
            text: text.to_string(),
            input_tokens: Some(10),
            output_tokens: Some(words(text)),
        }));
        Self::new(script)
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl CompletionProvider for ScriptedProvider {
    fn provider_id(&self) -> &str {
        "mock-scripted"
    }

    fn complete(&self, _request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut script = self.script.lock().expect("script lock poisoned");
        if script.len() > 1 {
            script.pop_front().expect("non-empty")
        } else {
            script.front().expect("non-empty").clone()
        }
    }
}

/// Answers with the reference story of whichever known snippet appears
/// last in the prompt; the target code follows any exemplars.
#[derive(Debug)]
pub struct EchoReferenceProvider {
    pairs: Vec<(String, String)>,
    calls: AtomicUsize,
}

impl EchoReferenceProvider {
    pub fn new<I, C, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (C, S)>,
        C: Into<String>,
        S: Into<String>,
    {
        Self {
            pairs: pairs
                .into_iter()
                .map(|(c, s)| (c.into().trim_end().to_string(), s.into()))
                .collect(),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl CompletionProvider for EchoReferenceProvider {
    fn provider_id(&self) -> &str {
        "mock-echo-reference"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let found = self
            .pairs
            .iter()
            .filter(|(code, _)| !code.is_empty())
            .filter_map(|(code, story)| request.prompt.rfind(code.as_str()).map(|at| (at, code.len(), story)))
            .max_by_key(|&(at, len, _)| (at + len, len));
        match found {
            Some((_, _, story)) => Ok(ProviderResponse {
                text: story.clone(),
                input_tokens: Some(words(&request.prompt)),
                output_tokens: Some(words(story)),
            }),
            None => Err(ProviderError::Rejected {
                status: 404,
                message: "no known snippet in prompt".into(),
            }),
        }
    }
}
