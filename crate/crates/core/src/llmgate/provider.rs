use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a provider receives for one completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub model_id: String,
    pub prompt: String,
    pub temperature: f64,
    pub min_output_tokens: u32,
    pub max_output_tokens: u32,
    pub repetition_penalty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderResponse {
    pub text: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProviderError {
    /// Worth retrying: timeouts, rate limits, 5xx.
    #[error("transient provider failure: {0}")]
    Transient(String),
    #[error("provider rejected request (status {status}): {message}")]
    Rejected { status: u16, message: String },
}

/// A chat-completion backend.
pub trait CompletionProvider: Send + Sync {
    fn provider_id(&self) -> &str;

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError>;
}
