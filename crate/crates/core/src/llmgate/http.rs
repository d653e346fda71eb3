//! OpenAI-compatible `/chat/completions` over HTTPS.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{CompletionProvider, GateError, ProviderError, ProviderRequest, ProviderResponse};

#[derive(Debug, Clone)]
pub struct HttpProvider {
    id: String,
    endpoint: String,
    api_key: Option<String>,
    client: Client,
}

impl HttpProvider {
    /// `base_url` is the API root, e.g. `https://api.openai.com/v1`.
    pub fn new(base_url: &str, api_key: Option<String>) -> Result<Self, GateError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| GateError::InvalidConfig(format!("http client: {e}")))?;
        Ok(Self {
            id: format!("http:{base_url}"),
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key,
            client,
        })
    }

    /// Reads the bearer token from `api_key_env`.
    pub fn from_env(base_url: &str, api_key_env: &str) -> Result<Self, GateError> {
        let key = std::env::var(api_key_env).map_err(|_| {
            GateError::InvalidConfig(format!("environment variable {api_key_env} is not set"))
        })?;
        Self::new(base_url, Some(key))
    }

    fn body(request: &ProviderRequest) -> Value {
        let mut body = json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "min_tokens": request.min_output_tokens,
            "repetition_penalty": request.repetition_penalty,
        });
        if let Some(seed) = request.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

fn classify(status: StatusCode, message: String) -> ProviderError {
    if status == StatusCode::TOO_MANY_REQUESTS
        || status == StatusCode::REQUEST_TIMEOUT
        || status.is_server_error()
    {
        ProviderError::Transient(format!("status {}: {message}", status.as_u16()))
    } else {
        ProviderError::Rejected {
            status: status.as_u16(),
            message,
        }
    }
}

pub(crate) fn parse_response(body: &Value) -> Result<ProviderResponse, ProviderError> {
    let text = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ProviderError::Transient("response has no message content".into()))?;
    Ok(ProviderResponse {
        text: text.to_string(),
        input_tokens: body.pointer("/usage/prompt_tokens").and_then(Value::as_u64),
        output_tokens: body.pointer("/usage/completion_tokens").and_then(Value::as_u64),
    })
}

impl CompletionProvider for HttpProvider {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        let mut call = self.client.post(&self.endpoint).json(&Self::body(request));
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let response = call
            .send()
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        if !status.is_success() {
            return Err(classify(status, text));
        }
        let body: Value = serde_json::from_str(&text)
            .map_err(|e| ProviderError::Transient(format!("invalid JSON body: {e}")))?;
        parse_response(&body)
    }
}
