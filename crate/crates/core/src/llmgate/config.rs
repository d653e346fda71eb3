use serde::{Deserialize, Serialize};

use super::GateError;

/// Decoding parameters sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub min_output_tokens: u32,
    /// Forwarded verbatim; providers disagree on its scale.
    pub repetition_penalty: f64,
    pub max_output_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            min_output_tokens: 50,
            repetition_penalty: 0.2,
            max_output_tokens: 4096,
            seed: None,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GateError> {
        let bad = |m: &str| Err(GateError::InvalidConfig(m.to_string()));
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be finite and >= 0");
        }
        if !(self.repetition_penalty.is_finite() && self.repetition_penalty > 0.0) {
            return bad("repetition_penalty must be finite and > 0");
        }
        if self.min_output_tokens == 0 || self.max_output_tokens == 0 {
            return bad("output token bounds must be positive");
        }
        if self.min_output_tokens > self.max_output_tokens {
            return bad("min_output_tokens exceeds max_output_tokens");
        }
        Ok(())
    }
}

/// A model and its per-million-token prices in USD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub input_cost_per_mtok: f64,
    pub output_cost_per_mtok: f64,
}

impl ModelSpec {
    pub fn new(model_id: impl Into<String>, input: f64, output: f64) -> Result<Self, GateError> {
        let spec = Self {
            model_id: model_id.into(),
            input_cost_per_mtok: input,
            output_cost_per_mtok: output,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GateError> {
        let ok = |c: f64| c.is_finite() && c >= 0.0;
        if self.model_id.is_empty() {
            return Err(GateError::InvalidConfig("empty model id".into()));
        }
        if !ok(self.input_cost_per_mtok) || !ok(self.output_cost_per_mtok) {
            return Err(GateError::InvalidConfig(format!(
                "{}: costs must be finite and non-negative",
                self.model_id
            )));
        }
        Ok(())
    }
}

/// Pay-as-you-go list prices (USD per 1M tokens, input/output).
pub const ROSTER: &[(&str, f64, f64)] = &[
    ("llama-3.1-8b", 0.05, 0.25),
    ("llama-3.1-70b", 0.65, 2.75),
    ("llama-3.1-405b", 9.50, 9.50),
    ("deepseek-r1", 0.55, 2.19),
    ("gpt-4o-mini", 0.80, 3.20),
    ("o1", 10.00, 40.00),
];

/// Looks up a roster model by id.
pub fn roster_model(model_id: &str) -> Option<ModelSpec> {
    ROSTER
        .iter()
        .find(|(id, _, _)| *id == model_id)
        .map(|&(id, input, output)| ModelSpec {
            model_id: id.to_string(),
            input_cost_per_mtok: input,
            output_cost_per_mtok: output,
        })
}

pub fn estimate_cost(input_tokens: u64, output_tokens: u64, model: &ModelSpec) -> f64 {
    input_tokens as f64 / 1e6 * model.input_cost_per_mtok
        + output_tokens as f64 / 1e6 * model.output_cost_per_mtok
}
