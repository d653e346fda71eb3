use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use super::CliError;
use crate::llmgate::{roster_model, GenerationConfig, ModelSpec, RetryPolicy};
use crate::promptkit::{PromptConfig, PromptVariant, DEFAULT_FEW_SHOT_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    /// OpenAI-compatible chat completions endpoint.
    #[default]
    Http,
    /// Answers with each snippet's reference story.
    Echo,
    /// Answers with `fixed_text`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderKind {
    #[default]
    Hash,
    Onehot,
}

/// A declarative run description. Flat TOML; relative paths resolve
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub dataset: PathBuf,
    pub model_id: String,
    /// Required unless the run is expanded with `--grid`.
    pub prompt_variant: Option<String>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub budget_usd: Option<f64>,

    #[serde(default)]
    pub provider: ProviderKind,
    pub base_url: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub fixed_text: Option<String>,
    #[serde(default)]
    pub embedder: EmbedderKind,

    pub few_shot_k: Option<usize>,
    pub exemplars: Option<PathBuf>,
    pub concurrency: Option<usize>,
    pub max_retries: Option<u32>,
    pub retry_base_delay_ms: Option<u64>,

    pub temperature: Option<f64>,
    pub min_output_tokens: Option<u32>,
    pub max_output_tokens: Option<u32>,
    pub repetition_penalty: Option<f64>,

    /// Prices for models outside the built-in roster.
    pub input_cost_per_mtok: Option<f64>,
    pub output_cost_per_mtok: Option<f64>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut manifest: Self = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        manifest.dataset = base.join(&manifest.dataset);
        manifest.output_dir = base.join(&manifest.output_dir);
        manifest.exemplars = manifest.exemplars.map(|p| base.join(p));
        Ok(manifest)
    }

    pub fn variant(&self) -> Result<PromptVariant, CliError> {
        let name = self
            .prompt_variant
            .as_deref()
            .ok_or_else(|| CliError::Usage("manifest has no prompt_variant (or pass --grid)".into()))?;
        name.parse()
            .map_err(|e| CliError::Usage(format!("{e}")))
    }

    pub fn prompt_config(&self, variant: PromptVariant) -> Result<PromptConfig, CliError> {
        let k = NonZeroUsize::new(self.few_shot_k.unwrap_or(DEFAULT_FEW_SHOT_K))
            .ok_or_else(|| CliError::Usage("few_shot_k must be positive".into()))?;
        Ok(PromptConfig::for_variant(variant, k))
    }

    pub fn model(&self) -> Result<ModelSpec, CliError> {
        let spec = match (self.input_cost_per_mtok, self.output_cost_per_mtok) {
            (Some(i), Some(o)) => ModelSpec::new(self.model_id.clone(), i, o),
            (None, None) => {
                return roster_model(&self.model_id).ok_or_else(|| {
                    CliError::Usage(format!(
                        "model {:?} is not in the roster; set input_cost_per_mtok and output_cost_per_mtok",
                        self.model_id
                    ))
                })
            }
            _ => {
                return Err(CliError::Usage(
                    "set both input_cost_per_mtok and output_cost_per_mtok, or neither".into(),
                ))
            }
        };
        spec.map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn generation_config(&self) -> Result<GenerationConfig, CliError> {
        let d = GenerationConfig::default();
        let config = GenerationConfig {
            temperature: self.temperature.unwrap_or(d.temperature),
            min_output_tokens: self.min_output_tokens.unwrap_or(d.min_output_tokens),
            repetition_penalty: self.repetition_penalty.unwrap_or(d.repetition_penalty),
            max_output_tokens: self.max_output_tokens.unwrap_or(d.max_output_tokens),
            seed: self.seed,
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }

    pub fn retry(&self) -> RetryPolicy {
        let d = RetryPolicy::default();
        RetryPolicy {
            max_retries: self.max_retries.unwrap_or(d.max_retries),
            base_delay: self.retry_base_delay_ms.map_or(d.base_delay, Duration::from_millis),
            jitter: d.jitter,
        }
    }

    pub fn concurrency(&self) -> Result<NonZeroUsize, CliError> {
        NonZeroUsize::new(self.concurrency.unwrap_or(1))
            .ok_or_else(|| CliError::Usage("concurrency must be positive".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunManifest {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn minimal_manifest_uses_defaults() {
        let m = parse("dataset = 'd.jsonl'\nmodel_id = 'llama-3.1-8b'\nprompt_variant = 'few-shot-scot'\noutput_dir = 'out'\n");
        assert_eq!(m.provider, ProviderKind::Http);
        assert_eq!(m.generation_config().unwrap(), GenerationConfig::default());
        let v = m.variant().unwrap();
        assert!(v.scot);
        assert_eq!(m.prompt_config(v).unwrap().shots.exemplar_count(), DEFAULT_FEW_SHOT_K);
        assert_eq!(m.model().unwrap().input_cost_per_mtok, 0.05);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let m = parse("dataset = 'd'\nmodel_id = 'mystery'\nprompt_variant = 'two-shot'\noutput_dir = 'o'\n");
        let CliError::Usage(msg) = m.variant().unwrap_err() else { panic!() };
        assert!(msg.contains("two-shot"));
        assert!(matches!(m.model(), Err(CliError::Usage(_))));
        assert!(toml::from_str::<RunManifest>("dataset = 'd'\nmodel_id = 'm'\noutput_dir = 'o'\nbogus = 1\n").is_err());
    }
}
