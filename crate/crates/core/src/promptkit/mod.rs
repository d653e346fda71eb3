//! Prompt rendering for the six generation variants: zero-, one- and
//! few-shot, each with or without a structured chain-of-thought (SCoT)
//! block. The behavioural directive always opens the prompt.

mod template;

use std::fmt;
use std::num::NonZeroUsize;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::CodeSnippet;

pub use template::Template;

const DEFAULT_TEMPLATE: &str = include_str!("../../assets/prompt.tmpl");
const DEFAULT_SCOT: &str = include_str!("../../assets/scot.tmpl");
const DEFAULT_DIRECTIVE: &str = include_str!("../../assets/directive.txt");
const DEFAULT_FORMAT_HINT: &str = include_str!("../../assets/format_hint.txt");
const DEFAULT_EXEMPLARS: &str = include_str!("../../assets/exemplars.jsonl");

pub const DEFAULT_FEW_SHOT_K: usize = 3;

const PROMPT_SLOTS: &[&str] = &["directive", "scot_block", "exemplars", "code"];
const SCOT_SLOTS: &[&str] = &["sequence", "branch", "loop"];

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("exemplar count mismatch: config needs {expected}, got {got}")]
    ExemplarCountMismatch { expected: usize, got: usize },
    #[error("empty snippet")]
    EmptySnippet,
    #[error("empty text")]
    EmptyText,
    #[error("directive must not be empty")]
    EmptyDirective,
    #[error("template is missing required placeholder {{{{{0}}}}}")]
    MissingPlaceholder(String),
    #[error("unknown placeholder {{{{{0}}}}}")]
    UnknownPlaceholder(String),
    #[error("template must start with {{{{directive}}}}")]
    DirectiveNotFirst,
    #[error("malformed template: {0}")]
    MalformedTemplate(String),
    #[error("unknown prompt variant `{0}` (expected one of: {})", PromptVariant::NAMES.join(", "))]
    UnknownVariant(String),
    #[error("invalid exemplar: {0}")]
    InvalidExemplar(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shots {
    Zero,
    One,
    Few(NonZeroUsize),
}

impl Shots {
    pub fn few(k: usize) -> Option<Self> {
        NonZeroUsize::new(k).map(Self::Few)
    }

    pub fn exemplar_count(self) -> usize {
        match self {
            Self::Zero => 0,
            Self::One => 1,
            Self::Few(k) => k.get(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Zero => "zero-shot",
            Self::One => "one-shot",
            Self::Few(_) => "few-shot",
        }
    }
}

/// One of the six named prompt variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PromptVariant {
    pub shots: ShotKind,
    pub scot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotKind {
    Zero,
    One,
    Few,
}

impl PromptVariant {
    pub const NAMES: [&'static str; 6] = [
        "zero-shot",
        "zero-shot-scot",
        "one-shot",
        "one-shot-scot",
        "few-shot",
        "few-shot-scot",
    ];

    pub fn all() -> impl Iterator<Item = PromptVariant> {
        Self::NAMES.iter().map(|n| n.parse().expect("known variant"))
    }

    pub fn name(self) -> &'static str {
        let base = match self.shots {
            ShotKind::Zero => 0,
            ShotKind::One => 2,
            ShotKind::Few => 4,
        };
        Self::NAMES[base + usize::from(self.scot)]
    }

    pub fn shots(self, few_k: NonZeroUsize) -> Shots {
        match self.shots {
            ShotKind::Zero => Shots::Zero,
            ShotKind::One => Shots::One,
            ShotKind::Few => Shots::Few(few_k),
        }
    }
}

impl std::str::FromStr for PromptVariant {
    type Err = PromptError;

    fn from_str(name: &str) -> Result<Self, Self::Err> {
        let (base, scot) = match name.strip_suffix("-scot") {
            Some(base) => (base, true),
            None => (name, false),
        };
        let shots = match base {
            "zero-shot" => ShotKind::Zero,
            "one-shot" => ShotKind::One,
            "few-shot" => ShotKind::Few,
            _ => return Err(PromptError::UnknownVariant(name.to_string())),
        };
        Ok(Self { shots, scot })
    }
}

impl TryFrom<String> for PromptVariant {
    type Error = PromptError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PromptVariant> for String {
    fn from(v: PromptVariant) -> Self {
        v.name().to_string()
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptConfig {
    pub shots: Shots,
    pub scot: bool,
    pub directive: String,
    pub story_format_hint: String,
}

impl PromptConfig {
    /// Config with the shipped directive and format hint.
    pub fn new(shots: Shots, scot: bool) -> Self {
        Self {
            shots,
            scot,
            directive: DEFAULT_DIRECTIVE.trim().to_string(),
            story_format_hint: DEFAULT_FORMAT_HINT.trim().to_string(),
        }
    }

    pub fn for_variant(variant: PromptVariant, few_k: NonZeroUsize) -> Self {
        Self::new(variant.shots(few_k), variant.scot)
    }

    pub fn variant(&self) -> PromptVariant {
        let shots = match self.shots {
            Shots::Zero => ShotKind::Zero,
            Shots::One => ShotKind::One,
            Shots::Few(_) => ShotKind::Few,
        };
        PromptVariant {
            shots,
            scot: self.scot,
        }
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.directive.trim().is_empty() {
            return Err(PromptError::EmptyDirective);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub code: String,
    pub story: String,
}

impl Exemplar {
    pub fn new(code: impl Into<String>, story: impl Into<String>) -> Result<Self, PromptError> {
        let e = Self {
            code: code.into(),
            story: story.into(),
        };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<(), PromptError> {
        if self.code.trim().is_empty() || self.story.trim().is_empty() {
            return Err(PromptError::InvalidExemplar(
                "code and story must both be non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// Parses JSON Lines exemplars with keys `code` and `story`.
pub fn parse_exemplars(text: &str) -> Result<Vec<Exemplar>, PromptError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let e: Exemplar = serde_json::from_str(line)
                .map_err(|err| PromptError::InvalidExemplar(format!("line {}: {err}", i + 1)))?;
            e.validate()?;
            Ok(e)
        })
        .collect()
}

pub fn load_exemplars(path: impl AsRef<Path>) -> Result<Vec<Exemplar>, PromptError> {
    parse_exemplars(&read(path.as_ref())?)
}

/// The shipped exemplars, shortest first.
pub fn default_exemplars() -> Vec<Exemplar> {
    parse_exemplars(DEFAULT_EXEMPLARS).expect("bundled exemplars are valid")
}

/// First `shots.exemplar_count()` exemplars from `pool`.
pub fn select_exemplars(pool: &[Exemplar], shots: Shots) -> Result<&[Exemplar], PromptError> {
    let want = shots.exemplar_count();
    pool.get(..want).ok_or(PromptError::ExemplarCountMismatch {
        expected: want,
        got: pool.len(),
    })
}

fn read(path: &Path) -> Result<String, PromptError> {
    std::fs::read_to_string(path).map_err(|source| PromptError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub estimated_tokens: usize,
    pub config_fingerprint: String,
}

/// `ceil(chars / 4)`; a provider-independent estimate.
pub fn estimate_tokens(text: &str) -> Result<usize, PromptError> {
    let chars = text.chars().count();
    if chars == 0 {
        return Err(PromptError::EmptyText);
    }
    Ok(chars.div_ceil(4))
}

/// Prompt layout plus the SCoT instruction block.
#[derive(Debug, Clone)]
pub struct PromptKit {
    layout: Template,
    scot: Template,
}

impl Default for PromptKit {
    fn default() -> Self {
        Self::new(DEFAULT_TEMPLATE, DEFAULT_SCOT).expect("bundled templates are valid")
    }
}

impl PromptKit {
    /// The layout must open with `{{directive}}` and contain `{{code}}`; the
    /// SCoT block must name all three control-flow primitives.
    pub fn new(layout: &str, scot: &str) -> Result<Self, PromptError> {
        let layout = Template::parse(layout, PROMPT_SLOTS)?;
        match layout.segments().first() {
            Some(template::Segment::Slot(name)) if name == "directive" => {}
            _ => return Err(PromptError::DirectiveNotFirst),
        }
        layout.require("code")?;
        let scot = Template::parse(scot, SCOT_SLOTS)?;
        for name in SCOT_SLOTS {
            scot.require(name)?;
        }
        Ok(Self { layout, scot })
    }

    pub fn from_files(layout: impl AsRef<Path>, scot: impl AsRef<Path>) -> Result<Self, PromptError> {
        Self::new(&read(layout.as_ref())?, &read(scot.as_ref())?)
    }

    /// Rejects configs this layout cannot express.
    pub fn supports(&self, config: &PromptConfig) -> Result<(), PromptError> {
        config.validate()?;
        if config.scot {
            self.layout.require("scot_block")?;
        }
        if config.shots != Shots::Zero {
            self.layout.require("exemplars")?;
        }
        Ok(())
    }

    /// Stable identifier of everything that shapes a prompt apart from the
    /// target snippet and exemplar contents.
    pub fn fingerprint(&self, config: &PromptConfig) -> String {
        let mut h = Sha256::new();
        for part in [
            config.variant().name(),
            &config.shots.exemplar_count().to_string(),
            &config.directive,
            &config.story_format_hint,
            self.layout.source(),
            self.scot.source(),
        ] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn scot_block(&self) -> String {
        self.scot.render(|name| name.to_string()).trim_end().to_string()
    }

    pub fn render(
        &self,
        config: &PromptConfig,
        snippet: &CodeSnippet,
        exemplars: &[Exemplar],
    ) -> Result<RenderedPrompt, PromptError> {
        self.supports(config)?;
        let expected = config.shots.exemplar_count();
        if exemplars.len() != expected {
            return Err(PromptError::ExemplarCountMismatch {
                expected,
                got: exemplars.len(),
            });
        }
        if snippet.source_text().trim().is_empty() {
            return Err(PromptError::EmptySnippet);
        }
        let lang = snippet.language_tag();
        let text = self.layout.render(|slot| match slot {
            "directive" => {
                let directive = config.directive.trim();
                let hint = config.story_format_hint.trim();
                if hint.is_empty() {
                    directive.to_string()
                } else {
                    format!("{directive}\n{hint}")
                }
            }
            "scot_block" if config.scot => self.scot_block(),
            "exemplars" => render_exemplars(exemplars, lang),
            "code" => fenced(snippet.source_text(), lang),
            _ => String::new(),
        });
        Ok(RenderedPrompt {
            estimated_tokens: estimate_tokens(&text)?,
            config_fingerprint: self.fingerprint(config),
            text,
        })
    }
}

/// Renders with the shipped templates.
pub fn render_prompt(
    config: &PromptConfig,
    snippet: &CodeSnippet,
    exemplars: &[Exemplar],
) -> Result<RenderedPrompt, PromptError> {
    PromptKit::default().render(config, snippet, exemplars)
}

fn fenced(code: &str, lang: &str) -> String {
    let longest_run = code
        .split(|c| c != '`')
        .map(str::len)
        .max()
        .unwrap_or(0);
    let fence = "`".repeat(longest_run.max(2) + 1);
    format!("{fence}{lang}\n{}\n{fence}", code.trim_end_matches(['\n', '\r']))
}

fn render_exemplars(exemplars: &[Exemplar], lang: &str) -> String {
    exemplars
        .iter()
        .enumerate()
        .map(|(i, e)| {
            format!(
                "Example {}:\nCode:\n{}\nUser stories:\n{}",
                i + 1,
                fenced(&e.code, lang),
                e.story.trim()
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}
