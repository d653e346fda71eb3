//! Plain-text templates with `{{name}}` placeholders.

use std::collections::BTreeSet;

use super::PromptError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Segment {
    Literal(String),
    Slot(String),
}

/// A template split into literal text and named slots at load time, so
/// substituted values are never re-scanned for placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    segments: Vec<Segment>,
}

impl Template {
    /// Parses `text`, accepting only placeholders listed in `allowed`.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, PromptError> {
        let mut segments = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find("{{") {
            if open > 0 {
                segments.push(Segment::Literal(rest[..open].to_string()));
            }
            let after = &rest[open + 2..];
            let close = after
                .find("}}")
                .ok_or_else(|| PromptError::MalformedTemplate("unclosed `{{`".into()))?;
            let name = after[..close].trim();
            if !allowed.contains(&name) {
                return Err(PromptError::UnknownPlaceholder(name.to_string()));
            }
            segments.push(Segment::Slot(name.to_string()));
            rest = &after[close + 2..];
        }
        if !rest.is_empty() {
            segments.push(Segment::Literal(rest.to_string()));
        }
        Ok(Self {
            source: text.to_string(),
            segments,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn placeholders(&self) -> BTreeSet<&str> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(name) => Some(name.as_str()),
                Segment::Literal(_) => None,
            })
            .collect()
    }

    pub fn require(&self, name: &str) -> Result<(), PromptError> {
        if self.placeholders().contains(name) {
            Ok(())
        } else {
            Err(PromptError::MissingPlaceholder(name.to_string()))
        }
    }

    pub(crate) fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Substitutes slots via `value`. When a slot renders empty, the line
    /// breaks that follow it are dropped so empty sections leave no gap.
    pub fn render(&self, mut value: impl FnMut(&str) -> String) -> String {
        let mut out = String::new();
        let mut eat_newlines = false;
        for segment in &self.segments {
            match segment {
                Segment::Literal(text) => {
                    let text = if eat_newlines {
                        text.trim_start_matches(['\n', '\r'])
                    } else {
                        text
                    };
                    out.push_str(text);
                    eat_newlines = false;
                }
                Segment::Slot(name) => {
                    let v = value(name);
                    eat_newlines = v.is_empty();
                    out.push_str(&v);
                }
            }
        }
        out
    }
}
