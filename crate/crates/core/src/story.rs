//! Parsing and canonical rendering of "As a <role>, I want <goal> so that
//! <benefit>" user stories.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoryError {
    #[error("no \"As a ..., I want ...\" clause found")]
    NoMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoryWarning {
    MissingBenefit,
    /// More stories follow the one that was parsed.
    MultipleStories,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserStory {
    pub role: String,
    pub goal: String,
    pub benefit: Option<String>,
    /// The full input, verbatim.
    pub raw_text: String,
    pub warnings: Vec<StoryWarning>,
}

impl UserStory {
    pub fn same_fields(&self, other: &UserStory) -> bool {
        self.role == other.role && self.goal == other.goal && self.benefit == other.benefit
    }
}

struct Patterns {
    opener: Regex,
    boundary: Regex,
    want: Regex,
    so_that: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        opener: Regex::new(r"(?i)\bas\s+an?\s+").unwrap(),
        boundary: Regex::new(r"(?i)[.!?;]\s+as\s+an?\s+|\n").unwrap(),
        want: Regex::new(r"(?i),\s*i\s+want\s+").unwrap(),
        so_that: Regex::new(r"(?i),?\s+so\s+that\s+").unwrap(),
    })
}

fn clean(field: &str) -> &str {
    field
        .trim_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '_' | '"' | '`'))
        .trim_end_matches(['.', '!'])
        .trim_end()
}

struct Span {
    role: String,
    goal: String,
    benefit: Option<String>,
    end: usize,
}

// Parses one story whose role starts at `from`.
fn parse_at(text: &str, from: usize) -> Option<Span> {
    let p = patterns();
    let tail = &text[from..];
    let end = p.boundary.find(tail).map_or(tail.len(), |m| m.start());
    let segment = &tail[..end];
    let want = p.want.find(segment)?;
    let role = clean(&segment[..want.start()]);
    let rest = &segment[want.end()..];
    let (goal, benefit) = match p.so_that.find(rest) {
        Some(m) => (clean(&rest[..m.start()]), Some(clean(&rest[m.end()..]))),
        None => (clean(rest), None),
    };
    if role.is_empty() || goal.is_empty() {
        return None;
    }
    Some(Span {
        role: role.to_string(),
        goal: goal.to_string(),
        benefit: benefit.filter(|b| !b.is_empty()).map(str::to_string),
        end: from + end,
    })
}

fn spans(text: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut cursor = 0;
    while let Some(m) = patterns().opener.find_at(text, cursor) {
        match parse_at(text, m.end()) {
            Some(span) => {
                cursor = span.end.max(m.end());
                out.push(span);
            }
            None => cursor = m.end(),
        }
    }
    out
}

fn to_story(span: Span, raw: &str, more: bool) -> UserStory {
    let mut warnings = Vec::new();
    if span.benefit.is_none() {
        warnings.push(StoryWarning::MissingBenefit);
    }
    if more {
        warnings.push(StoryWarning::MultipleStories);
    }
    UserStory {
        role: span.role,
        goal: span.goal,
        benefit: span.benefit,
        raw_text: raw.to_string(),
        warnings,
    }
}

/// First complete story in `text` (case-insensitive). A story ends at a
/// newline or where a new sentence opens another "As a" clause.
pub fn parse_story(text: &str) -> Result<UserStory, StoryError> {
    let mut found = spans(text).into_iter();
    let first = found.next().ok_or(StoryError::NoMatch)?;
    let more = found.next().is_some();
    Ok(to_story(first, text, more))
}

/// Every complete story in `text`, in order.
pub fn parse_stories(text: &str) -> Vec<UserStory> {
    spans(text)
        .into_iter()
        .map(|s| to_story(s, text, false))
        .collect()
}

/// Single-line rendering; `parse_story` of the result reproduces the fields.
pub fn canonical_text(story: &UserStory) -> String {
    match &story.benefit {
        Some(b) => format!("As a {}, I want {} so that {}.", story.role, story.goal, b),
        None => format!("As a {}, I want {}.", story.role, story.goal),
    }
}

/// What a completion contributes to scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringText {
    pub text: String,
    pub story_count: usize,
    /// No story parsed; `text` is the raw completion.
    pub fallback: bool,
}

/// Canonical texts of all parsed stories joined by one space, or the
/// trimmed raw completion when nothing parses.
pub fn scoring_text(completion: &str) -> ScoringText {
    let stories = parse_stories(completion);
    if stories.is_empty() {
        return ScoringText {
            text: completion.trim().to_string(),
            story_count: 0,
            fallback: true,
        };
    }
    ScoringText {
        text: stories.iter().map(canonical_text).collect::<Vec<_>>().join(" "),
        story_count: stories.len(),
        fallback: false,
    }
}
