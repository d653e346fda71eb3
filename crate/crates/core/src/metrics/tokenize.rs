use serde::{Deserialize, Serialize};

use super::MetricError;

/// Ordered tokens fed to the lexical and embedding metrics. Never holds an
/// empty-string token.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Result<Self, MetricError> {
        if let Some(pos) = tokens.iter().position(String::is_empty) {
            return Err(MetricError::EmptyToken(pos));
        }
        Ok(Self(tokens))
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Space-joined form; `tokenize(seq.joined())` gives back `seq`.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl TryFrom<Vec<String>> for TokenSequence {
    type Error = MetricError;

    fn try_from(tokens: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(tokens)
    }
}

impl From<TokenSequence> for Vec<String> {
    fn from(seq: TokenSequence) -> Self {
        seq.0
    }
}

/// Lowercases, splits on whitespace and peels leading/trailing punctuation
/// off each word as one-character tokens.
///
/// ```
/// use storyrev::metrics::tokenize;
/// let toks = tokenize("Add two numbers.");
/// assert_eq!(toks.as_slice(), ["add", "two", "numbers", "."]);
/// ```
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let word = word.to_lowercase();
        let chars: Vec<char> = word.chars().collect();
        let lead = chars.iter().take_while(|c| c.is_ascii_punctuation()).count();
        if lead == chars.len() {
            tokens.extend(chars.iter().map(char::to_string));
            continue;
        }
        let trail = chars
            .iter()
            .rev()
            .take_while(|c| c.is_ascii_punctuation())
            .count();
        tokens.extend(chars[..lead].iter().map(char::to_string));
        tokens.push(chars[lead..chars.len() - trail].iter().collect());
        tokens.extend(chars[chars.len() - trail..].iter().map(char::to_string));
    }
    TokenSequence(tokens)
}
