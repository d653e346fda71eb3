use super::{count_nloc, CorpusError, Language, Stratum};

/// A source fragment with its NLOC measurement and stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSnippet {
    id: String,
    source_text: String,
    language_tag: String,
    nloc: usize,
    stratum: Stratum,
}

impl CodeSnippet {
    /// Measures `source_text` and assigns its stratum.
    pub fn new(
        id: impl Into<String>,
        source_text: impl Into<String>,
        language_tag: &str,
    ) -> Result<Self, CorpusError> {
        let source_text = source_text.into();
        let language = Language::from_tag(language_tag)?;
        let nloc = count_nloc(&source_text, language.tag())?;
        let stratum = Stratum::for_nloc(nloc)?;
        Ok(Self {
            id: id.into(),
            source_text,
            language_tag: language.tag().to_string(),
            nloc,
            stratum,
        })
    }

    /// Rebuilds a snippet from stored fields, checking the type invariants
    /// without re-measuring.
    pub fn from_parts(
        id: String,
        source_text: String,
        language_tag: String,
        nloc: usize,
        stratum_index: usize,
    ) -> Result<Self, CorpusError> {
        let invalid = |reason: String| CorpusError::InvalidRecord {
            id: id.clone(),
            reason,
        };
        if nloc == 0 {
            return Err(invalid("nloc must be at least 1".into()));
        }
        let lines = source_text.lines().count();
        if nloc > lines {
            return Err(invalid(format!(
                "nloc {nloc} exceeds {lines} physical lines"
            )));
        }
        let stratum =
            Stratum::for_nloc(nloc).map_err(|e| invalid(e.to_string()))?;
        if stratum.index() != stratum_index {
            return Err(invalid(format!(
                "stratum {stratum_index} does not hold nloc {nloc} (expected {})",
                stratum.index()
            )));
        }
        if language_tag.is_empty() {
            return Err(invalid("empty language tag".into()));
        }
        Ok(Self {
            id,
            source_text,
            language_tag,
            nloc,
            stratum,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn language_tag(&self) -> &str {
        &self.language_tag
    }

    pub fn nloc(&self) -> usize {
        self.nloc
    }

    pub fn stratum(&self) -> Stratum {
        self.stratum
    }
}

impl AsRef<CodeSnippet> for CodeSnippet {
    fn as_ref(&self) -> &CodeSnippet {
        self
    }
}
