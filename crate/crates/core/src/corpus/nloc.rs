//! Comment-aware line counter for C-family sources.
//!
//! Recognises `//` line comments (including backslash continuation),
//! `/* */` block comments, and `"`/`'` delimited literals. Raw strings and
//! other exotic literal forms are not modelled; a multi-line raw string
//! containing comment markers may be miscounted. Preprocessor lines count
//! as code.

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    Cpp,
}

impl Language {
    pub fn from_tag(tag: &str) -> Result<Self, CorpusError> {
        match tag.to_ascii_lowercase().as_str() {
            "cpp" | "c++" | "cxx" | "cc" => Ok(Self::Cpp),
            _ => Err(CorpusError::UnsupportedLanguage(tag.to_string())),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::Cpp => "cpp",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "cpp" | "cc" | "cxx" | "c++" | "hpp" | "hh" | "hxx" | "h" => Some(Self::Cpp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    LineComment,
    BlockComment { opened_at: usize },
    Literal { quote: char },
}

/// Number of lines holding at least one token outside comments.
pub fn count_nloc(source: &str, language_tag: &str) -> Result<usize, CorpusError> {
    let Language::Cpp = Language::from_tag(language_tag)?;
    let nloc = count_c_family(source)?;
    if nloc == 0 {
        return Err(CorpusError::NoCodeLines);
    }
    Ok(nloc)
}

fn count_c_family(source: &str) -> Result<usize, CorpusError> {
    let mut state = State::Code;
    let mut line = 1;
    let mut line_has_code = false;
    let mut nloc = 0;
    let mut prev = '\0';
    let mut chars = source.chars().peekable();

    while let Some(c) = chars.next() {
        if c == '\n' {
            if line_has_code {
                nloc += 1;
            }
            line_has_code = false;
            line += 1;
            state = match state {
                State::LineComment if prev == '\\' => State::LineComment,
                State::LineComment | State::Literal { .. } => State::Code,
                other => other,
            };
            prev = c;
            continue;
        }
        match state {
            State::Code => match c {
                '/' if chars.peek() == Some(&'/') => {
                    chars.next();
                    state = State::LineComment;
                }
                '/' if chars.peek() == Some(&'*') => {
                    chars.next();
                    state = State::BlockComment { opened_at: line };
                }
                '"' | '\'' => {
                    line_has_code = true;
                    state = State::Literal { quote: c };
                }
                c if c.is_whitespace() => {}
                _ => line_has_code = true,
            },
            State::LineComment => {}
            State::BlockComment { .. } => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    state = State::Code;
                }
            }
            State::Literal { quote } => {
                if c == '\\' {
                    // escaped char; an escaped newline is a line splice
                    if chars.peek() == Some(&'\n') {
                        prev = c;
                        continue;
                    }
                    chars.next();
                } else if c == quote {
                    state = State::Code;
                }
            }
        }
        prev = c;
    }
    if line_has_code {
        nloc += 1;
    }
    if let State::BlockComment { opened_at } = state {
        return Err(CorpusError::UnterminatedBlockComment { line: opened_at });
    }
    Ok(nloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nloc(src: &str) -> usize {
        count_nloc(src, "cpp").unwrap()
    }

    #[test]
    fn code_comment_blank_fixture() {
        let src = "#include <cstdio>\n// entry point\n\nint main() {\n}\n";
        assert_eq!(nloc(src), 3);
    }

    #[test]
    fn empty_text_has_no_code_lines() {
        assert!(matches!(count_nloc("", "cpp"), Err(CorpusError::NoCodeLines)));
        assert!(matches!(
            count_nloc("// only\n/* comments */\n\n", "cpp"),
            Err(CorpusError::NoCodeLines)
        ));
    }

    #[test]
    fn comment_marker_inside_string_is_code() {
        assert_eq!(nloc("s = \"//not a comment\";"), 1);
        assert_eq!(nloc("s = \"/* nope\";\nint x;"), 2);
        assert_eq!(nloc("char c = '\"'; // quote\nint y;"), 2);
    }

    #[test]
    fn trailing_line_comment_counts() {
        assert_eq!(nloc("int x = 1; // one\n"), 1);
    }

    #[test]
    fn block_comments() {
        let src = "/* header\n * more\n */\nint a; /* inline */ int b;\n/* a */ /* b */\nint c /* mid\n */ ;\n";
        // line 4 code, line 5 comments only, line 6 code, line 7 ";" after close
        assert_eq!(nloc(src), 3);
    }

    #[test]
    fn unterminated_block_reports_opening_line() {
        let err = count_nloc("int a;\n\n/* open\nint b;\n", "cpp").unwrap_err();
        assert!(matches!(err, CorpusError::UnterminatedBlockComment { line: 3 }));
    }

    #[test]
    fn escaped_quote_does_not_end_literal() {
        assert_eq!(nloc("auto s = \"a\\\" // b\";\n// c\n"), 1);
    }

    #[test]
    fn line_comment_continuation() {
        assert_eq!(nloc("// comment \\\n still comment\nint x;\n"), 1);
    }

    #[test]
    fn preprocessor_lines_are_code() {
        assert_eq!(nloc("#define N 10\n#pragma once\n"), 2);
    }

    #[test]
    fn unsupported_language() {
        assert!(matches!(
            count_nloc("x = 1", "python"),
            Err(CorpusError::UnsupportedLanguage(_))
        ));
    }

    #[test]
    fn crlf_line_endings() {
        assert_eq!(nloc("int a;\r\n// c\r\n\r\nint b;\r\n"), 2);
    }

    fn code_line() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z]{1,6} = [0-9]{1,3};",
            "[a-z]{1,6}\\(\\);",
            Just("}".to_string()),
            "s = \"[a-z/ *]{0,8}\";",
            "x = y; // [a-z ]{0,10}",
        ]
    }

    proptest! {
        #[test]
        fn full_line_comments_never_change_count(
            lines in proptest::collection::vec(code_line(), 1..20),
            comment in "[a-z ]{0,20}",
            at in 0usize..20,
        ) {
            let base = lines.join("\n");
            let mut with = lines.clone();
            let pos = at.min(with.len());
            with.insert(pos, format!("// {comment}"));
            prop_assert_eq!(nloc(&base), nloc(&with.join("\n")));
            let appended = format!("{base}\n// {comment}");
            prop_assert_eq!(nloc(&base), nloc(&appended));
        }

        #[test]
        fn bounded_by_lines_and_blank_insensitive(
            lines in proptest::collection::vec(
                prop_oneof![code_line(), Just(String::new()), Just("   ".to_string())], 1..25),
        ) {
            let src = lines.join("\n");
            if let Ok(n) = count_nloc(&src, "cpp") {
                prop_assert!(n <= src.lines().count());
                let stripped: Vec<&str> =
                    src.lines().filter(|l| !l.trim().is_empty()).collect();
                prop_assert_eq!(n, nloc(&stripped.join("\n")));
            }
        }
    }
}
