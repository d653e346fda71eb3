//! Synthetic corpora with known sizes.

#![allow(dead_code)]

use storyrev::corpus::{CodeSnippet, DatasetRecord, Stratum};

/// A C++ function with exactly `nloc` non-comment lines (`nloc >= 4`),
/// padded with comments and blank lines that must not count.
pub fn cpp_with_nloc(name: &str, nloc: usize) -> String {
    assert!(nloc >= 4);
    let mut src = format!("// {name}: synthetic\n/* generated\n   body */\nint {name}(int x) {{\n  int acc = x;\n");
    for i in 0..nloc - 4 {
        if i % 7 == 3 {
            src.push_str("\n  // step\n");
        }
        src.push_str(&format!("  acc += {i}; // \"not a string\"\n"));
    }
    src.push_str("  return acc;\n}\n");
    src
}

const ROLES: [&str; 7] = ["developer", "tester", "operator", "analyst", "auditor", "manager", "customer"];
const ACTIONS: [&str; 5] = ["export", "validate", "archive", "merge", "schedule"];
const OBJECTS: [&str; 7] = ["invoices", "reports", "sensors", "accounts", "orders", "tickets", "images"];

pub fn story_for(i: usize) -> String {
    format!(
        "As a {}, I want to {} the {} so that item {i} stays accurate.",
        ROLES[i % ROLES.len()],
        ACTIONS[i % ACTIONS.len()],
        OBJECTS[(i / 5) % OBJECTS.len()],
    )
}

/// One snippet per stratum, at `lower + 4` NLOC (5, 15, ..., 345).
pub fn one_per_stratum() -> Vec<DatasetRecord> {
    Stratum::all()
        .map(|s| {
            let id = format!("s{:02}", s.index());
            let code = cpp_with_nloc(&format!("f{}", s.index()), s.lower() + 4);
            let snippet = CodeSnippet::new(id, &code, "cpp").expect("valid snippet");
            assert_eq!(snippet.stratum(), s);
            DatasetRecord::new(snippet, story_for(s.index())).expect("valid record")
        })
        .collect()
}

/// `per` snippets in each of the 35 strata, NLOC cycling through the band.
pub fn grid_corpus(per: usize) -> Vec<CodeSnippet> {
    let mut out = Vec::with_capacity(per * Stratum::COUNT);
    for s in Stratum::all() {
        for j in 0..per {
            let nloc = (s.lower() + j % Stratum::WIDTH).max(4);
            let id = format!("g{:02}-{j:03}", s.index());
            let snippet = CodeSnippet::new(id, cpp_with_nloc("g", nloc), "cpp").expect("valid snippet");
            assert_eq!(snippet.stratum(), s);
            out.push(snippet);
        }
    }
    out
}
