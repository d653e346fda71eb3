//! File-level NLOC profiling of a source tree.

use std::io::Write;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::{count_nloc, CorpusError, Language, Stratum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileEntry {
    pub path: PathBuf,
    pub nloc: usize,
    /// `None` when the file is larger than the stratified range.
    pub stratum: Option<Stratum>,
}

#[derive(Debug, Default)]
pub struct Profile {
    pub entries: Vec<ProfileEntry>,
    /// Files that could not be measured, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

/// Measures every recognised source file under `root`, in path order.
pub fn profile_dir(root: impl AsRef<Path>) -> Result<Profile, CorpusError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(CorpusError::Io {
            path: root.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    let mut profile = Profile::default();
    let walker = WalkDir::new(root).sort_by_file_name();
    for entry in walker {
        let entry = entry.map_err(|e| CorpusError::Io {
            path: root.display().to_string(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let Some(language) = path
            .extension()
            .and_then(|e| e.to_str())
            .and_then(Language::from_extension)
        else {
            continue;
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                profile.skipped.push((path.to_path_buf(), e.to_string()));
                continue;
            }
        };
        match count_nloc(&text, language.tag()) {
            Ok(nloc) => profile.entries.push(ProfileEntry {
                path: path.strip_prefix(root).unwrap_or(path).to_path_buf(),
                nloc,
                stratum: Stratum::for_nloc(nloc).ok(),
            }),
            Err(e) => profile.skipped.push((path.to_path_buf(), e.to_string())),
        }
    }
    Ok(profile)
}

/// CSV with header `path,nloc,stratum`; stratum is blank past the range.
pub fn write_profile_csv<W: Write>(writer: W, profile: &Profile) -> Result<(), CorpusError> {
    let mut csv = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| CorpusError::Io {
        path: "<profile>".into(),
        source: e.into(),
    };
    csv.write_record(["path", "nloc", "stratum"]).map_err(io)?;
    for e in &profile.entries {
        csv.write_record([
            e.path.display().to_string(),
            e.nloc.to_string(),
            e.stratum.map(|s| s.index().to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    csv.flush().map_err(|e| CorpusError::Io {
        path: "<profile>".into(),
        source: e,
    })
}
