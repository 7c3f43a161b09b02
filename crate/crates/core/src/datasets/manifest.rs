//! Corpus manifests: a CSV listing `path,split,label` (label may be empty),
//! one signal file per row, for reproducible runs over hand-picked records.

use std::path::{Path, PathBuf};

use crate::datasets::{load_csv_signal, Corpus, Split};
use crate::error::{Result, SanError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub split: Split,
    pub label: Option<usize>,
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut out = String::from("path,split,label\n");
    for e in entries {
        let label = e.label.map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", e.path.display(), e.split, label));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a manifest and loads every listed signal. Relative paths resolve
/// against the manifest's directory. Labels must be given for all rows or
/// none.
pub fn load_manifest(path: &Path) -> Result<Corpus> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("path,")) {
            continue;
        }
        let perr = |msg: String| SanError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(perr(format!("expected path,split[,label], got {line:?}")));
        }
        let split = fields[1]
            .parse::<Split>()
            .map_err(|e| perr(e.to_string()))?;
        let label = match fields.get(2) {
            None | Some(&"") => None,
            Some(l) => Some(l.parse().map_err(|_| perr(format!("bad label {l:?}")))?),
        };
        let p = PathBuf::from(fields[0]);
        entries.push(ManifestEntry {
            path: if p.is_absolute() { p } else { base.join(p) },
            split,
            label,
        });
    }
    if entries.is_empty() {
        return Err(SanError::EmptyDataset(path.display().to_string()));
    }
    let labeled = entries.iter().filter(|e| e.label.is_some()).count();
    if labeled != 0 && labeled != entries.len() {
        return Err(SanError::Format(
            "manifest labels must be given for every row or none".into(),
        ));
    }
    let examples = entries
        .iter()
        .map(|e| load_csv_signal(&e.path))
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(
        examples,
        entries.iter().filter_map(|e| e.label).collect(),
        entries.iter().map(|e| e.split).collect(),
        path.display().to_string(),
    )
}
