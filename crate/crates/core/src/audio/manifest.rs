use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HEADER: [&str; 4] = ["path", "word_id", "label", "speaker_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Correct,
    Mispronounced,
}

impl Label {
    /// Target value: mispronunciation is the positive class.
    pub fn target(self) -> f64 {
        match self {
            Label::Correct => 0.0,
            Label::Mispronounced => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Correct => "correct",
            Label::Mispronounced => "mispronounced",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correct" => Ok(Label::Correct),
            "mispronounced" => Ok(Label::Mispronounced),
            other => Err(format!("unknown label '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub word_id: String,
    pub label: Label,
    pub speaker_id: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Builds a manifest, rejecting duplicate paths and empty identifiers.
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            let row = i + 1;
            if e.word_id.is_empty() || e.speaker_id.is_empty() || e.path.is_empty() {
                return Err(Error::ManifestRow {
                    row,
                    reason: "path, word_id and speaker_id must be non-empty".into(),
                });
            }
            if !seen.insert(e.path.as_str()) {
                return Err(Error::ManifestRow {
                    row,
                    reason: format!("duplicate path '{}'", e.path),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Word ids in order of first appearance.
    pub fn word_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.word_id.as_str()))
            .map(|e| e.word_id.as_str())
            .collect()
    }

    pub fn entries_for<'a>(
        &'a self,
        word_id: &'a str,
        label: Label,
    ) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.word_id == word_id && e.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = HEADER.join(",");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.path, e.word_id, e.label, e.speaker_id
            ));
        }
        out
    }
}

/// Parses manifest text (header `path,word_id,label,speaker_id`).
/// Rows are numbered from 1 for the first data row.
pub fn parse_manifest(text: &str) -> Result<DatasetManifest> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::EmptyManifest);
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != HEADER {
        return Err(Error::ManifestRow {
            row: 0,
            reason: format!("expected header '{}', got '{header}'", HEADER.join(",")),
        });
    }

    let mut entries = Vec::new();
    for (row, (_, line)) in lines.enumerate() {
        let row = row + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != HEADER.len() {
            return Err(Error::ManifestRow {
                row,
                reason: format!("expected {} columns, found {}", HEADER.len(), fields.len()),
            });
        }
        let label = fields[2]
            .parse::<Label>()
            .map_err(|reason| Error::ManifestRow { row, reason })?;
        entries.push(ManifestEntry {
            path: fields[0].to_string(),
            word_id: fields[1].to_string(),
            label,
            speaker_id: fields[3].to_string(),
        });
    }
    DatasetManifest::new(entries)
}

/// Reads a manifest file. Relative audio paths must resolve against the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest = parse_manifest(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for (i, e) in manifest.entries().iter().enumerate() {
        if !base.join(&e.path).is_file() {
            return Err(Error::ManifestRow {
                row: i + 1,
                reason: format!("audio file '{}' not found", e.path),
            });
        }
    }
    Ok(manifest)
}
