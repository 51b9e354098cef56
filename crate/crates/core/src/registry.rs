//! Deployed word models: `<root>/<word_id>.model` plus an optional
//! `registry.csv` (`word_id,gloss`) supplying display glosses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dsp::MfccConfig;
use crate::engine::Scorer;
use crate::error::{Error, Result};
use crate::nn::{deserialize_model, FORMAT_VERSION};

pub const MODEL_EXTENSION: &str = "model";
pub const GLOSS_FILE: &str = "registry.csv";

/// First 12 hex digits of the SHA-256 of a model file.
pub fn model_version(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))[..12].to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct WordInfo {
    pub word_id: String,
    pub gloss: String,
    pub model_version: String,
}

#[derive(Debug, Clone)]
pub struct RegisteredModel {
    pub info: WordInfo,
    pub path: PathBuf,
    pub format_version: u32,
    pub scorer: Scorer,
}

/// Immutable once loaded. Every model is deserialized and bound to the
/// feature configuration up front, so a bad file fails startup.
#[derive(Debug, Clone)]
pub struct ModelRegistry {
    root: PathBuf,
    models: BTreeMap<String, RegisteredModel>,
}

/// Parses `word_id,gloss` rows; a gloss may be double-quoted.
pub fn parse_glosses(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("word_id,gloss") => {}
        other => {
            return Err(Error::InvalidInput(format!(
                "{}: expected header 'word_id,gloss', found {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut glosses = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (word, gloss) = line.split_once(',').ok_or_else(|| {
            Error::InvalidInput(format!("{}: row {} has no gloss", path.display(), i + 1))
        })?;
        let gloss = gloss.trim();
        let gloss = match gloss.strip_prefix('"').and_then(|g| g.strip_suffix('"')) {
            Some(quoted) => quoted.replace("\"\"", "\""),
            None => gloss.to_string(),
        };
        glosses.insert(word.trim().to_string(), gloss);
    }
    Ok(glosses)
}

impl ModelRegistry {
    pub fn load(root: &Path, mfcc_cfg: &MfccConfig) -> Result<Self> {
        let gloss_path = root.join(GLOSS_FILE);
        let mut glosses = if gloss_path.exists() {
            let text =
                std::fs::read_to_string(&gloss_path).map_err(|e| Error::io(&gloss_path, e))?;
            parse_glosses(&text, &gloss_path)?
        } else {
            BTreeMap::new()
        };

        let mut models = BTreeMap::new();
        for dirent in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
            let path = dirent.map_err(|e| Error::io(root, e))?.path();
            if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some(MODEL_EXTENSION)
            {
                continue;
            }
            let Some(word_id) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .map(str::to_string)
            else {
                continue;
            };
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let scorer = deserialize_model(&bytes)
                .and_then(|m| Scorer::new(m, mfcc_cfg))
                .map_err(|e| e.context(path.display().to_string()))?;
            let gloss = glosses.remove(&word_id).unwrap_or_else(|| word_id.clone());
            models.insert(
                word_id.clone(),
                RegisteredModel {
                    info: WordInfo {
                        word_id,
                        gloss,
                        model_version: model_version(&bytes),
                    },
                    path,
                    format_version: FORMAT_VERSION,
                    scorer,
                },
            );
        }
        if let Some(orphan) = glosses.keys().next() {
            return Err(Error::InvalidInput(format!(
                "{} lists '{orphan}' but {orphan}.{MODEL_EXTENSION} does not exist",
                gloss_path.display()
            )));
        }
        if models.is_empty() {
            return Err(Error::EmptyRegistry(root.to_path_buf()));
        }
        Ok(Self {
            root: root.to_path_buf(),
            models,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn get(&self, word_id: &str) -> Result<&RegisteredModel> {
        self.models
            .get(word_id)
            .ok_or_else(|| Error::UnknownWord(word_id.to_string()))
    }

    /// Words sorted by id.
    pub fn words(&self) -> Vec<WordInfo> {
        self.models.values().map(|m| m.info.clone()).collect()
    }
}
