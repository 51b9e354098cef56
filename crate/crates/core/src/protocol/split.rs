use rand::seq::SliceRandom;
use serde::Serialize;

use super::seeded_rng;
use crate::audio::{DatasetManifest, Label, ManifestEntry};
use crate::error::{Error, Result};

/// Per-word 50/50 partition. `pos` is the mispronounced class (y = 1),
/// `neg` the correct class (y = 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSplit {
    pub word_id: String,
    pub seed: u64,
    pub train_pos: Vec<ManifestEntry>,
    pub train_neg: Vec<ManifestEntry>,
    pub test_pos: Vec<ManifestEntry>,
    pub test_neg: Vec<ManifestEntry>,
}

/// Shuffles one label class of one word and returns (train, test) with
/// `ceil(n / 2)` entries in the training half. The shuffle depends only on
/// (seed, word, label) and manifest order.
pub(crate) fn halve_class(
    manifest: &DatasetManifest,
    word_id: &str,
    label: Label,
    seed: u64,
) -> (Vec<ManifestEntry>, Vec<ManifestEntry>) {
    let mut entries: Vec<ManifestEntry> = manifest.entries_for(word_id, label).cloned().collect();
    let mut rng = seeded_rng(seed, &format!("split/{word_id}/{label}"));
    entries.shuffle(&mut rng);
    let test = entries.split_off(entries.len().div_ceil(2));
    (entries, test)
}

pub fn split_per_word(manifest: &DatasetManifest, word_id: &str, seed: u64) -> Result<WordSplit> {
    for label in [Label::Correct, Label::Mispronounced] {
        let count = manifest.entries_for(word_id, label).count();
        if count < 2 {
            return Err(Error::ClassTooSmall {
                word_id: word_id.to_string(),
                class: label.as_str(),
                count,
            });
        }
    }
    let (train_neg, test_neg) = halve_class(manifest, word_id, Label::Correct, seed);
    let (train_pos, test_pos) = halve_class(manifest, word_id, Label::Mispronounced, seed);
    Ok(WordSplit {
        word_id: word_id.to_string(),
        seed,
        train_pos,
        train_neg,
        test_pos,
        test_neg,
    })
}
