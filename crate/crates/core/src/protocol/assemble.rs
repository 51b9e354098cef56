use serde::Serialize;

use super::split::{halve_class, WordSplit};
use crate::audio::{DatasetManifest, Label, ManifestEntry};

/// A manifest entry with the class it is trained or tested as. `target`
/// differs from `entry.label` for augmented examples borrowed from other
/// words; `source_word` records where the audio came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledExample {
    pub entry: ManifestEntry,
    pub target: Label,
    pub source_word: String,
}

impl LabeledExample {
    fn own(entry: &ManifestEntry) -> Self {
        Self {
            target: entry.label,
            source_word: entry.word_id.clone(),
            entry: entry.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentData {
    pub word_id: String,
    pub train: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
}

impl ExperimentData {
    pub fn train_counts(&self) -> (usize, usize) {
        let pos = self
            .train
            .iter()
            .filter(|e| e.target == Label::Mispronounced)
            .count();
        (pos, self.train.len() - pos)
    }
}

/// Training set = the word's own training halves plus the training-half
/// correct recordings of every other word, relabeled as mispronounced.
/// The test set holds only the word's own held-out recordings.
pub fn assemble_training_set(
    split: &WordSplit,
    manifest: &DatasetManifest,
    word_id: &str,
) -> ExperimentData {
    let mut train: Vec<LabeledExample> = split
        .train_pos
        .iter()
        .chain(&split.train_neg)
        .map(LabeledExample::own)
        .collect();
    for other in manifest.word_ids().into_iter().filter(|w| *w != word_id) {
        let (borrowed, _) = halve_class(manifest, other, Label::Correct, split.seed);
        train.extend(borrowed.into_iter().map(|entry| LabeledExample {
            target: Label::Mispronounced,
            source_word: entry.word_id.clone(),
            entry,
        }));
    }
    let test = split
        .test_pos
        .iter()
        .chain(&split.test_neg)
        .map(LabeledExample::own)
        .collect();
    ExperimentData {
        word_id: word_id.to_string(),
        train,
        test,
    }
}
