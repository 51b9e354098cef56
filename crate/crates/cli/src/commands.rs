use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use capt_core::audio::{load_manifest, load_wav_16k, WavDirectory};
use capt_core::dsp::MfccExtractor;
use capt_core::engine::Scorer;
use capt_core::eval::Report;
use capt_core::experiment::{run_experiment, run_single, ExperimentConfig};
use capt_core::nn::{deserialize_model, serialize_model, Variant};
use capt_core::registry::{model_version, parse_glosses, MODEL_EXTENSION};
use serde::Serialize;

use crate::config::Settings;
use crate::service::ScoreResponse;

fn manifest_base(manifest: &Path) -> PathBuf {
    manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// MFCC matrix of one WAV file as CSV text.
pub fn featurize_wav(wav: &Path, settings: &Settings) -> Result<String> {
    let clip = load_wav_16k(wav)?;
    let features = MfccExtractor::new(settings.mfcc.clone())?.extract(&clip)?;
    Ok(features.to_csv())
}

/// Writes `<out>/<path>.csv` for every manifest clip; returns the count.
pub fn featurize_manifest(manifest: &Path, out: &Path, settings: &Settings) -> Result<usize> {
    let m = load_manifest(manifest)?;
    let base = manifest_base(manifest);
    let extractor = MfccExtractor::new(settings.mfcc.clone())?;
    for entry in m.entries() {
        let clip = load_wav_16k(&base.join(&entry.path))?;
        let csv = extractor
            .extract(&clip)
            .with_context(|| format!("featurizing {}", entry.path))?
            .to_csv();
        write(&out.join(format!("{}.csv", entry.path)), csv)?;
    }
    Ok(m.entries().len())
}

#[derive(Debug, Serialize)]
pub struct TrainSummary {
    pub word_id: String,
    pub variant: Variant,
    pub seed: u64,
    pub epochs: usize,
    pub final_loss: f64,
    pub model_path: PathBuf,
    pub model_version: String,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Trains one model per word on its training half, evaluates it on the
/// held-out half and writes `<out>/<word>.model` plus `<out>/<word>.log.csv`,
/// so `out` can be served directly as a registry.
pub fn train(
    manifest: &Path,
    out: &Path,
    words: &[String],
    seed: u64,
    variant: Variant,
    settings: &Settings,
) -> Result<Vec<TrainSummary>> {
    let m = load_manifest(manifest)?;
    let source = WavDirectory::new(manifest_base(manifest));
    let all: Vec<String> = m.word_ids().into_iter().map(str::to_string).collect();
    let selected: Vec<String> = if words.is_empty() {
        all
    } else {
        for w in words {
            if !all.contains(w) {
                bail!("word '{w}' is not in {}", manifest.display());
            }
        }
        words.to_vec()
    };
    let mut summaries = Vec::new();
    for word in &selected {
        let run = run_single(
            &m,
            &source,
            word,
            variant,
            seed,
            &settings.train,
            &settings.mfcc,
        )
        .with_context(|| format!("training word {word}"))?;
        let bytes = serialize_model(&run.model);
        let model_path = out.join(format!("{word}.{MODEL_EXTENSION}"));
        write(&model_path, &bytes)?;
        write(&out.join(format!("{word}.log.csv")), run.log.to_csv())?;
        summaries.push(TrainSummary {
            word_id: word.clone(),
            variant,
            seed,
            epochs: run.log.epochs.len(),
            final_loss: run.log.final_loss().unwrap_or(f64::NAN),
            model_path,
            model_version: model_version(&bytes),
            precision: run.metrics.precision,
            recall: run.metrics.recall,
            accuracy: run.metrics.accuracy,
            f1: run.metrics.f1,
        });
    }
    Ok(summaries)
}

pub fn experiment(
    manifest: &Path,
    out: &Path,
    variants: &[Variant],
    seeds: &[u64],
    glosses: Option<&Path>,
    settings: &Settings,
) -> Result<Report> {
    let m = load_manifest(manifest)?;
    let glosses = match glosses {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_glosses(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let cfg = ExperimentConfig {
        variants: variants.to_vec(),
        seeds: seeds.to_vec(),
        train: settings.train.clone(),
        mfcc: settings.mfcc.clone(),
        glosses,
    };
    let source = WavDirectory::new(manifest_base(manifest));
    Ok(run_experiment(&m, &source, &cfg, out)?)
}

/// Scores one WAV file. The model must have been trained with the current
/// feature settings.
pub fn predict(model_path: &Path, wav: &Path, settings: &Settings) -> Result<ScoreResponse> {
    let bytes =
        std::fs::read(model_path).with_context(|| format!("reading {}", model_path.display()))?;
    let model =
        deserialize_model(&bytes).with_context(|| format!("loading {}", model_path.display()))?;
    let word_id = model.meta.word_id.clone().unwrap_or_else(|| {
        model_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let scorer = Scorer::new(model, &settings.mfcc)?;
    let audio = std::fs::read(wav).with_context(|| format!("reading {}", wav.display()))?;
    let prediction = scorer
        .score_wav(&audio)
        .with_context(|| format!("scoring {}", wav.display()))?;
    Ok(ScoreResponse::new(
        word_id,
        prediction,
        model_version(&bytes),
    ))
}
