#![allow(dead_code)]

use std::path::{Path, PathBuf};

use capt_core::audio::write_wav;
use capt_core::dsp::MfccConfig;
use capt_core::nn::{serialize_model, ModelParams, Variant};
use capt_core::synth::{synthetic_corpus, SyntheticWord, ToneSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn tone_word(id: &str, correct_hz: f64, wrong_hz: f64, n: usize) -> SyntheticWord {
    let mut correct = ToneSpec::new(correct_hz);
    let mut wrong = ToneSpec::new(wrong_hz);
    correct.duration_secs = 0.12;
    wrong.duration_secs = 0.12;
    SyntheticWord {
        word_id: id.into(),
        correct,
        mispronounced: wrong,
        n_correct: n,
        n_mispronounced: n,
    }
}

/// Writes WAV files and `manifest.csv` under `dir`; returns the manifest path.
pub fn write_corpus(dir: &Path, words: &[SyntheticWord], seed: u64) -> PathBuf {
    let (manifest, clips) = synthetic_corpus(words, seed).unwrap();
    for (path, clip) in clips {
        let full = dir.join(path);
        std::fs::create_dir_all(full.parent().unwrap()).unwrap();
        std::fs::write(full, write_wav(&clip)).unwrap();
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest.to_csv()).unwrap();
    path
}

/// Untrained attention model bound to the default feature settings.
pub fn random_model(word: &str, seed: u64) -> ModelParams {
    let cfg = MfccConfig::default();
    let mut m = ModelParams::init(
        Variant::AttentionBilstm,
        cfg.n_coeffs,
        6,
        12,
        &mut ChaCha8Rng::seed_from_u64(seed),
    );
    m.meta.feature_fingerprint = cfg.fingerprint();
    m.meta.word_id = Some(word.into());
    m.meta.pad_len = Some(4000);
    m
}

pub fn write_model(dir: &Path, word: &str, m: &ModelParams) -> PathBuf {
    let path = dir.join(format!("{word}.model"));
    std::fs::write(&path, serialize_model(m)).unwrap();
    path
}

pub fn tone_wav(freq: f64, rate: u32, secs: f64) -> Vec<u8> {
    let n = (rate as f64 * secs) as usize;
    let samples = (0..n)
        .map(|i| 0.3 * (std::f64::consts::TAU * freq * i as f64 / rate as f64).sin())
        .collect();
    write_wav(&capt_core::audio::AudioClip::new(samples, rate).unwrap())
}
