use std::collections::HashMap;

use capt_core::audio::{AudioClip, DatasetManifest, Label, ManifestEntry};
use capt_core::dsp::MfccConfig;
use capt_core::experiment::{run_experiment, ExperimentConfig, ExperimentLayout};
use capt_core::nn::{deserialize_model, Variant};
use capt_core::protocol::TrainConfig;
use capt_core::synth::{synthetic_corpus, SyntheticWord, ToneSpec};
use capt_core::Error;

fn corpus() -> (DatasetManifest, HashMap<String, AudioClip>) {
    let word = |id: &str, lo: f64, hi: f64| {
        let mut c = ToneSpec::new(lo);
        let mut m = ToneSpec::new(hi);
        c.duration_secs = 0.1;
        m.duration_secs = 0.1;
        SyntheticWord {
            word_id: id.into(),
            correct: c,
            mispronounced: m,
            n_correct: 6,
            n_mispronounced: 4,
        }
    };
    let (manifest, clips) = synthetic_corpus(
        &[word("alpha", 440.0, 880.0), word("beta", 300.0, 1200.0)],
        9,
    )
    .unwrap();
    (manifest, clips.into_iter().collect())
}

fn quick_config(seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        seeds,
        train: TrainConfig {
            hidden_dim: 4,
            attention_dim: Some(6),
            max_epochs: 3,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn full_grid_writes_every_artifact() {
    let (manifest, source) = corpus();
    let out = tempfile::tempdir().unwrap();
    let cfg = quick_config(vec![0, 1, 2, 3, 4]);
    let report = run_experiment(&manifest, &source, &cfg, out.path()).unwrap();

    let layout = ExperimentLayout::new(out.path());
    let mut models = 0;
    for word in ["alpha", "beta"] {
        for variant in Variant::ALL {
            for seed in 0..5 {
                let bytes = std::fs::read(layout.model_path(word, variant, seed)).unwrap();
                let m = deserialize_model(&bytes).unwrap();
                assert_eq!(m.variant, variant);
                assert_eq!(
                    m.meta.feature_fingerprint,
                    MfccConfig::default().fingerprint()
                );
                let log = std::fs::read_to_string(layout.log_path(word, variant, seed)).unwrap();
                assert_eq!(log.lines().count(), 4);
                models += 1;
            }
        }
    }
    assert_eq!(models, 20);
    assert_eq!(report.csv.lines().count(), 1 + 4);
    assert_eq!(
        std::fs::read_to_string(layout.report_csv()).unwrap(),
        report.csv
    );
    assert_eq!(
        std::fs::read_to_string(layout.report_md()).unwrap(),
        report.markdown
    );
    assert_eq!(
        std::fs::read_to_string(layout.runs_csv())
            .unwrap()
            .lines()
            .count(),
        21
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (manifest, source) = corpus();
    let cfg = quick_config(vec![7]);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&manifest, &source, &cfg, a.path()).unwrap();
    run_experiment(&manifest, &source, &cfg, b.path()).unwrap();
    for name in ["report.csv", "report.md", "runs.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let layout_a = ExperimentLayout::new(a.path());
    let layout_b = ExperimentLayout::new(b.path());
    assert_eq!(
        std::fs::read(layout_a.model_path("beta", Variant::AttentionBilstm, 7)).unwrap(),
        std::fs::read(layout_b.model_path("beta", Variant::AttentionBilstm, 7)).unwrap()
    );
}

#[test]
fn tiny_class_aborts_naming_word_and_class() {
    let (manifest, source) = corpus();
    let mut entries = manifest.entries().to_vec();
    entries.retain(|e| {
        !(e.word_id == "beta" && e.label == Label::Mispronounced && !e.path.ends_with("_0000.wav"))
    });
    let manifest = DatasetManifest::new(entries).unwrap();
    let out = tempfile::tempdir().unwrap();
    let err =
        run_experiment(&manifest, &source, &quick_config(vec![0, 1]), out.path()).unwrap_err();
    let text = err.to_string();
    assert!(
        text.contains("beta") && text.contains("mispronounced"),
        "{text}"
    );
    assert!(matches!(err.root(), Error::ClassTooSmall { count: 1, .. }));
    // alpha finished before beta failed; its artifacts remain
    let layout = ExperimentLayout::new(out.path());
    assert!(layout.model_path("alpha", Variant::Bilstm, 1).exists());
    assert!(!layout.report_csv().exists());
}

#[test]
fn missing_audio_is_reported() {
    let (manifest, _) = corpus();
    let mut entries = manifest.entries().to_vec();
    entries.push(ManifestEntry {
        path: "nowhere.wav".into(),
        word_id: "alpha".into(),
        label: Label::Correct,
        speaker_id: "x".into(),
    });
    let manifest = DatasetManifest::new(entries).unwrap();
    let source: HashMap<String, AudioClip> = HashMap::new();
    let out = tempfile::tempdir().unwrap();
    let err = run_experiment(&manifest, &source, &quick_config(vec![0]), out.path()).unwrap_err();
    assert!(err.to_string().contains("alpha"));
}
