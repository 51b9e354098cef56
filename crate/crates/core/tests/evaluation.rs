use std::collections::HashMap;

use capt_core::audio::{AudioClip, Label, ManifestEntry};
use capt_core::dsp::{extract_mfcc, MfccConfig};
use capt_core::eval::{compute_metrics, evaluate_model, ConfusionCounts};
use capt_core::nn::{attention_forward, bilstm_forward, ModelParams, Variant};
use capt_core::protocol::LabeledExample;
use capt_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example(path: &str, label: Label) -> LabeledExample {
    LabeledExample {
        entry: ManifestEntry {
            path: path.into(),
            word_id: "w".into(),
            label,
            speaker_id: "s".into(),
        },
        target: label,
        source_word: "w".into(),
    }
}

fn random_clip(rng: &mut ChaCha8Rng) -> AudioClip {
    let len = rng.random_range(1200..2400);
    let freq = rng.random_range(100.0..3000.0);
    let samples = (0..len)
        .map(|n| {
            0.4 * (freq * n as f64 / 16_000.0 * std::f64::consts::TAU).sin()
                + rng.random_range(-0.05..0.05)
        })
        .collect();
    AudioClip::new(samples, 16_000).unwrap()
}

fn model(cfg: &MfccConfig, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ModelParams::init(Variant::AttentionBilstm, cfg.n_coeffs, 4, 8, &mut rng);
    m.meta.feature_fingerprint = cfg.fingerprint();
    m.meta.pad_len = Some(1800);
    m
}

/// Probability through the step-by-step reference path.
fn oracle_probability(clip: &AudioClip, m: &ModelParams, cfg: &MfccConfig) -> f64 {
    let padded = clip.padded_to(clip.len().max(1800)).unwrap();
    let x = extract_mfcc(&padded, cfg).unwrap();
    let states = bilstm_forward(&x, &m.forward, &m.backward).unwrap();
    let mut mat = ndarray::Array2::zeros((states.len(), states[0].len()));
    for (t, s) in states.iter().enumerate() {
        mat.row_mut(t).assign(s);
    }
    let (v, _) = attention_forward(mat.view(), m.attention.as_ref().unwrap()).unwrap();
    let z = m.output.w.dot(&v) + m.output.b;
    1.0 / (1.0 + (-z).exp())
}

#[test]
fn random_test_set_matches_per_clip_oracle() {
    let cfg = MfccConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = model(&cfg, 5);
    m.output.w.mapv_inplace(|w| w * 40.0);
    let mut source = HashMap::new();
    let mut test = Vec::new();
    for i in 0..200 {
        let path = format!("c{i}.wav");
        source.insert(path.clone(), random_clip(&mut rng));
        let label = if rng.random_bool(0.3) {
            Label::Mispronounced
        } else {
            Label::Correct
        };
        test.push(example(&path, label));
    }

    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for ex in &test {
        let flagged = oracle_probability(&source[&ex.entry.path], &m, &cfg) >= 0.5;
        let wrong = ex.target == Label::Mispronounced;
        match (flagged, wrong) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    assert!(
        tp + fp > 0 && tn + fn_ > 0,
        "oracle verdicts are all one class"
    );

    let counts = evaluate_model(&m, &test, &source, &cfg).unwrap();
    assert_eq!(counts, ConfusionCounts { tp, tn, fp, fn_ });
    assert_eq!(counts.total(), 200);
}

#[test]
fn constant_classifier_flags_everything() {
    let cfg = MfccConfig::default();
    let mut m = model(&cfg, 1);
    m.output.w.fill(0.0);
    m.output.b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut source = HashMap::new();
    let mut test = Vec::new();
    for i in 0..12 {
        let path = format!("{i}.wav");
        source.insert(path.clone(), random_clip(&mut rng));
        test.push(example(
            &path,
            if i < 5 {
                Label::Mispronounced
            } else {
                Label::Correct
            },
        ));
    }
    let c = evaluate_model(&m, &test, &source, &cfg).unwrap();
    assert_eq!(
        c,
        ConfusionCounts {
            tp: 5,
            tn: 0,
            fp: 7,
            fn_: 0
        }
    );
}

#[test]
fn perfect_predictions_have_no_errors() {
    let mut c = ConfusionCounts::default();
    for label in [Label::Correct, Label::Mispronounced, Label::Mispronounced] {
        let verdict = match label {
            Label::Correct => capt_core::nn::Verdict::Correct,
            Label::Mispronounced => capt_core::nn::Verdict::Mispronounced,
        };
        c.record(verdict, label);
    }
    assert_eq!((c.fp, c.fn_), (0, 0));
    let m = compute_metrics(&c).unwrap();
    assert_eq!(
        (m.precision, m.recall, m.accuracy, m.f1),
        (1.0, 1.0, 1.0, 1.0)
    );
}

#[test]
fn unreadable_clip_named_in_error() {
    let cfg = MfccConfig::default();
    let source: HashMap<String, AudioClip> = HashMap::new();
    let test = vec![example("missing/clip_7.wav", Label::Correct)];
    let err = evaluate_model(&model(&cfg, 1), &test, &source, &cfg).unwrap_err();
    assert!(err.to_string().contains("missing/clip_7.wav"), "{err}");
    assert!(evaluate_model(&model(&cfg, 1), &[], &source, &cfg).is_err());
}

#[test]
fn metrics_match_brute_force_tally() {
    for total in 1..=50usize {
        for tp in 0..=total {
            for tn in 0..=total - tp {
                for fp in 0..=total - tp - tn {
                    let fn_ = total - tp - tn - fp;
                    let mut pairs = Vec::new();
                    pairs.extend(std::iter::repeat_n((true, true), tp));
                    pairs.extend(std::iter::repeat_n((false, false), tn));
                    pairs.extend(std::iter::repeat_n((true, false), fp));
                    pairs.extend(std::iter::repeat_n((false, true), fn_));
                    let flagged = pairs.iter().filter(|p| p.0).count();
                    let actual = pairs.iter().filter(|p| p.1).count();
                    let hits = pairs.iter().filter(|p| p.0 && p.1).count();
                    let agree = pairs.iter().filter(|p| p.0 == p.1).count();
                    let p = if flagged == 0 {
                        0.0
                    } else {
                        hits as f64 / flagged as f64
                    };
                    let r = if actual == 0 {
                        0.0
                    } else {
                        hits as f64 / actual as f64
                    };
                    let f = if p + r == 0.0 {
                        0.0
                    } else {
                        2.0 * p * r / (p + r)
                    };
                    let m = compute_metrics(&ConfusionCounts { tp, tn, fp, fn_ }).unwrap();
                    assert_eq!(m.precision, p);
                    assert_eq!(m.recall, r);
                    assert_eq!(m.accuracy, agree as f64 / total as f64);
                    assert!((m.f1 - f).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn empty_table_rejected() {
    assert!(matches!(
        compute_metrics(&ConfusionCounts::default()),
        Err(Error::InvalidInput(_))
    ));
}
