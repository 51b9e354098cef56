//! Test-set scoring, precision/recall/accuracy/F1 and multi-seed summaries.

mod report;

pub use report::{format_cell, render_report, Report, WordAggregates, CSV_HEADER};

use serde::Serialize;

use crate::audio::{AudioSource, Label};
use crate::dsp::MfccConfig;
use crate::engine::Scorer;
use crate::error::{Error, Result};
use crate::nn::{ModelParams, Verdict};
use crate::protocol::LabeledExample;

/// Tallies with mispronunciation as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn record(&mut self, verdict: Verdict, truth: Label) {
        match (verdict, truth) {
            (Verdict::Mispronounced, Label::Mispronounced) => self.tp += 1,
            (Verdict::Correct, Label::Correct) => self.tn += 1,
            (Verdict::Mispronounced, Label::Correct) => self.fp += 1,
            (Verdict::Correct, Label::Mispronounced) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSet {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, accuracy and F1. Zero denominators give 0.
pub fn compute_metrics(c: &ConfusionCounts) -> Result<MetricSet> {
    if c.total() == 0 {
        return Err(Error::InvalidInput(
            "metrics of an empty confusion table".into(),
        ));
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricSet {
        precision,
        recall,
        accuracy: ratio(c.tp + c.tn, c.total()),
        f1,
    })
}

/// Scores each test clip and tallies verdicts against targets.
pub fn evaluate_model<S: AudioSource + ?Sized>(
    m: &ModelParams,
    test: &[LabeledExample],
    source: &S,
    mfcc_cfg: &MfccConfig,
) -> Result<ConfusionCounts> {
    if test.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let scorer = Scorer::new(m.clone(), mfcc_cfg)?;
    let mut counts = ConfusionCounts::default();
    for ex in test {
        let clip = source
            .load(&ex.entry.path)
            .map_err(|e| e.context(format!("test clip {}", ex.entry.path)))?;
        let pred = scorer
            .score_clip(&clip)
            .map_err(|e| e.context(format!("test clip {}", ex.entry.path)))?;
        counts.record(pred.verdict, ex.target);
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedAggregate {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub accuracy: MeanStd,
    pub f1: MeanStd,
    pub n_seeds: usize,
}

/// Arithmetic mean and sample standard deviation (n - 1 divisor).
pub fn mean_std(values: &[f64]) -> Result<MeanStd> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 runs for a sample standard deviation, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanStd {
        mean,
        std: var.sqrt(),
    })
}

pub fn aggregate_seeds(runs: &[MetricSet]) -> Result<SeedAggregate> {
    let pick = |f: fn(&MetricSet) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(SeedAggregate {
        precision: pick(|m| m.precision)?,
        recall: pick(|m| m.recall)?,
        accuracy: pick(|m| m.accuracy)?,
        f1: pick(|m| m.f1)?,
        n_seeds: runs.len(),
    })
}
