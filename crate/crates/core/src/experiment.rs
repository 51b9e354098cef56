//! Full per-word protocol: every word × variant × seed is split, assembled,
//! trained and evaluated; results are aggregated into the report tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::audio::{AudioSource, DatasetManifest};
use crate::dsp::MfccConfig;
use crate::error::{Error, Result};
use crate::eval::{
    aggregate_seeds, compute_metrics, evaluate_model, render_report, ConfusionCounts, MeanStd,
    MetricSet, Report, SeedAggregate, WordAggregates,
};
use crate::nn::{serialize_model, ModelParams, Variant};
use crate::protocol::{
    assemble_training_set, split_per_word, train_word_model, LabeledClip, TrainConfig, TrainingLog,
    DEFAULT_SEEDS,
};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub word_id: String,
    pub variant: Variant,
    pub seed: u64,
    pub model: ModelParams,
    pub log: TrainingLog,
    pub counts: ConfusionCounts,
    pub metrics: MetricSet,
}

/// Trains and evaluates one model for `word_id` under `seed`. The seed and
/// variant override those in `train_cfg`.
pub fn run_single<S: AudioSource + ?Sized>(
    manifest: &DatasetManifest,
    source: &S,
    word_id: &str,
    variant: Variant,
    seed: u64,
    train_cfg: &TrainConfig,
    mfcc_cfg: &MfccConfig,
) -> Result<RunOutcome> {
    let split = split_per_word(manifest, word_id, seed)?;
    let data = assemble_training_set(&split, manifest, word_id);
    let train = data
        .train
        .iter()
        .map(|ex| {
            let clip = source
                .load(&ex.entry.path)
                .map_err(|e| e.context(format!("training clip {}", ex.entry.path)))?;
            Ok(LabeledClip {
                clip,
                target: ex.target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = TrainConfig {
        seed,
        variant,
        ..train_cfg.clone()
    };
    let (mut model, log) = train_word_model(&train, &cfg, mfcc_cfg)?;
    model.meta.word_id = Some(word_id.to_string());
    let counts = evaluate_model(&model, &data.test, source, mfcc_cfg)?;
    let metrics = compute_metrics(&counts)?;
    Ok(RunOutcome {
        word_id: word_id.to_string(),
        variant,
        seed,
        model,
        log,
        counts,
        metrics,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub mfcc: MfccConfig,
    /// Display labels for the report; missing words use their id.
    pub glosses: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            train: TrainConfig::default(),
            mfcc: MfccConfig::default(),
            glosses: BTreeMap::new(),
        }
    }
}

/// Aggregate over the seeds of one word and variant. A single run is
/// reported with zero spread.
pub fn summarize_runs(runs: &[MetricSet]) -> Result<SeedAggregate> {
    match runs {
        [] => Err(Error::InvalidInput("no runs to summarize".into())),
        [m] => {
            let point = |v| MeanStd { mean: v, std: 0.0 };
            Ok(SeedAggregate {
                precision: point(m.precision),
                recall: point(m.recall),
                accuracy: point(m.accuracy),
                f1: point(m.f1),
                n_seeds: 1,
            })
        }
        _ => aggregate_seeds(runs),
    }
}

/// Artifact locations under an experiment output directory.
#[derive(Debug, Clone)]
pub struct ExperimentLayout {
    pub root: PathBuf,
}

impl ExperimentLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn model_path(&self, word_id: &str, variant: Variant, seed: u64) -> PathBuf {
        self.root
            .join("models")
            .join(word_id)
            .join(variant.as_str())
            .join(format!("seed{seed}.model"))
    }

    pub fn log_path(&self, word_id: &str, variant: Variant, seed: u64) -> PathBuf {
        self.root
            .join("logs")
            .join(format!("{word_id}__{}__seed{seed}.csv", variant.as_str()))
    }

    pub fn runs_csv(&self) -> PathBuf {
        self.root.join("runs.csv")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.root.join("report.csv")
    }

    pub fn report_md(&self) -> PathBuf {
        self.root.join("report.md")
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

const RUNS_HEADER: &str =
    "word_id,variant,seed,epochs,final_loss,tp,tn,fp,fn,precision,recall,accuracy,f1";

/// Runs the whole grid, writing each model and training log as soon as it
/// exists, then `runs.csv`, `report.csv` and `report.md`. An error aborts
/// with the word, variant and seed attached; files already written stay.
pub fn run_experiment<S: AudioSource + ?Sized>(
    manifest: &DatasetManifest,
    source: &S,
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Report> {
    if cfg.variants.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::Config(
            "experiment needs at least one variant and one seed".into(),
        ));
    }
    cfg.train.validate()?;
    cfg.mfcc.validate()?;
    let layout = ExperimentLayout::new(out_dir);
    let mut runs_csv = format!("{RUNS_HEADER}\n");
    let mut words = Vec::new();
    for word_id in manifest.word_ids() {
        let mut results = Vec::new();
        for &variant in &cfg.variants {
            let mut metrics = Vec::new();
            for &seed in &cfg.seeds {
                let run = run_single(
                    manifest, source, word_id, variant, seed, &cfg.train, &cfg.mfcc,
                )
                .map_err(|e| {
                    e.context(format!("word {word_id}, variant {variant}, seed {seed}"))
                })?;
                write_file(
                    &layout.model_path(word_id, variant, seed),
                    &serialize_model(&run.model),
                )?;
                write_file(
                    &layout.log_path(word_id, variant, seed),
                    run.log.to_csv().as_bytes(),
                )?;
                let c = run.counts;
                let m = run.metrics;
                runs_csv.push_str(&format!(
                    "{word_id},{variant},{seed},{},{},{},{},{},{},{},{},{},{}\n",
                    run.log.epochs.len(),
                    run.log.final_loss().unwrap_or(f64::NAN),
                    c.tp,
                    c.tn,
                    c.fp,
                    c.fn_,
                    m.precision,
                    m.recall,
                    m.accuracy,
                    m.f1
                ));
                metrics.push(m);
            }
            results.push((variant, summarize_runs(&metrics)?));
        }
        words.push(WordAggregates {
            word_id: word_id.to_string(),
            gloss: cfg
                .glosses
                .get(word_id)
                .cloned()
                .unwrap_or_else(|| word_id.to_string()),
            results,
        });
    }
    let report = render_report(&words);
    write_file(&layout.runs_csv(), runs_csv.as_bytes())?;
    write_file(&layout.report_csv(), report.csv.as_bytes())?;
    write_file(&layout.report_md(), report.markdown.as_bytes())?;
    Ok(report)
}
