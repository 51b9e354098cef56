use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use capt_cli::commands;
use capt_cli::config::Settings;
use capt_cli::service;
use capt_core::nn::Variant;
use capt_core::protocol::DEFAULT_SEEDS;
use capt_core::registry::ModelRegistry;
use clap::{Args, Parser, Subcommand};

/// Train and serve per-word mispronunciation detectors.
#[derive(Debug, Parser)]
#[command(name = "capt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Feature or training setting, e.g. `n_mels=40` or `hidden_dim=64`.
    #[arg(long = "config", value_name = "KEY=VALUE")]
    config: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write MFCC matrices as CSV.
    Featurize {
        /// Single WAV file; prints to stdout unless --out is given.
        #[arg(long, conflicts_with = "manifest")]
        wav: Option<PathBuf>,
        /// Featurize every clip in a manifest into --out.
        #[arg(long, requires = "out")]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train one model per word and write a servable registry directory.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Restrict to these words (repeatable); default is every word.
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "attention_bilstm")]
        variant: Variant,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the word x variant x seed protocol and write reports.
    Experiment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Variants to train (repeatable); default is both.
        #[arg(long = "variant")]
        variants: Vec<Variant>,
        /// `word_id,gloss` CSV used for report labels.
        #[arg(long)]
        glosses: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score one WAV file and print the result as JSON.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        wav: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Serve a registry directory over HTTP.
    Serve {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Featurize {
            wav,
            manifest,
            out,
            overrides,
        } => {
            let settings = Settings::from_overrides(&overrides.config)?;
            match (wav, manifest) {
                (Some(wav), _) => {
                    let csv = commands::featurize_wav(&wav, &settings)?;
                    match out {
                        Some(path) => std::fs::write(&path, csv)
                            .with_context(|| format!("writing {}", path.display()))?,
                        None => print!("{csv}"),
                    }
                }
                (None, Some(manifest)) => {
                    let out = out.expect("clap requires --out with --manifest");
                    let n = commands::featurize_manifest(&manifest, &out, &settings)?;
                    eprintln!("featurized {n} clips into {}", out.display());
                }
                (None, None) => bail!("featurize needs --wav or --manifest"),
            }
        }
        Command::Train {
            manifest,
            out,
            words,
            seed,
            variant,
            overrides,
        } => {
            let settings = Settings::from_overrides(&overrides.config)?;
            for s in commands::train(&manifest, &out, &words, seed, variant, &settings)? {
                println!("{}", serde_json::to_string(&s)?);
            }
        }
        Command::Experiment {
            manifest,
            out,
            seeds,
            variants,
            glosses,
            overrides,
        } => {
            let settings = Settings::from_overrides(&overrides.config)?;
            let seeds = if seeds.is_empty() {
                DEFAULT_SEEDS.to_vec()
            } else {
                seeds
            };
            let variants = if variants.is_empty() {
                Variant::ALL.to_vec()
            } else {
                variants
            };
            let report = commands::experiment(
                &manifest,
                &out,
                &variants,
                &seeds,
                glosses.as_deref(),
                &settings,
            )?;
            print!("{}", report.markdown);
        }
        Command::Predict {
            model,
            wav,
            overrides,
        } => {
            let settings = Settings::from_overrides(&overrides.config)?;
            let response = commands::predict(&model, &wav, &settings)?;
            println!("{}", serde_json::to_string(&response)?);
        }
        Command::Serve {
            registry,
            bind,
            overrides,
        } => {
            let settings = Settings::from_overrides(&overrides.config)?;
            let registry = ModelRegistry::load(&registry, &settings.mfcc)
                .with_context(|| format!("loading registry {}", registry.display()))?;
            let n = registry.len();
            tokio::runtime::Runtime::new()?.block_on(service::serve(registry, bind, |addr| {
                eprintln!("serving {n} word models on http://{addr}");
            }))?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
