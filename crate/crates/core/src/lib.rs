//! Per-word mispronunciation detection: MFCC front end, attention BiLSTM
//! classifier trained with cost-weighted cross-entropy, the per-word
//! experiment protocol and its evaluation reports.

pub mod audio;
pub mod dsp;
pub mod engine;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod nn;
pub mod protocol;
pub mod registry;
pub mod synth;

pub use error::{Error, Result};
