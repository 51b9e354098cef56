use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid wav: {0}")]
    Wav(String),

    #[error("unsupported encoding: format tag {0}")]
    UnsupportedEncoding(u16),

    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(u16),

    #[error("unsupported channel count: {0}")]
    UnsupportedChannels(u16),

    #[error("sample rate {0} Hz is below the 8000 Hz minimum")]
    SampleRateTooLow(u32),

    #[error("invalid audio clip: {0}")]
    InvalidClip(String),

    #[error("target length {target} is shorter than the longest clip ({longest})")]
    PadTargetTooShort { target: usize, longest: usize },

    #[error("empty manifest")]
    EmptyManifest,

    #[error("manifest row {row}: {reason}")]
    ManifestRow { row: usize, reason: String },

    #[error("clip too short: {len} samples, window needs {window}")]
    ClipTooShort { len: usize, window: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),

    #[error("non-finite loss at epoch {0}")]
    NonFiniteLoss(usize),

    #[error("class too small: {class} (word {word_id}, {count} examples, need 2)")]
    ClassTooSmall {
        word_id: String,
        class: &'static str,
        count: usize,
    },

    #[error("single-class training set")]
    SingleClassTrainingSet,

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("unexpected end of data")]
    UnexpectedEof,

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error(
        "feature fingerprint mismatch: model was trained with {model}, current config is {current}"
    )]
    FingerprintMismatch { model: String, current: String },

    #[error("unknown word")]
    UnknownWord(String),

    #[error("empty registry at {0}")]
    EmptyRegistry(PathBuf),

    #[error("{0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error once context wrappers are peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
