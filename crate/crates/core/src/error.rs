use std::path::PathBuf;

use crate::role::Role;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, configuration documents or unreadable files.
    Config,
    /// Inputs that parse but violate an invariant (fingerprints, ids, dimensions).
    Integrity,
    /// Numerical failure (undefined correlation, non-finite values).
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("grammar: {0}")]
    Grammar(String),

    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },

    #[error("embedding dataset at byte {offset}: {message}")]
    Dataset { offset: u64, message: String },

    #[error("lexicon line {line}: {message}")]
    LexiconParse { line: usize, message: String },

    #[error("word {word:?} is not in the static lexicon{}", sentence_suffix(*.sentence))]
    MissingWord { word: String, sentence: Option<u32> },

    #[error("fingerprint mismatch: expected {expected}, found {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("no {role} record for sentence {sentence}")]
    MissingRecord { sentence: u32, role: Role },

    #[error("sentence {sentence} has no {role} role")]
    MissingRole { sentence: u32, role: Role },

    #[error("distractor pool exhausted for sentence {sentence}")]
    PoolExhausted { sentence: u32 },

    #[error("model alignment: {0}")]
    Alignment(String),

    #[error("pairing: {0}")]
    Pairing(String),

    #[error("correlation undefined: {0} has zero rank variance")]
    UndefinedCorrelation(String),

    #[error("numeric: {0}")]
    Numeric(String),

    #[error("probe: {0}")]
    Probe(String),
}

fn sentence_suffix(sentence: Option<u32>) -> String {
    match sentence {
        Some(id) => format!(" (sentence {id})"),
        None => String::new(),
    }
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_)
            | Error::Io { .. }
            | Error::Grammar(_)
            | Error::Probe(_)
            | Error::MissingRole { .. } => ErrorKind::Config,
            Error::UndefinedCorrelation(_) | Error::Numeric(_) => ErrorKind::Numeric,
            _ => ErrorKind::Integrity,
        }
    }
}
