//! Robustness scoring: text metrics, trial transcripts, OCR adapters and the
//! batch experiment.
//!
//! * character similarity is `1 - levenshtein / max(len)`;
//! * an exact match compares case-sensitively after whitespace normalization;
//! * a response is readable when it contains any alphanumeric character.

#[cfg(feature = "runtime")]
mod experiment;
mod metrics;
#[cfg(feature = "runtime")]
mod ocr;
mod record;
mod report;

#[cfg(feature = "runtime")]
pub use self::experiment::{
    experiment_challenge_id, radius_dir, run_experiment, ExperimentConfig, ExperimentOutcome, REPORT_FILE,
    TRANSCRIPT_FILE,
};
pub use self::metrics::{char_similarity, exact_match, is_readable, levenshtein, normalize_whitespace};
#[cfg(feature = "runtime")]
pub use self::ocr::{
    parse_adapter_config, run_ocr, AdapterConfig, ImageFormat, OcrAdapter, OcrError, IMAGE_PLACEHOLDER,
};
pub use self::record::{
    read_transcript, read_transcript_file, write_transcript, Responder, TranscriptWriter, TrialRecord, MAX_RATING,
    MIN_RATING,
};
pub use self::report::{aggregate, Bucket, Metrics, MetricsReport, RadiusTotals, Totals, REPORT_SCHEMA_VERSION};

use thiserror::Error;

use crate::challenge::ChallengeError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no trial records to aggregate")]
    NoRecords,
    #[error("invalid trial record: {0}")]
    InvalidRecord(String),
    #[error("transcript line {line}: {message}")]
    Transcript { line: usize, message: String },
    #[error("invalid experiment: {0}")]
    Config(String),
    #[cfg(feature = "runtime")]
    #[error(transparent)]
    Ocr(#[from] OcrError),
    #[error(transparent)]
    Challenge(#[from] ChallengeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
