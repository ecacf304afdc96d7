//! Human fluency data: runs, category norms, frequencies and derived statistics.

mod frequency;
mod runs;
mod scheme;
mod stats;
mod transitions;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use frequency::{gold_frequencies, load_frequencies, read_frequencies, FrequencyTable};
pub use runs::{
    load_runs, read_runs_csv, read_runs_jsonl, save_runs, write_runs_csv, write_runs_jsonl,
    FluencyRun, RunBank, RunFormat,
};
pub use scheme::{load_scheme, read_scheme, CategoryIndex, CategoryScheme};
pub use stats::{is_switch, run_statistics, RunStatistics};
pub use transitions::{category_transitions, code_categories, CategoryCoding, TransitionMatrix};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("participant {participant}: {message}")]
    Run {
        participant: String,
        message: String,
    },
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("no codable category transitions")]
    NoTransitions,
    #[error("unsupported runs format for {0} (expected .csv or .jsonl)")]
    Format(PathBuf),
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn csv_line(err: &csv::Error) -> u64 {
    err.position().map(|p| p.line()).unwrap_or(0)
}
