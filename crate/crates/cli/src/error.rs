use std::fmt;
use std::io;
use std::path::PathBuf;

use fluency_core::corpus::CorpusError;
use fluency_core::cues::CueError;
use fluency_core::eval::EvalError;
use fluency_core::fit::FitError;
use fluency_core::network::NetworkError;
use fluency_core::search::SearchError;
use thiserror::Error;

/// Failure class reported on the last stderr line and as the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Numeric,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Usage => 2,
            Self::Data => 3,
            Self::Numeric => 4,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Usage => "usage",
            Self::Data => "data",
            Self::Numeric => "numeric",
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Cue(#[from] CueError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Self::Usage(_) => Kind::Usage,
            Self::Io { .. } | Self::Corpus(_) => Kind::Data,
            Self::Network(e) => match e {
                NetworkError::Epsilon(_) => Kind::Usage,
                _ => Kind::Data,
            },
            Self::Cue(e) => cue_kind(e),
            Self::Search(e) => match e {
                SearchError::Cue(c) => cue_kind(c),
                SearchError::Exhausted { .. } => Kind::Numeric,
                SearchError::Config(_) => Kind::Usage,
                SearchError::UnknownStart(_) => Kind::Data,
            },
            Self::Eval(e) => match e {
                EvalError::InvalidOrder(_) | EvalError::InvalidWindow => Kind::Usage,
                EvalError::Cue(c) => cue_kind(c),
                _ => Kind::Data,
            },
            Self::Fit(e) => match e {
                FitError::EmptyGrid | FitError::BadGridValue(_) | FitError::BadFolds { .. } => {
                    Kind::Usage
                }
                FitError::Degenerate => Kind::Numeric,
                FitError::EmptyBank => Kind::Data,
                FitError::Cue(c) => cue_kind(c),
            },
        }
    }
}

fn cue_kind(e: &CueError) -> Kind {
    match e {
        CueError::InvalidWeight { .. }
        | CueError::WeightSyntax(_)
        | CueError::MissingGlobal
        | CueError::MissingSubcategory => Kind::Usage,
        CueError::DeadEnd => Kind::Numeric,
        CueError::CategoryMismatch { .. }
        | CueError::UnknownPrefix(_)
        | CueError::RunTooShort(_)
        | CueError::Parse { .. }
        | CueError::Io { .. } => Kind::Data,
    }
}

/// Machine-readable trailer printed as the final stderr line on failure.
pub fn trailer(kind: Kind) -> String {
    format!("ERROR code={} kind={kind}", kind.exit_code())
}
