//! Category fluency models over semantic networks.
//!
//! Runs are ingested through [`corpus`], networks are built in [`network`],
//! next-exemplar distributions come from [`cues`], sequences are produced by
//! [`search`] and scored by [`eval`]. [`fit`] estimates cue weights.

pub mod corpus;
pub mod cues;
pub mod eval;
pub mod fit;
pub mod lexicon;
pub mod network;
pub mod search;

pub use corpus::{
    CategoryCoding, CategoryIndex, CategoryScheme, CorpusError, FluencyRun, FrequencyTable,
    RunBank, RunStatistics, TransitionMatrix,
};
pub use cues::{
    CueError, CueModel, CueWeights, ExclusionSet, ExternalDistributions, ExternalModel,
    NextDistribution, NextModel, SubcategoryCue,
};
pub use eval::{BleuScore, EvalError, Scorecard, SwitchProfile, SwitchSignal};
pub use fit::{FitError, FitResult, GridSpec, ModelFamily};
pub use lexicon::{ExemplarId, Lexicon};
pub use network::{NetworkError, SemanticNetwork};
pub use search::{GenerationConfig, LengthPolicy, RawWalk, SearchError, SearchMethod};
