//! Overlap metrics against human runs and switch-aligned model signals.

mod bleu;
mod profile;
mod scorecard;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::cues::CueError;

pub use bleu::{bleu, brevity_penalty, ngram_precision, BleuScore, ReferenceSet, MAX_ORDER};
pub use profile::{prob_ratios, run_signals, switch_profile, SwitchProfile, SwitchSignal};
pub use scorecard::{
    category_bleu, category_tokens, corpus_eval, score_generations, CatToken, EvalOptions,
    GenerationScores, Scorecard,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("reference bank is empty")]
    EmptyReferences,
    #[error("generation is empty")]
    EmptyGeneration,
    #[error("n-gram order must be 1..=3, got {0}")]
    InvalidOrder(usize),
    #[error("reference {0} cannot be left out: index out of range")]
    BadExclusion(usize),
    #[error("generation has no exemplar in the category scheme")]
    Uncodable,
    #[error("switch window must be >= 1")]
    InvalidWindow,
    #[error(transparent)]
    Cue(#[from] CueError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}
