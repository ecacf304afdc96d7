//! Sequence generation from next-exemplar models.

mod beam;
mod greedy;
mod sample;
mod walk;

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cues::{CueError, NextModel};
use crate::lexicon::ExemplarId;
use crate::network::SemanticNetwork;

pub use beam::{generate_beam, BeamResult};
pub use greedy::generate_greedy;
pub use sample::{generate_sampled, sample_tempered};
pub use walk::{censor_repeats, random_walk, walk_irt, walk_sequence, RawWalk, WALK_STEP_CAP};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Cue(#[from] CueError),
    #[error("no candidate left at step {step}")]
    Exhausted { step: usize },
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("start node {0} is not in the network")]
    UnknownStart(ExemplarId),
}

pub(crate) fn dead_end_at(step: usize) -> impl Fn(CueError) -> SearchError {
    move |e| match e {
        CueError::DeadEnd => SearchError::Exhausted { step },
        other => SearchError::Cue(other),
    }
}

/// How many items each generated sequence should have.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthPolicy {
    Fixed(usize),
    /// Draw uniformly from observed run lengths.
    Empirical(Vec<usize>),
}

impl LengthPolicy {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Self::Fixed(n) => *n,
            Self::Empirical(lengths) => lengths[rng.random_range(0..lengths.len() as u32) as usize],
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        match self {
            Self::Fixed(0) => Err(SearchError::Config("fixed length must be >= 1".into())),
            Self::Empirical(l) if l.is_empty() || l.contains(&0) => Err(SearchError::Config(
                "empirical lengths must be nonempty and positive".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub length: LengthPolicy,
    pub seed: u64,
    /// Sampling temperature; `f64::INFINITY` samples uniformly.
    pub temperature: f64,
    pub beam_width: usize,
    pub exclude_repeats: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            length: LengthPolicy::Fixed(10),
            seed: 0,
            temperature: 1.0,
            beam_width: 10,
            exclude_repeats: true,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        self.length.validate()?;
        if self.beam_width == 0 {
            return Err(SearchError::Config("beam width must be >= 1".into()));
        }
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return Err(SearchError::Config(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Greedy,
    Beam,
    Sample,
}

/// Independent random stream for sequence `index` under `seed`.
pub fn sequence_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn target_length(cfg: &GenerationConfig, rng: &mut ChaCha8Rng, vocab: usize) -> usize {
    let n = cfg.length.draw(rng);
    if cfg.exclude_repeats {
        n.min(vocab)
    } else {
        n
    }
}

/// Generates `n` sequences. Output order follows the sequence index and does
/// not depend on worker scheduling.
pub fn generate_many<M: NextModel + ?Sized>(
    model: &M,
    method: SearchMethod,
    cfg: &GenerationConfig,
    n: usize,
) -> Result<Vec<Vec<ExemplarId>>, SearchError> {
    cfg.validate()?;
    let vocab = model.lexicon().len();
    let lengths: Vec<usize> = (0..n)
        .map(|i| target_length(cfg, &mut sequence_rng(cfg.seed, i as u64), vocab))
        .collect();
    match method {
        SearchMethod::Greedy => {
            // Greedy output of length k is a prefix of the output of length m > k.
            let longest = lengths.iter().copied().max().unwrap_or(0);
            let full = generate_greedy(model, longest, cfg.exclude_repeats)?;
            Ok(lengths.iter().map(|&k| full[..k].to_vec()).collect())
        }
        SearchMethod::Beam => {
            let mut distinct: Vec<usize> = lengths.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let results: Vec<(usize, Vec<ExemplarId>)> = distinct
                .par_iter()
                .map(|&k| {
                    generate_beam(model, k, cfg.beam_width, cfg.exclude_repeats)
                        .map(|r| (k, r.items))
                })
                .collect::<Result<_, _>>()?;
            let by_len: HashMap<usize, Vec<ExemplarId>> = results.into_iter().collect();
            Ok(lengths.iter().map(|k| by_len[k].clone()).collect())
        }
        SearchMethod::Sample => (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = sequence_rng(cfg.seed, i as u64);
                let k = target_length(cfg, &mut rng, vocab);
                generate_sampled(model, k, cfg.temperature, cfg.exclude_repeats, &mut rng)
            })
            .collect(),
    }
}

/// Random-walk generations, one independent stream per sequence.
pub fn walk_many(
    net: &SemanticNetwork,
    cfg: &GenerationConfig,
    n: usize,
) -> Result<Vec<Vec<ExemplarId>>, SearchError> {
    cfg.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sequence_rng(cfg.seed, i as u64);
            let k = target_length(cfg, &mut rng, net.len());
            walk_sequence(net, k, &mut rng)
        })
        .collect()
}
