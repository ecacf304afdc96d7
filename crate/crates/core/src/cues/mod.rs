//! Next-exemplar distributions from local, global and subcategory cues, or
//! from externally supplied (language model) distributions.

mod external;
mod likelihood;
mod model;

use std::io;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{ExemplarId, Lexicon};

pub use external::{
    load_external, read_external, reweight_external, ExternalDistributions, ExternalModel,
    ExternalRecord, GLOBAL_FLOOR_FACTOR,
};
pub use likelihood::{
    sequence_loglik, switch_mass, switch_mass_at, LoglikOptions, DEFAULT_FLOOR_PROB,
};
pub use model::{next_distribution, CueModel, SubcategoryCue};

#[derive(Debug, Error)]
pub enum CueError {
    #[error("cue weight {name} must be finite and nonnegative, got {value}")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("cannot parse cue weights {0:?} (expected l,g,c)")]
    WeightSyntax(String),
    #[error("beta_global > 0 but the network has no global node attached")]
    MissingGlobal,
    #[error("beta_subcat > 0 requires a transition matrix and category scheme")]
    MissingSubcategory,
    #[error("transition matrix has {matrix} categories but the scheme has {scheme}")]
    CategoryMismatch { matrix: usize, scheme: usize },
    #[error("every candidate scored zero")]
    DeadEnd,
    #[error("no external distribution for prefix [{0}]")]
    UnknownPrefix(String),
    #[error("sequence needs at least two items, got {0}")]
    RunTooShort(usize),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Exponents applied to the local, global and subcategory cues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueWeights {
    pub beta_local: f64,
    pub beta_global: f64,
    pub beta_subcat: f64,
}

impl CueWeights {
    pub fn new(beta_local: f64, beta_global: f64, beta_subcat: f64) -> Result<Self, CueError> {
        for (name, value) in [
            ("beta_local", beta_local),
            ("beta_global", beta_global),
            ("beta_subcat", beta_subcat),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(CueError::InvalidWeight { name, value });
            }
        }
        Ok(Self {
            beta_local,
            beta_global,
            beta_subcat,
        })
    }

    /// Local cue only, as used by random-walk style models.
    pub const LOCAL: Self = Self {
        beta_local: 1.0,
        beta_global: 0.0,
        beta_subcat: 0.0,
    };

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta_local, self.beta_global, self.beta_subcat]
    }
}

impl Default for CueWeights {
    fn default() -> Self {
        Self {
            beta_local: 1.0,
            beta_global: 1.0,
            beta_subcat: 1.0,
        }
    }
}

impl FromStr for CueWeights {
    type Err = CueError;

    /// Parses `l,g,c` (or `l,g` with c = 0).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CueError::WeightSyntax(s.to_owned()))?;
        match parts.as_slice() {
            [l, g] => Self::new(*l, *g, 0.0),
            [l, g, c] => Self::new(*l, *g, *c),
            _ => Err(CueError::WeightSyntax(s.to_owned())),
        }
    }
}

/// `base^exponent` with `0^0 = 1`.
#[inline]
pub(crate) fn pow0(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if exponent == 1.0 {
        base
    } else if base == 0.0 {
        0.0
    } else {
        base.powf(exponent)
    }
}

/// Normalized distribution over candidate exemplars, sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct NextDistribution {
    support: Vec<(ExemplarId, f64)>,
}

impl NextDistribution {
    /// Normalizes positive scores; zero scores are dropped.
    ///
    /// Returns [`CueError::DeadEnd`] if nothing positive remains.
    pub fn from_scores<I>(scores: I) -> Result<Self, CueError>
    where
        I: IntoIterator<Item = (ExemplarId, f64)>,
    {
        let mut support: Vec<(ExemplarId, f64)> =
            scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
        support.sort_by_key(|&(id, _)| id);
        support.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let total: f64 = support.iter().map(|&(_, s)| s).sum();
        if support.is_empty() || !total.is_finite() || total <= 0.0 {
            return Err(CueError::DeadEnd);
        }
        for entry in &mut support {
            entry.1 /= total;
        }
        Ok(Self { support })
    }

    pub fn support(&self) -> &[(ExemplarId, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Probability of `id`, zero outside the support.
    pub fn prob(&self, id: ExemplarId) -> f64 {
        self.support
            .binary_search_by_key(&id, |&(x, _)| x)
            .map(|k| self.support[k].1)
            .unwrap_or(0.0)
    }

    /// Most probable exemplar; ties go to the lowest id.
    pub fn argmax(&self) -> ExemplarId {
        let mut best = self.support[0];
        for &(id, p) in &self.support[1..] {
            if p > best.1 {
                best = (id, p);
            }
        }
        best.0
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .support
            .iter()
            .map(|&(_, p)| if p > 0.0 { p * p.ln() } else { 0.0 })
            .sum::<f64>()
    }

    /// Removes excluded exemplars and renormalizes the rest.
    pub fn without(&self, excluded: &ExclusionSet) -> Result<Self, CueError> {
        Self::from_scores(
            self.support
                .iter()
                .copied()
                .filter(|&(id, _)| !excluded.contains(id)),
        )
    }
}

/// Exemplars that may not be produced next (usually those already said).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExclusionSet {
    mask: Vec<bool>,
    count: usize,
}

impl ExclusionSet {
    pub fn new(size: usize) -> Self {
        Self {
            mask: vec![false; size],
            count: 0,
        }
    }

    pub fn from_items(size: usize, items: &[ExemplarId]) -> Self {
        let mut set = Self::new(size);
        for &id in items {
            set.insert(id);
        }
        set
    }

    pub fn insert(&mut self, id: ExemplarId) {
        if id.index() >= self.mask.len() {
            self.mask.resize(id.index() + 1, false);
        }
        if !self.mask[id.index()] {
            self.mask[id.index()] = true;
            self.count += 1;
        }
    }

    #[inline]
    pub fn contains(&self, id: ExemplarId) -> bool {
        self.mask.get(id.index()).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Anything that yields a next-exemplar distribution given the sequence so far.
pub trait NextModel: Sync {
    fn lexicon(&self) -> &Lexicon;

    /// Distribution of the item following `prefix`; empty prefix means the start.
    fn next(
        &self,
        prefix: &[ExemplarId],
        excluded: &ExclusionSet,
    ) -> Result<NextDistribution, CueError>;
}

impl<M: NextModel + ?Sized> NextModel for &M {
    fn lexicon(&self) -> &Lexicon {
        (**self).lexicon()
    }

    fn next(
        &self,
        prefix: &[ExemplarId],
        excluded: &ExclusionSet,
    ) -> Result<NextDistribution, CueError> {
        (**self).next(prefix, excluded)
    }
}
