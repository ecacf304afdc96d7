use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use log::{debug, info, warn};
use serde::Deserialize;

use super::{pow0, CueError, ExclusionSet, NextDistribution, NextModel};
use crate::corpus::FrequencyTable;
use crate::lexicon::{normalize, ExemplarId, Lexicon};

/// Exemplars missing from the frequency table get this fraction of the
/// smallest observed frequency.
pub const GLOBAL_FLOOR_FACTOR: f64 = 1e-2;

#[derive(Deserialize)]
struct RawCandidate {
    exemplar: String,
    prob: f64,
}

#[derive(Deserialize)]
struct RawRecord {
    prefix_id: String,
    prefix: Vec<String>,
    candidates: Vec<RawCandidate>,
}

/// One prefix and the distribution an external model assigned to what follows.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRecord {
    pub prefix_id: String,
    pub prefix: Vec<ExemplarId>,
    /// `None` when the producer found no valid candidate.
    pub distribution: Option<NextDistribution>,
    /// Probability mass missing before renormalization.
    pub shortfall: f64,
}

/// Externally supplied next-exemplar distributions, keyed by prefix.
#[derive(Debug, Clone)]
pub struct ExternalDistributions {
    lexicon: Lexicon,
    records: Vec<ExternalRecord>,
    by_prefix: HashMap<Vec<ExemplarId>, usize>,
    by_id: HashMap<String, usize>,
}

impl ExternalDistributions {
    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn records(&self) -> &[ExternalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn by_prefix(&self, prefix: &[ExemplarId]) -> Option<&ExternalRecord> {
        self.by_prefix.get(prefix).map(|&i| &self.records[i])
    }

    pub fn by_id(&self, prefix_id: &str) -> Option<&ExternalRecord> {
        self.by_id.get(prefix_id).map(|&i| &self.records[i])
    }
}

pub fn load_external(
    path: impl AsRef<Path>,
    base: Option<Lexicon>,
) -> Result<ExternalDistributions, CueError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CueError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_external(BufReader::new(file), base)
}

/// Reads distribution records, one JSON object per line.
///
/// New exemplars extend `base` (or a fresh lexicon). Candidate mass is
/// renormalized; duplicate candidates are summed.
pub fn read_external<R: Read>(
    reader: R,
    base: Option<Lexicon>,
) -> Result<ExternalDistributions, CueError> {
    let mut lexicon = base.unwrap_or_default();
    let mut records = Vec::new();
    let mut by_prefix = HashMap::new();
    let mut by_id = HashMap::new();
    let mut total_shortfall = 0.0;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i as u64 + 1;
        let err = |message: String| CueError::Parse {
            line: lineno,
            message,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        if by_id.contains_key(&raw.prefix_id) {
            return Err(err(format!("duplicate prefix_id {:?}", raw.prefix_id)));
        }
        let mut prefix = Vec::with_capacity(raw.prefix.len());
        for item in &raw.prefix {
            if normalize(item).is_empty() {
                return Err(err("empty exemplar in prefix".into()));
            }
            prefix.push(lexicon.intern(item));
        }
        let mut mass = 0.0;
        let mut scores = Vec::with_capacity(raw.candidates.len());
        for cand in &raw.candidates {
            if !(cand.prob.is_finite() && cand.prob > 0.0 && cand.prob <= 1.0) {
                return Err(err(format!(
                    "probability {} for {:?} outside (0, 1]",
                    cand.prob, cand.exemplar
                )));
            }
            if normalize(&cand.exemplar).is_empty() {
                return Err(err("empty candidate exemplar".into()));
            }
            mass += cand.prob;
            scores.push((lexicon.intern(&cand.exemplar), cand.prob));
        }
        if mass > 1.0 + 1e-6 {
            return Err(err(format!("candidate probabilities sum to {mass} > 1")));
        }
        let distribution = if scores.is_empty() {
            warn!(
                "line {lineno}: prefix {:?} has no candidates",
                raw.prefix_id
            );
            None
        } else {
            Some(NextDistribution::from_scores(scores).map_err(|e| err(e.to_string()))?)
        };
        let shortfall = (1.0 - mass).max(0.0);
        if distribution.is_some() {
            total_shortfall += shortfall;
            debug!(
                "prefix {:?}: renormalized, shortfall {shortfall:.4}",
                raw.prefix_id
            );
        }
        let idx = records.len();
        by_id.insert(raw.prefix_id.clone(), idx);
        if by_prefix.contains_key(&prefix) {
            warn!("line {lineno}: repeated prefix content; keeping the first record");
        } else {
            by_prefix.insert(prefix.clone(), idx);
        }
        records.push(ExternalRecord {
            prefix_id: raw.prefix_id,
            prefix,
            distribution,
            shortfall,
        });
    }
    if !records.is_empty() {
        info!(
            "loaded {} external distributions, mean renormalized shortfall {:.4}",
            records.len(),
            total_shortfall / records.len() as f64
        );
    }
    Ok(ExternalDistributions {
        lexicon,
        records,
        by_prefix,
        by_id,
    })
}

fn global_weight(lexicon: &Lexicon, global: &FrequencyTable, id: ExemplarId, floor: f64) -> f64 {
    global.get(lexicon.surface(id)).unwrap_or(floor)
}

/// Combines an external distribution (as local cue) with a global cue:
/// `p'(x) ∝ p(x)^bl * global(x)^bg` over the same support.
pub fn reweight_external(
    dist: &NextDistribution,
    lexicon: &Lexicon,
    global: &FrequencyTable,
    beta_local: f64,
    beta_global: f64,
) -> Result<NextDistribution, CueError> {
    let floor = global.min_weight() * GLOBAL_FLOOR_FACTOR;
    NextDistribution::from_scores(dist.support().iter().map(|&(id, p)| {
        let g = global_weight(lexicon, global, id, floor);
        (id, pow0(p, beta_local) * pow0(g, beta_global))
    }))
}

/// Looks distributions up by exact prefix, optionally reweighted by a global cue.
#[derive(Debug, Clone)]
pub struct ExternalModel<'a> {
    dists: &'a ExternalDistributions,
    reweight: Option<(&'a FrequencyTable, f64, f64)>,
}

impl<'a> ExternalModel<'a> {
    pub fn new(dists: &'a ExternalDistributions) -> Self {
        Self {
            dists,
            reweight: None,
        }
    }

    pub fn with_global(
        mut self,
        global: &'a FrequencyTable,
        beta_local: f64,
        beta_global: f64,
    ) -> Self {
        self.reweight = Some((global, beta_local, beta_global));
        self
    }
}

impl NextModel for ExternalModel<'_> {
    fn lexicon(&self) -> &Lexicon {
        &self.dists.lexicon
    }

    fn next(
        &self,
        prefix: &[ExemplarId],
        excluded: &ExclusionSet,
    ) -> Result<NextDistribution, CueError> {
        let record = self.dists.by_prefix(prefix).ok_or_else(|| {
            CueError::UnknownPrefix(
                prefix
                    .iter()
                    .map(|&id| self.dists.lexicon.surface(id))
                    .collect::<Vec<_>>()
                    .join(", "),
            )
        })?;
        let dist = record.distribution.as_ref().ok_or(CueError::DeadEnd)?;
        let dist = match self.reweight {
            Some((global, bl, bg)) => reweight_external(dist, &self.dists.lexicon, global, bl, bg)?,
            None => dist.clone(),
        };
        if excluded.is_empty() {
            Ok(dist)
        } else {
            dist.without(excluded)
        }
    }
}
