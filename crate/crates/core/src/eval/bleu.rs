use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use super::EvalError;

/// Highest n-gram order scored.
pub const MAX_ORDER: usize = 3;

/// Overlap score of one generation against a reference bank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BleuScore {
    pub bleu: f64,
    /// Per order 1..=3; `None` when no reference has an n-gram of that order.
    pub precisions: [Option<f64>; MAX_ORDER],
    pub brevity_penalty: f64,
}

impl BleuScore {
    /// Zero precision on any defined order forces the score to 0 (no smoothing).
    fn assemble(precisions: [Option<f64>; MAX_ORDER], brevity_penalty: f64) -> Self {
        let defined: Vec<f64> = precisions.iter().flatten().copied().collect();
        let mean = if defined.is_empty() {
            0.0
        } else {
            defined
                .iter()
                .product::<f64>()
                .powf(1.0 / defined.len() as f64)
        };
        Self {
            bleu: mean * brevity_penalty,
            precisions,
            brevity_penalty,
        }
    }
}

/// `min(1, exp(1 - ref_len / gen_len))`.
pub fn brevity_penalty(ref_len: f64, gen_len: usize) -> f64 {
    (1.0 - ref_len / gen_len as f64).exp().min(1.0)
}

fn counts<T: Hash + Eq + Clone>(seq: &[T], n: usize) -> HashMap<&[T], u32> {
    let mut out = HashMap::new();
    if seq.len() >= n {
        for g in seq.windows(n) {
            *out.entry(g).or_insert(0) += 1;
        }
    }
    out
}

/// N-gram to `(reference index, count)` for every reference containing it.
type NgramTable<T> = HashMap<Vec<T>, Vec<(u32, u32)>>;

/// Reference bank with n-gram counts precomputed once and shared across generations.
///
/// Each n-gram maps to `(reference index, count)` so a single reference can be
/// left out without rebuilding the tables.
#[derive(Debug, Clone)]
pub struct ReferenceSet<T> {
    tables: [NgramTable<T>; MAX_ORDER],
    per_ref_totals: [Vec<u64>; MAX_ORDER],
    grand_totals: [u64; MAX_ORDER],
    lengths: Vec<usize>,
}

impl<T: Hash + Eq + Clone> ReferenceSet<T> {
    pub fn new(refs: &[Vec<T>]) -> Result<Self, EvalError> {
        if refs.is_empty() {
            return Err(EvalError::EmptyReferences);
        }
        let mut tables: [NgramTable<T>; MAX_ORDER] = Default::default();
        let mut per_ref_totals: [Vec<u64>; MAX_ORDER] = Default::default();
        for (order, table) in tables.iter_mut().enumerate() {
            let n = order + 1;
            for (r, seq) in refs.iter().enumerate() {
                let c = counts(seq, n);
                per_ref_totals[order].push(c.values().map(|&v| v as u64).sum());
                for (g, m) in c {
                    table.entry(g.to_vec()).or_default().push((r as u32, m));
                }
            }
        }
        let grand_totals = std::array::from_fn(|o| per_ref_totals[o].iter().sum());
        Ok(Self {
            tables,
            per_ref_totals,
            grand_totals,
            lengths: refs.iter().map(Vec::len).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    fn check_exclusion(&self, exclude: Option<usize>) -> Result<(), EvalError> {
        match exclude {
            Some(r) if r >= self.len() => Err(EvalError::BadExclusion(r)),
            Some(_) if self.len() == 1 => Err(EvalError::EmptyReferences),
            _ => Ok(()),
        }
    }

    /// Mean reference length, optionally leaving one reference out.
    pub fn mean_length(&self, exclude: Option<usize>) -> Result<f64, EvalError> {
        self.check_exclusion(exclude)?;
        let total: usize = self.lengths.iter().sum();
        Ok(match exclude {
            Some(r) => (total - self.lengths[r]) as f64 / (self.len() - 1) as f64,
            None => total as f64 / self.len() as f64,
        })
    }

    /// Sum over references of `min(m_h(g), m_gen(g))` over the reference n-gram count.
    ///
    /// `None` when the (remaining) references contain no n-gram of order `n`.
    pub fn precision(
        &self,
        gen: &[T],
        n: usize,
        exclude: Option<usize>,
    ) -> Result<Option<f64>, EvalError> {
        if !(1..=MAX_ORDER).contains(&n) {
            return Err(EvalError::InvalidOrder(n));
        }
        self.check_exclusion(exclude)?;
        let order = n - 1;
        let denominator =
            self.grand_totals[order] - exclude.map_or(0, |r| self.per_ref_totals[order][r]);
        if denominator == 0 {
            return Ok(None);
        }
        let mut numerator: u64 = 0;
        for (g, m_gen) in counts(gen, n) {
            if let Some(hits) = self.tables[order].get(g) {
                numerator += hits
                    .iter()
                    .filter(|&&(r, _)| Some(r as usize) != exclude)
                    .map(|&(_, m_h)| m_h.min(m_gen) as u64)
                    .sum::<u64>();
            }
        }
        Ok(Some(numerator as f64 / denominator as f64))
    }

    pub fn bleu(&self, gen: &[T], exclude: Option<usize>) -> Result<BleuScore, EvalError> {
        if gen.is_empty() {
            return Err(EvalError::EmptyGeneration);
        }
        let mut precisions = [None; MAX_ORDER];
        for (order, p) in precisions.iter_mut().enumerate() {
            *p = self.precision(gen, order + 1, exclude)?;
        }
        let bp = brevity_penalty(self.mean_length(exclude)?, gen.len());
        Ok(BleuScore::assemble(precisions, bp))
    }
}

/// Order-`n` precision of `gen` against `refs`.
pub fn ngram_precision<T: Hash + Eq + Clone>(
    gen: &[T],
    refs: &[Vec<T>],
    n: usize,
) -> Result<Option<f64>, EvalError> {
    ReferenceSet::new(refs)?.precision(gen, n, None)
}

/// BLEU of `gen` against every sequence in `refs`.
pub fn bleu<T: Hash + Eq + Clone>(gen: &[T], refs: &[Vec<T>]) -> Result<BleuScore, EvalError> {
    ReferenceSet::new(refs)?.bleu(gen, None)
}
