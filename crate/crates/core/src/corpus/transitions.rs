use std::collections::BTreeSet;
use std::str::FromStr;

use log::warn;

use super::{CategoryIndex, CategoryScheme, CorpusError, RunBank};
use crate::lexicon::ExemplarId;

/// Rule for assigning one category to exemplars with several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CategoryCoding {
    /// Keep the previous exemplar's category when shared, else the lowest index.
    #[default]
    Chained,
    /// Always the first category listed in the norms.
    FirstListed,
}

impl FromStr for CategoryCoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chained" => Ok(Self::Chained),
            "first-listed" | "first_listed" => Ok(Self::FirstListed),
            other => Err(format!("unknown coding {other:?} (chained|first-listed)")),
        }
    }
}

/// Codes a sequence to one category per item; `None` for unmapped exemplars.
pub fn code_categories(
    items: &[ExemplarId],
    index: &CategoryIndex,
    coding: CategoryCoding,
) -> Vec<Option<usize>> {
    let mut out = Vec::with_capacity(items.len());
    let mut prev: Option<usize> = None;
    for &id in items {
        let cats = index.categories(id);
        let code = match coding {
            _ if cats.is_empty() => None,
            CategoryCoding::Chained => match prev {
                Some(p) if cats.binary_search(&p).is_ok() => Some(p),
                _ => Some(cats[0]),
            },
            CategoryCoding::FirstListed => index.first_listed(id),
        };
        out.push(code);
        prev = code;
    }
    out
}

/// Row-stochastic matrix of category-to-category transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    probs: Vec<f64>,
    counts: Vec<u64>,
}

impl TransitionMatrix {
    /// Normalizes each row of a square count matrix; empty rows stay zero.
    pub fn from_counts(n: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), n * n, "count matrix must be n x n");
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            let row = &counts[i * n..(i + 1) * n];
            let total: u64 = row.iter().sum();
            if total > 0 {
                for j in 0..n {
                    probs[i * n + j] = row[j] as f64 / total as f64;
                }
            }
        }
        Self { n, probs, counts }
    }

    pub fn num_categories(&self) -> usize {
        self.n
    }

    /// P(next category = `to` | current category = `from`).
    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.probs[from * self.n + to]
    }

    pub fn count(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.n + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.probs[from * self.n..(from + 1) * self.n]
    }

    pub fn row_observed(&self, from: usize) -> bool {
        self.counts[from * self.n..(from + 1) * self.n]
            .iter()
            .any(|&c| c > 0)
    }

    /// Entries strictly above `threshold`, row-major.
    pub fn edges_above(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let p = self.get(i, j);
                if p > threshold {
                    out.push((i, j, p));
                }
            }
        }
        out
    }
}

/// Estimates category transitions from consecutive coded pairs in the bank.
///
/// Pairs touching an unmapped exemplar are skipped.
pub fn category_transitions(
    bank: &RunBank,
    scheme: &CategoryScheme,
    coding: CategoryCoding,
) -> Result<TransitionMatrix, CorpusError> {
    let index = CategoryIndex::new(bank.lexicon(), scheme);
    let n = scheme.num_categories();
    let mut counts = vec![0u64; n * n];
    let mut unmapped = BTreeSet::new();
    for run in bank.runs() {
        for &id in &run.items {
            if !index.is_mapped(id) {
                unmapped.insert(bank.lexicon().surface(id));
            }
        }
        let codes = code_categories(&run.items, &index, coding);
        for pair in codes.windows(2) {
            if let [Some(a), Some(b)] = pair {
                counts[a * n + b] += 1;
            }
        }
    }
    if !unmapped.is_empty() {
        warn!(
            "{} exemplars have no category and are excluded from transitions: {}",
            unmapped.len(),
            unmapped.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(CorpusError::NoTransitions);
    }
    Ok(TransitionMatrix::from_counts(n, counts))
}
