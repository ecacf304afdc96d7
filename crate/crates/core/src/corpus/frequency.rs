use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use log::warn;

use super::runs::token_counts;
use super::{csv_line, CorpusError, RunBank};
use crate::lexicon::normalize;

/// Probability of each exemplar under the superordinate category.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    weights: BTreeMap<String, f64>,
}

impl FrequencyTable {
    /// Normalizes nonnegative counts. Zero counts are dropped.
    pub fn from_counts<I, S>(counts: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut raw: BTreeMap<String, f64> = BTreeMap::new();
        for (exemplar, count) in counts {
            if !(count.is_finite() && count >= 0.0) {
                return Err(CorpusError::parse(
                    0,
                    format!(
                        "count for {:?} must be a nonnegative number",
                        exemplar.as_ref()
                    ),
                ));
            }
            if count > 0.0 {
                *raw.entry(normalize(exemplar.as_ref())).or_insert(0.0) += count;
            }
        }
        let total: f64 = raw.values().sum();
        if raw.is_empty() || total <= 0.0 {
            return Err(CorpusError::Empty("frequency table"));
        }
        for w in raw.values_mut() {
            *w /= total;
        }
        Ok(Self { weights: raw })
    }

    pub fn get(&self, exemplar: &str) -> Option<f64> {
        self.weights
            .get(exemplar)
            .or_else(|| self.weights.get(&normalize(exemplar)))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }
}

/// Occurrence frequency of each exemplar across all run tokens.
pub fn gold_frequencies(bank: &RunBank) -> Result<FrequencyTable, CorpusError> {
    let counts = token_counts(bank);
    FrequencyTable::from_counts(counts.into_iter().map(|(k, v)| (k, v as f64)))
}

pub fn load_frequencies(path: impl AsRef<Path>) -> Result<FrequencyTable, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_frequencies(BufReader::new(file))
}

/// Parses `exemplar,count` rows of raw counts.
pub fn read_frequencies<R: Read>(reader: R) -> Result<FrequencyTable, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::parse(csv_line(&e), e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(c_ex), Some(c_n)) = (col("exemplar"), col("count")) else {
        return Err(CorpusError::parse(1, "header must be exemplar,count"));
    };
    let mut counts = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CorpusError::parse(csv_line(&e), e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let exemplar = normalize(record.get(c_ex).unwrap_or(""));
        if exemplar.is_empty() {
            return Err(CorpusError::parse(line, "empty exemplar field"));
        }
        let raw = record.get(c_n).unwrap_or("");
        let count: f64 = raw
            .parse()
            .map_err(|_| CorpusError::parse(line, format!("bad count {raw:?}")))?;
        if !(count.is_finite() && count >= 0.0) {
            return Err(CorpusError::parse(line, format!("bad count {raw:?}")));
        }
        if count == 0.0 {
            warn!("line {line}: zero count for {exemplar:?} dropped");
        }
        counts.push((exemplar, count));
    }
    FrequencyTable::from_counts(counts)
}
