use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::NetworkError;

/// Word vectors keyed by token.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Inserts a vector; rejects wrong dimension, zero norm and duplicates.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<(), String> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(format!(
                "{token:?} has {} components, expected {}",
                vector.len(),
                self.dim
            ));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(format!("{token:?} has a non-finite component"));
        }
        if vector.iter().all(|&v| v == 0.0) {
            return Err(format!("{token:?} is a zero vector"));
        }
        if self.vectors.contains_key(&token) {
            return Err(format!("duplicate token {token:?}"));
        }
        self.vectors.insert(token, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vector for an exemplar surface.
    ///
    /// Whole-surface matches win; otherwise a multiword surface is the mean of
    /// its word vectors, and `None` if any word is missing.
    pub fn resolve(&self, surface: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.get(surface) {
            return Some(v.to_vec());
        }
        let words: Vec<&str> = surface.split_whitespace().collect();
        if words.len() < 2 {
            return None;
        }
        let mut mean = vec![0.0; self.dim];
        for word in &words {
            let v = self.get(word)?;
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= words.len() as f64;
        }
        Some(mean)
    }
}

pub fn load_embeddings(
    path: impl AsRef<Path>,
    keep: Option<&HashSet<String>>,
) -> Result<EmbeddingTable, NetworkError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| NetworkError::io(path, e))?;
    read_embeddings(BufReader::new(file), keep)
}

/// Reads `token v1 ... vD` lines. An optional word2vec `count dim` header is
/// skipped. When `keep` is given, other tokens are not stored.
pub fn read_embeddings<R: Read>(
    reader: R,
    keep: Option<&HashSet<String>>,
) -> Result<EmbeddingTable, NetworkError> {
    let mut table: Option<EmbeddingTable> = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i as u64 + 1;
        let parse_err = |message: String| NetworkError::Parse {
            line: lineno,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if i == 0
            && rest.len() == 1
            && token.parse::<u64>().is_ok()
            && rest[0].parse::<u64>().is_ok()
        {
            continue;
        }
        let dim = match &table {
            Some(t) => t.dim(),
            None => rest.len(),
        };
        if rest.len() != dim || dim == 0 {
            return Err(parse_err(format!(
                "expected {dim} components after {token:?}, found {}",
                rest.len()
            )));
        }
        if keep.is_some_and(|k| !k.contains(token)) {
            continue;
        }
        let vector = rest
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(format!("{token:?}: {e}")))?;
        table
            .get_or_insert_with(|| EmbeddingTable::new(dim))
            .insert(token, vector)
            .map_err(parse_err)?;
    }
    table.ok_or(NetworkError::Parse {
        line: 0,
        message: "no embedding vectors found".into(),
    })
}
