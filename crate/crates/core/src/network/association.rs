use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use super::{NetworkError, SemanticNetwork};
use crate::lexicon::{normalize, ExemplarId, Lexicon};

/// Free-association cue → target pairs, deduplicated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssociationNorms {
    edges: BTreeMap<(String, String), Option<f64>>,
}

impl AssociationNorms {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an edge. Self-edges are ignored; duplicates keep the max strength.
    pub fn add(&mut self, cue: &str, target: &str, strength: Option<f64>) {
        let (cue, target) = (normalize(cue), normalize(target));
        if cue.is_empty() || target.is_empty() || cue == target {
            return;
        }
        let slot = self.edges.entry((cue, target)).or_insert(strength);
        *slot = match (*slot, strength) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Option<f64>)> {
        self.edges
            .iter()
            .map(|((c, t), s)| (c.as_str(), t.as_str(), *s))
    }
}

pub fn load_norms(path: impl AsRef<Path>) -> Result<AssociationNorms, NetworkError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| NetworkError::io(path, e))?;
    read_norms(BufReader::new(file))
}

/// Parses `cue,target,strength` rows; strength may be blank or absent.
pub fn read_norms<R: Read>(reader: R) -> Result<AssociationNorms, NetworkError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let line_of = |e: &csv::Error| e.position().map(|p| p.line()).unwrap_or(0);
    let headers = rdr
        .headers()
        .map_err(|e| NetworkError::Parse {
            line: line_of(&e),
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(c_cue), Some(c_tgt)) = (col("cue"), col("target")) else {
        return Err(NetworkError::Parse {
            line: 1,
            message: "header must be cue,target[,strength]".into(),
        });
    };
    let c_str = col("strength");
    let mut norms = AssociationNorms::new();
    for record in rdr.records() {
        let record = record.map_err(|e| NetworkError::Parse {
            line: line_of(&e),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let strength = match c_str.and_then(|c| record.get(c)).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => Some(s.parse::<f64>().map_err(|_| NetworkError::Parse {
                line,
                message: format!("bad strength {s:?}"),
            })?),
        };
        norms.add(
            record.get(c_cue).unwrap_or(""),
            record.get(c_tgt).unwrap_or(""),
            strength,
        );
    }
    if norms.is_empty() {
        return Err(NetworkError::Parse {
            line: 0,
            message: "no association edges".into(),
        });
    }
    Ok(norms)
}

/// Unweighted association graph restricted to the lexicon.
///
/// Every lexicon exemplar becomes a node; retained edges have weight 1 and
/// strengths are ignored.
pub fn build_association_network(
    norms: &AssociationNorms,
    lexicon: &Lexicon,
) -> Result<SemanticNetwork, NetworkError> {
    let nodes = Lexicon::from_surfaces(lexicon.surfaces());
    let mut adjacency: Vec<Vec<(ExemplarId, f64)>> = vec![Vec::new(); nodes.len()];
    let mut kept = 0;
    for (cue, target, _) in norms.iter() {
        if let (Some(c), Some(t)) = (nodes.get(cue), nodes.get(target)) {
            adjacency[c.index()].push((t, 1.0));
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(NetworkError::EmptyIntersection);
    }
    SemanticNetwork::from_parts(nodes, adjacency, 0.0)
}
