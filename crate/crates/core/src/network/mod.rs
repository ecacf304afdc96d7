//! Semantic networks over exemplars, with an optional global ('animal') node.

mod association;
mod embeddings;
mod similarity;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FrequencyTable;
use crate::lexicon::{ExemplarId, Lexicon};

pub use association::{build_association_network, load_norms, read_norms, AssociationNorms};
pub use embeddings::{load_embeddings, read_embeddings, EmbeddingTable};
pub use similarity::{build_similarity_network, cosine_similarity};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("epsilon must lie in [0, 1), got {0}")]
    Epsilon(f64),
    #[error("no lexicon exemplar could be resolved to a vector")]
    NoResolvableNodes,
    #[error("association norms share no edge with the lexicon")]
    EmptyIntersection,
    #[error("frequency table covers no network node")]
    EmptyCoverage,
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("node {0:?} is not in the network")]
    UnknownNode(String),
}

impl NetworkError {
    fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }
}

/// Directed weighted graph over exemplars.
///
/// Weights lie in (0, 1]; adjacency lists are sorted by neighbour id and
/// contain no self-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNetwork {
    nodes: Lexicon,
    adjacency: Vec<Vec<(ExemplarId, f64)>>,
    global: Option<Vec<f64>>,
    epsilon: f64,
}

impl SemanticNetwork {
    /// Validates and assembles a network from raw parts.
    pub fn from_parts(
        nodes: Lexicon,
        mut adjacency: Vec<Vec<(ExemplarId, f64)>>,
        epsilon: f64,
    ) -> Result<Self, NetworkError> {
        if adjacency.len() != nodes.len() {
            return Err(NetworkError::Invalid(format!(
                "{} adjacency lists for {} nodes",
                adjacency.len(),
                nodes.len()
            )));
        }
        for (src, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(dst, _)| dst);
            for (k, &(dst, w)) in list.iter().enumerate() {
                if dst.index() >= nodes.len() {
                    return Err(NetworkError::Invalid(format!(
                        "edge to unknown node {}",
                        dst.0
                    )));
                }
                if dst.index() == src {
                    return Err(NetworkError::Invalid(format!("self-edge on node {src}")));
                }
                if !(w > 0.0 && w <= 1.0) {
                    return Err(NetworkError::Invalid(format!(
                        "edge weight {w} outside (0, 1]"
                    )));
                }
                if w < epsilon {
                    return Err(NetworkError::Invalid(format!(
                        "edge weight {w} below epsilon {epsilon}"
                    )));
                }
                if k > 0 && list[k - 1].0 == dst {
                    return Err(NetworkError::Invalid(format!(
                        "duplicate edge {src} -> {}",
                        dst.0
                    )));
                }
            }
        }
        Ok(Self {
            nodes,
            adjacency,
            global: None,
            epsilon,
        })
    }

    pub fn nodes(&self) -> &Lexicon {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn neighbors(&self, node: ExemplarId) -> &[(ExemplarId, f64)] {
        &self.adjacency[node.index()]
    }

    pub fn out_degree(&self, node: ExemplarId) -> usize {
        self.adjacency[node.index()].len()
    }

    pub fn edge_weight(&self, from: ExemplarId, to: ExemplarId) -> Option<f64> {
        let list = &self.adjacency[from.index()];
        list.binary_search_by_key(&to, |&(dst, _)| dst)
            .ok()
            .map(|k| list[k].1)
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (ExemplarId, ExemplarId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(src, list)| {
            list.iter()
                .map(move |&(dst, w)| (ExemplarId(src as u32), dst, w))
        })
    }

    /// Global-cue probabilities indexed by node, if attached.
    pub fn global(&self) -> Option<&[f64]> {
        self.global.as_deref()
    }

    pub fn global_prob(&self, node: ExemplarId) -> Option<f64> {
        self.global.as_ref().map(|g| g[node.index()])
    }

    /// Attaches `freq` as the global node, renormalized over network nodes.
    pub fn attach_global(mut self, freq: &FrequencyTable) -> Result<Self, NetworkError> {
        let mut weights = vec![0.0; self.nodes.len()];
        let mut dropped = Vec::new();
        for (exemplar, w) in freq.iter() {
            match self.nodes.get(exemplar) {
                Some(id) => weights[id.index()] += w,
                None => dropped.push(exemplar),
            }
        }
        if !dropped.is_empty() {
            warn!(
                "{} frequency entries are not network nodes and were dropped",
                dropped.len()
            );
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(NetworkError::EmptyCoverage);
        }
        for w in &mut weights {
            *w /= total;
        }
        self.global = Some(weights);
        Ok(self)
    }

    pub fn detach_global(mut self) -> Self {
        self.global = None;
        self
    }

    pub fn to_snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot {
            epsilon: self.epsilon,
            nodes: self.nodes.surfaces().to_vec(),
            edges: self.edges().map(|(s, d, w)| (s.0, d.0, w)).collect(),
            global: self.global.as_ref().map(|g| {
                g.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(i, &p)| (self.nodes.surfaces()[i].clone(), p))
                    .collect()
            }),
        }
    }

    pub fn from_snapshot(snap: NetworkSnapshot) -> Result<Self, NetworkError> {
        let mut nodes = Lexicon::new();
        for name in &snap.nodes {
            let before = nodes.len();
            if name.trim().is_empty() {
                return Err(NetworkError::Invalid("empty node name".into()));
            }
            nodes.intern(name);
            if nodes.len() == before || nodes.surfaces()[before] != *name {
                return Err(NetworkError::Invalid(format!(
                    "node {name:?} is duplicated or not normalized"
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(s, d, w) in &snap.edges {
            let list = adjacency
                .get_mut(s as usize)
                .ok_or_else(|| NetworkError::Invalid(format!("edge from unknown node {s}")))?;
            list.push((ExemplarId(d), w));
        }
        let mut net = Self::from_parts(nodes, adjacency, snap.epsilon)?;
        if let Some(global) = snap.global {
            let mut dense = vec![0.0; net.len()];
            for (name, p) in global {
                let id = net
                    .nodes
                    .get(&name)
                    .ok_or_else(|| NetworkError::UnknownNode(name.clone()))?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(NetworkError::Invalid(format!(
                        "global probability {p} for {name:?}"
                    )));
                }
                dense[id.index()] = p;
            }
            let total: f64 = dense.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(NetworkError::Invalid(format!(
                    "global distribution sums to {total}"
                )));
            }
            net.global = Some(dense);
        }
        Ok(net)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), NetworkError> {
        serde_json::to_writer(writer, &self.to_snapshot()).map_err(|e| NetworkError::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self, NetworkError> {
        let snap: NetworkSnapshot =
            serde_json::from_reader(reader).map_err(|e| NetworkError::Parse {
                line: e.line() as u64,
                message: e.to_string(),
            })?;
        Self::from_snapshot(snap)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetworkError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| NetworkError::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_json(&mut w)?;
        w.flush().map_err(|e| NetworkError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| NetworkError::io(path, e))?;
        Self::read_json(BufReader::new(file))
    }
}

/// JSON cache format. `edges` holds `[src, dst, weight]` with node indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub epsilon: f64,
    pub nodes: Vec<String>,
    pub edges: Vec<(u32, u32, f64)>,
    pub global: Option<BTreeMap<String, f64>>,
}
