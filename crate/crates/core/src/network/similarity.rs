use log::warn;
use rayon::prelude::*;

use super::{EmbeddingTable, NetworkError, SemanticNetwork};
use crate::lexicon::{ExemplarId, Lexicon};

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Cosine-similarity network, pruned below `epsilon`.
///
/// Negative and zero similarities never form edges. Exemplars without a
/// vector are dropped and returned alongside the network.
pub fn build_similarity_network(
    emb: &EmbeddingTable,
    lexicon: &Lexicon,
    epsilon: f64,
) -> Result<(SemanticNetwork, Vec<String>), NetworkError> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(NetworkError::Epsilon(epsilon));
    }
    let mut nodes = Lexicon::new();
    let mut vectors = Vec::new();
    let mut dropped = Vec::new();
    for (_, surface) in lexicon.iter() {
        match emb.resolve(surface) {
            Some(v) if v.iter().any(|&x| x != 0.0) => {
                nodes.intern(surface);
                vectors.push(unit(v));
            }
            _ => dropped.push(surface.to_owned()),
        }
    }
    if nodes.is_empty() {
        return Err(NetworkError::NoResolvableNodes);
    }
    if !dropped.is_empty() {
        warn!(
            "{} exemplars have no vector and were dropped: {}",
            dropped.len(),
            dropped.join(", ")
        );
    }

    // Each row is computed independently, so partitioning cannot change results.
    let adjacency: Vec<Vec<(ExemplarId, f64)>> = (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            let a = &vectors[i];
            let mut row = Vec::new();
            for (j, b) in vectors.iter().enumerate() {
                if i == j {
                    continue;
                }
                let cos: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let w = cos.min(1.0);
                if w > 0.0 && w >= epsilon {
                    row.push((ExemplarId(j as u32), w));
                }
            }
            row
        })
        .collect();
    let net = SemanticNetwork::from_parts(nodes, adjacency, epsilon)?;
    Ok((net, dropped))
}
