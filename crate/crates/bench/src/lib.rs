//! Synthetic fixtures shared by the benchmarks.

use fluency_core::corpus::FrequencyTable;
use fluency_core::lexicon::{ExemplarId, Lexicon};
use fluency_core::network::SemanticNetwork;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random weighted digraph with a global cue attached.
pub fn network(n: usize, degree: usize, seed: u64) -> SemanticNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let adjacency = (0..n)
        .map(|i| {
            let mut row: Vec<(ExemplarId, f64)> = Vec::with_capacity(degree);
            while row.len() < degree.min(n - 1) {
                let j = rng.random_range(0..n as u32);
                if j as usize != i && !row.iter().any(|&(k, _)| k.0 == j) {
                    row.push((ExemplarId(j), rng.random_range(0.05..1.0)));
                }
            }
            row
        })
        .collect();
    let freqs = FrequencyTable::from_counts(
        names
            .iter()
            .map(|s| (s.as_str(), rng.random_range(1.0..100.0))),
    )
    .unwrap();
    SemanticNetwork::from_parts(Lexicon::from_surfaces(&names), adjacency, 0.0)
        .unwrap()
        .attach_global(&freqs)
        .unwrap()
}

/// `count` random token sequences over a vocabulary of `vocab`.
pub fn sequences(count: usize, len: usize, vocab: u32, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..len).map(|_| rng.random_range(0..vocab)).collect())
        .collect()
}

/// Pretrained-vector text for `n` words in `dim` dimensions.
pub fn embedding_text(n: usize, dim: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        out += &format!("w{i}");
        for _ in 0..dim {
            out += &format!(" {:.4}", rng.random_range(-1.0..1.0f64));
        }
        out.push('\n');
    }
    out
}
