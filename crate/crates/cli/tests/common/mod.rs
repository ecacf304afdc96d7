//! Synthetic fixtures shared by the CLI integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fluency_core::corpus::FrequencyTable;
use fluency_core::lexicon::{ExemplarId, Lexicon};
use fluency_core::network::SemanticNetwork;
use fluency_core::search::sequence_rng;
use rand::Rng;

pub const CATEGORIES: [&str; 3] = ["pets", "farm", "sea"];
pub const WORDS: [[&str; 6]; 3] = [
    ["dog", "cat", "hamster", "rabbit", "parrot", "goldfish"],
    ["cow", "pig", "sheep", "goat", "horse", "chicken"],
    ["shark", "whale", "dolphin", "octopus", "seal", "crab"],
];

/// Directed random graph with weights in [0.05, 1] and a positive global cue.
pub fn random_network(n: usize, density: f64, seed: u64) -> SemanticNetwork {
    let mut rng = sequence_rng(seed, 0);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut adjacency = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        for j in (0..n).filter(|&j| j != i) {
            if rng.random::<f64>() < density {
                row.push((ExemplarId(j as u32), 0.05 + 0.95 * rng.random::<f64>()));
            }
        }
        adjacency.push(row);
    }
    let freq: Vec<(String, f64)> = names
        .iter()
        .map(|s| (s.clone(), 0.05 + rng.random::<f64>()))
        .collect();
    SemanticNetwork::from_parts(Lexicon::from_surfaces(&names), adjacency, 0.05)
        .unwrap()
        .attach_global(&FrequencyTable::from_counts(freq).unwrap())
        .unwrap()
}

pub struct Dataset {
    pub runs: PathBuf,
    pub scheme: PathBuf,
    pub vectors: PathBuf,
    pub norms: PathBuf,
    pub frequencies: PathBuf,
}

/// Writes a small patchy corpus: 3 categories of 6 exemplars, clustered vectors,
/// association norms and a frequency table.
pub fn write_dataset(dir: &Path, seed: u64) -> Dataset {
    let mut rng = sequence_rng(seed, 0);
    let mut runs = String::from("participant,position,exemplar,irt_seconds\n");
    for p in 0..24 {
        let mut used: Vec<&str> = Vec::new();
        let mut cat = rng.random_range(0..3u32) as usize;
        let len = rng.random_range(6..14u32) as usize;
        while used.len() < len {
            let burst = rng.random_range(1..5u32);
            for _ in 0..burst {
                let fresh: Vec<&str> = WORDS[cat]
                    .iter()
                    .copied()
                    .filter(|w| !used.contains(w))
                    .collect();
                if fresh.is_empty() || used.len() == len {
                    break;
                }
                used.push(fresh[rng.random_range(0..fresh.len() as u32) as usize]);
            }
            cat = (cat + 1 + rng.random_range(0..2u32) as usize) % 3;
        }
        for (k, w) in used.iter().enumerate() {
            let irt = if k == 0 {
                String::new()
            } else {
                format!("{:.2}", 0.5 + 3.0 * rng.random::<f64>())
            };
            writeln!(runs, "p{p},{},{w},{irt}", k + 1).unwrap();
        }
    }
    let mut scheme = String::from("exemplar,categories\n");
    for (c, words) in WORDS.iter().enumerate() {
        for w in words {
            let extra = if *w == "seal" || *w == "goldfish" {
                ";pets"
            } else {
                ""
            };
            writeln!(scheme, "{w},{}{extra}", CATEGORIES[c]).unwrap();
        }
    }
    let mut vectors = String::new();
    let mut norms = String::from("cue,target,strength\n");
    let mut freqs = String::from("exemplar,count\n");
    for (c, words) in WORDS.iter().enumerate() {
        for (k, w) in words.iter().enumerate() {
            let v: Vec<String> = (0..8)
                .map(|d| {
                    let center = if d % 3 == c { 1.0 } else { 0.0 };
                    format!("{:.4}", center + 0.35 * (rng.random::<f64>() - 0.5))
                })
                .collect();
            writeln!(vectors, "{w} {}", v.join(" ")).unwrap();
            writeln!(norms, "{w},{},0.3", words[(k + 1) % 6]).unwrap();
            writeln!(freqs, "{w},{}", 1 + rng.random_range(0..50u32)).unwrap();
        }
        writeln!(norms, "{},{},0.1", words[5], WORDS[(c + 1) % 3][0]).unwrap();
    }
    let d = Dataset {
        runs: dir.join("runs.csv"),
        scheme: dir.join("scheme.csv"),
        vectors: dir.join("vectors.txt"),
        norms: dir.join("norms.csv"),
        frequencies: dir.join("frequencies.csv"),
    };
    fs::write(&d.runs, runs).unwrap();
    fs::write(&d.scheme, scheme).unwrap();
    fs::write(&d.vectors, vectors).unwrap();
    fs::write(&d.norms, norms).unwrap();
    fs::write(&d.frequencies, freqs).unwrap();
    d
}
