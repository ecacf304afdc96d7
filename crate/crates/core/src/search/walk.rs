use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use super::SearchError;
use crate::lexicon::ExemplarId;
use crate::network::SemanticNetwork;

/// Steps allowed per requested unique item when turning a walk into a sequence.
pub const WALK_STEP_CAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawWalk {
    /// Visited nodes in order, start included; repeats allowed.
    pub steps: Vec<ExemplarId>,
    /// A node without out-edges ended the walk early.
    pub truncated: bool,
}

fn step<R: Rng + ?Sized>(net: &SemanticNetwork, at: ExemplarId, rng: &mut R) -> Option<ExemplarId> {
    let out = net.neighbors(at);
    if out.is_empty() {
        None
    } else {
        Some(out[rng.random_range(0..out.len() as u32) as usize].0)
    }
}

/// Walk of `steps` nodes from `start`, each move uniform over out-edges (weights ignored).
pub fn random_walk<R: Rng + ?Sized>(
    net: &SemanticNetwork,
    start: ExemplarId,
    steps: usize,
    rng: &mut R,
) -> Result<RawWalk, SearchError> {
    if start.index() >= net.len() {
        return Err(SearchError::UnknownStart(start));
    }
    if steps == 0 {
        return Err(SearchError::Config("walk needs at least one step".into()));
    }
    let mut walk = vec![start];
    let mut truncated = false;
    while walk.len() < steps {
        match step(net, *walk.last().unwrap(), rng) {
            Some(next) => walk.push(next),
            None => {
                truncated = true;
                break;
            }
        }
    }
    Ok(RawWalk {
        steps: walk,
        truncated,
    })
}

/// First occurrences in visiting order.
pub fn censor_repeats(walk: &RawWalk) -> Vec<ExemplarId> {
    let mut seen = HashSet::new();
    walk.steps
        .iter()
        .copied()
        .filter(|x| seen.insert(*x))
        .collect()
}

/// Index of the second visit minus index of the first, for nodes visited twice or more.
pub fn walk_irt(walk: &RawWalk) -> BTreeMap<ExemplarId, usize> {
    let mut first: BTreeMap<ExemplarId, usize> = BTreeMap::new();
    let mut irt = BTreeMap::new();
    for (k, &x) in walk.steps.iter().enumerate() {
        match first.get(&x) {
            None => {
                first.insert(x, k);
            }
            Some(&f) => {
                irt.entry(x).or_insert(k - f);
            }
        }
    }
    irt
}

/// Fluency sequence of up to `length` unique items from a censored random walk.
///
/// The start is drawn from the global distribution (uniform without one). The
/// walk stops at `length` unique items, a dead end, or `WALK_STEP_CAP * length` steps.
pub fn walk_sequence<R: Rng + ?Sized>(
    net: &SemanticNetwork,
    length: usize,
    rng: &mut R,
) -> Result<Vec<ExemplarId>, SearchError> {
    if net.is_empty() {
        return Err(SearchError::Exhausted { step: 0 });
    }
    let start = match net.global() {
        Some(g) => {
            let mut u = rng.random::<f64>() * g.iter().sum::<f64>();
            let mut pick = g.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            for (k, &w) in g.iter().enumerate() {
                if u < w {
                    pick = k;
                    break;
                }
                u -= w;
            }
            ExemplarId(pick as u32)
        }
        None => ExemplarId(rng.random_range(0..net.len() as u32)),
    };
    let cap = WALK_STEP_CAP.saturating_mul(length.max(1));
    let mut seen = HashSet::from([start]);
    let mut seq = vec![start];
    let mut at = start;
    let mut taken = 1;
    while seq.len() < length && taken < cap {
        let Some(next) = step(net, at, rng) else {
            break;
        };
        taken += 1;
        if seen.insert(next) {
            seq.push(next);
        }
        at = next;
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::search::sequence_rng;
    use proptest::prelude::*;

    const A: ExemplarId = ExemplarId(0);
    const B: ExemplarId = ExemplarId(1);
    const C: ExemplarId = ExemplarId(2);

    fn cycle() -> SemanticNetwork {
        let nodes = Lexicon::from_surfaces(["a", "b", "c"]);
        SemanticNetwork::from_parts(
            nodes,
            vec![vec![(B, 1.0)], vec![(C, 1.0)], vec![(A, 1.0)]],
            0.0,
        )
        .unwrap()
    }

    fn raw(steps: &[u32]) -> RawWalk {
        RawWalk {
            steps: steps.iter().map(|&x| ExemplarId(x)).collect(),
            truncated: false,
        }
    }

    #[test]
    fn three_cycle_is_forced() {
        let w = random_walk(&cycle(), A, 6, &mut sequence_rng(0, 0)).unwrap();
        assert_eq!(w.steps, vec![A, B, C, A, B, C]);
        assert!(!w.truncated);
        let irt = walk_irt(&w);
        assert_eq!(irt.len(), 3);
        assert!(irt.values().all(|&v| v == 3));
    }

    #[test]
    fn censoring() {
        assert_eq!(censor_repeats(&raw(&[0, 1, 0, 2])), vec![A, B, C]);
        assert_eq!(censor_repeats(&raw(&[2, 0, 1])), vec![C, A, B]);
        assert_eq!(censor_repeats(&raw(&[0, 0, 0])), vec![A]);
    }

    #[test]
    fn immediate_revisit() {
        let irt = walk_irt(&raw(&[0, 0]));
        assert_eq!(irt[&A], 1);
        assert!(walk_irt(&raw(&[0, 1])).is_empty());
    }

    #[test]
    fn dead_end_truncates() {
        let nodes = Lexicon::from_surfaces(["a", "b"]);
        let net = SemanticNetwork::from_parts(nodes, vec![vec![(B, 0.5)], vec![]], 0.0).unwrap();
        let w = random_walk(&net, A, 5, &mut sequence_rng(0, 0)).unwrap();
        assert_eq!(w.steps, vec![A, B]);
        assert!(w.truncated);
        assert!(random_walk(&net, ExemplarId(9), 5, &mut sequence_rng(0, 0)).is_err());
    }

    #[test]
    fn steps_ignore_weights() {
        let nodes = Lexicon::from_surfaces(["a", "b", "c"]);
        let net = SemanticNetwork::from_parts(
            nodes,
            vec![vec![(B, 0.9), (C, 0.1)], vec![(A, 1.0)], vec![(A, 1.0)]],
            0.0,
        )
        .unwrap();
        let mut rng = sequence_rng(42, 0);
        let n = 20_000;
        let to_b = (0..n)
            .filter(|_| random_walk(&net, A, 2, &mut rng).unwrap().steps[1] == B)
            .count();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((to_b as f64 - n as f64 / 2.0).abs() < 3.0 * sigma, "{to_b}");
    }

    #[test]
    fn walk_sequence_unique_and_capped() {
        let net = cycle();
        let seq = walk_sequence(&net, 3, &mut sequence_rng(1, 0)).unwrap();
        assert_eq!(seq.len(), 3);
        let mut s = seq.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 3);
        // Two-node component: asking for more than it holds stops at the cap.
        let nodes = Lexicon::from_surfaces(["a", "b", "c"]);
        let net = SemanticNetwork::from_parts(
            nodes,
            vec![vec![(B, 1.0)], vec![(A, 1.0)], vec![(A, 1.0)]],
            0.0,
        )
        .unwrap();
        for seed in 0..20 {
            let seq = walk_sequence(&net, 3, &mut sequence_rng(seed, 0)).unwrap();
            assert!(seq.len() <= 3);
            assert!(seq.len() >= 2);
        }
    }

    /// Independent scan: for every node, look for its first two positions.
    fn scan_oracle(steps: &[ExemplarId]) -> BTreeMap<ExemplarId, usize> {
        let mut out = BTreeMap::new();
        for &x in steps {
            let pos: Vec<usize> = (0..steps.len()).filter(|&k| steps[k] == x).collect();
            if pos.len() >= 2 {
                out.insert(x, pos[1] - pos[0]);
            }
        }
        out
    }

    fn arb_graph() -> impl Strategy<Value = SemanticNetwork> {
        (1usize..=6).prop_flat_map(|n| {
            proptest::collection::vec(proptest::bool::weighted(0.5), n * n).prop_map(move |cells| {
                let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
                let adjacency = (0..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&j| j != i && cells[i * n + j])
                            .map(|j| (ExemplarId(j as u32), 1.0))
                            .collect()
                    })
                    .collect();
                SemanticNetwork::from_parts(Lexicon::from_surfaces(&names), adjacency, 0.0).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn irt_matches_scan(net in arb_graph(), len in 1usize..30) {
            for seed in 0..100u64 {
                let start = ExemplarId((seed % net.len() as u64) as u32);
                let w = random_walk(&net, start, len, &mut sequence_rng(seed, 0)).unwrap();
                for pair in w.steps.windows(2) {
                    prop_assert!(net.edge_weight(pair[0], pair[1]).is_some());
                }
                let irt = walk_irt(&w);
                prop_assert_eq!(&irt, &scan_oracle(&w.steps));
                for &v in irt.values() {
                    prop_assert!(v >= 1 && v < w.steps.len());
                }
                let censored = censor_repeats(&w);
                let unique: HashSet<_> = censored.iter().collect();
                prop_assert_eq!(unique.len(), censored.len());
            }
        }
    }
}
