use std::cmp::Ordering;

use super::{dead_end_at, SearchError};
use crate::cues::{CueError, ExclusionSet, NextModel};
use crate::lexicon::ExemplarId;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamResult {
    pub items: Vec<ExemplarId>,
    /// Joint log-probability of `items` under the model.
    pub logprob: f64,
}

struct Hypothesis {
    items: Vec<ExemplarId>,
    logprob: f64,
    excluded: ExclusionSet,
}

struct Candidate {
    logprob: f64,
    parent: usize,
    p: f64,
    id: ExemplarId,
}

/// Joint log-prob descending, then parent rank, local probability descending, id.
/// With width 1 this reproduces greedy decoding exactly.
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.logprob
        .total_cmp(&a.logprob)
        .then(a.parent.cmp(&b.parent))
        .then(b.p.total_cmp(&a.p))
        .then(a.id.cmp(&b.id))
}

/// Beam search for the sequence of `length` items with the highest joint probability.
pub fn generate_beam<M: NextModel + ?Sized>(
    model: &M,
    length: usize,
    width: usize,
    exclude_repeats: bool,
) -> Result<BeamResult, SearchError> {
    if width == 0 {
        return Err(SearchError::Config("beam width must be >= 1".into()));
    }
    let mut beam = vec![Hypothesis {
        items: Vec::with_capacity(length),
        logprob: 0.0,
        excluded: ExclusionSet::new(model.lexicon().len()),
    }];
    for step in 0..length {
        let mut pool: Vec<Candidate> = Vec::new();
        for (parent, hyp) in beam.iter().enumerate() {
            let dist = match model.next(&hyp.items, &hyp.excluded) {
                Ok(d) => d,
                Err(CueError::DeadEnd) => continue,
                Err(e) => return Err(e.into()),
            };
            // Only a parent's own top `width` children can survive the cut.
            let mut local: Vec<(ExemplarId, f64)> = dist.support().to_vec();
            local.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            local.truncate(width);
            pool.extend(local.into_iter().map(|(id, p)| Candidate {
                logprob: hyp.logprob + p.ln(),
                parent,
                p,
                id,
            }));
        }
        if pool.is_empty() {
            return Err(dead_end_at(step)(CueError::DeadEnd));
        }
        pool.sort_by(rank);
        pool.truncate(width);
        beam = pool
            .into_iter()
            .map(|c| {
                let parent = &beam[c.parent];
                let mut items = parent.items.clone();
                items.push(c.id);
                let mut excluded = parent.excluded.clone();
                if exclude_repeats {
                    excluded.insert(c.id);
                }
                Hypothesis {
                    items,
                    logprob: c.logprob,
                    excluded,
                }
            })
            .collect();
    }
    let best = beam.swap_remove(0);
    Ok(BeamResult {
        items: best.items,
        logprob: best.logprob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FrequencyTable;
    use crate::cues::{CueModel, CueWeights};
    use crate::lexicon::Lexicon;
    use crate::network::SemanticNetwork;
    use crate::search::generate_greedy;
    use proptest::prelude::*;

    const A: ExemplarId = ExemplarId(0);
    const B: ExemplarId = ExemplarId(1);
    const C: ExemplarId = ExemplarId(2);
    const D: ExemplarId = ExemplarId(3);

    /// Greedy opens with `a` but `b -> a` is the better pair.
    fn trap() -> SemanticNetwork {
        let nodes = Lexicon::from_surfaces(["a", "b", "c", "d"]);
        let adjacency = vec![
            vec![(C, 0.5), (D, 0.5)],
            vec![(A, 0.98), (C, 0.02)],
            vec![(A, 0.5), (D, 0.5)],
            vec![(A, 1.0)],
        ];
        SemanticNetwork::from_parts(nodes, adjacency, 0.0)
            .unwrap()
            .attach_global(
                &FrequencyTable::from_counts([("a", 0.4), ("b", 0.35), ("c", 0.25)]).unwrap(),
            )
            .unwrap()
    }

    /// Best joint log-probability over every sequence of `length` items.
    fn exhaustive<M: NextModel>(model: &M, length: usize, exclude: bool) -> f64 {
        fn go<M: NextModel>(m: &M, seq: &mut Vec<ExemplarId>, left: usize, exclude: bool) -> f64 {
            if left == 0 {
                return 0.0;
            }
            let excluded = if exclude {
                ExclusionSet::from_items(m.lexicon().len(), seq)
            } else {
                ExclusionSet::new(m.lexicon().len())
            };
            let Ok(dist) = m.next(seq, &excluded) else {
                return f64::NEG_INFINITY;
            };
            let mut best = f64::NEG_INFINITY;
            for &(id, p) in dist.support() {
                seq.push(id);
                best = best.max(p.ln() + go(m, seq, left - 1, exclude));
                seq.pop();
            }
            best
        }
        go(model, &mut Vec::new(), length, exclude)
    }

    #[test]
    fn beam_escapes_greedy_trap() {
        let net = trap();
        let model = CueModel::new(&net, CueWeights::LOCAL, None).unwrap();
        let greedy = generate_greedy(&model, 2, true).unwrap();
        assert_eq!(greedy, vec![A, C]);
        let beam = generate_beam(&model, 2, 2, true).unwrap();
        assert_eq!(beam.items, vec![B, A]);
        assert!((beam.logprob - (0.35f64 * 0.98).ln()).abs() < 1e-12);
        assert!((beam.logprob - exhaustive(&model, 2, true)).abs() < 1e-12);
    }

    #[test]
    fn width_one_is_greedy_on_trap() {
        let net = trap();
        let model = CueModel::new(&net, CueWeights::LOCAL, None).unwrap();
        for len in 1..=4 {
            let g = generate_greedy(&model, len, true).unwrap();
            assert_eq!(generate_beam(&model, len, 1, true).unwrap().items, g);
        }
    }

    fn arb_net() -> impl Strategy<Value = SemanticNetwork> {
        (2usize..6).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::option::weighted(0.6, 0.05f64..1.0), n * n),
                proptest::collection::vec(0.01f64..1.0, n),
            )
                .prop_map(move |(cells, freq)| {
                    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
                    let adjacency = (0..n)
                        .map(|i| {
                            (0..n)
                                .filter(|&j| j != i)
                                .filter_map(|j| cells[i * n + j].map(|w| (ExemplarId(j as u32), w)))
                                .collect()
                        })
                        .collect();
                    let table = FrequencyTable::from_counts(
                        names.iter().map(String::as_str).zip(freq.iter().copied()),
                    )
                    .unwrap();
                    SemanticNetwork::from_parts(Lexicon::from_surfaces(&names), adjacency, 0.0)
                        .unwrap()
                        .attach_global(&table)
                        .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn width_one_matches_greedy(net in arb_net(), len in 1usize..5, bl in 0.0f64..3.0, bg in 0.0f64..3.0) {
            let model = CueModel::new(&net, CueWeights::new(bl, bg, 0.0).unwrap(), None).unwrap();
            let len = len.min(net.len());
            let g = generate_greedy(&model, len, true).unwrap();
            prop_assert_eq!(generate_beam(&model, len, 1, true).unwrap().items, g);
        }

        #[test]
        fn wide_beam_is_exact(net in arb_net(), len in 1usize..4, bl in 0.0f64..3.0, bg in 0.0f64..3.0) {
            let model = CueModel::new(&net, CueWeights::new(bl, bg, 0.0).unwrap(), None).unwrap();
            let len = len.min(net.len());
            let width = net.len().pow(len as u32);
            let beam = generate_beam(&model, len, width, true).unwrap();
            prop_assert!((beam.logprob - exhaustive(&model, len, true)).abs() < 1e-9);
        }

        #[test]
        fn beam_never_worse_than_greedy_joint(net in arb_net(), len in 1usize..4) {
            let model = CueModel::new(&net, CueWeights::new(1.0, 1.0, 0.0).unwrap(), None).unwrap();
            let len = len.min(net.len());
            let width = net.len().pow(len as u32);
            let g = generate_beam(&model, len, 1, true).unwrap().logprob;
            prop_assert!(generate_beam(&model, len, width, true).unwrap().logprob >= g - 1e-12);
        }
    }
}
