use std::str::FromStr;

use log::warn;
use serde::Serialize;

use super::EvalError;
use crate::corpus::CategoryIndex;
use crate::cues::{switch_mass, CueError, ExclusionSet, NextModel};
use crate::lexicon::ExemplarId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchSignal {
    /// Out-of-category probability mass over its mean for the run.
    ProbRatio,
    /// Entropy (nats) of the next-exemplar distribution.
    Entropy,
}

impl FromStr for SwitchSignal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prob-ratio" | "prob_ratio" => Ok(Self::ProbRatio),
            "entropy" => Ok(Self::Entropy),
            other => Err(format!("unknown signal {other:?} (prob-ratio|entropy)")),
        }
    }
}

/// Mean signal at each offset around switches.
///
/// Offset `+1` is the first item of the new patch, `-1` the last item of the old one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchProfile {
    pub signal: SwitchSignal,
    pub offsets: Vec<i32>,
    pub values: Vec<Option<f64>>,
    pub n_events: Vec<usize>,
}

impl SwitchProfile {
    pub fn value_at(&self, offset: i32) -> Option<f64> {
        self.offsets
            .iter()
            .position(|&o| o == offset)
            .and_then(|k| self.values[k])
    }
}

/// Raw signal for each item of `items`, computed from the distribution that
/// predicts it. Position 0 has no current exemplar and is always `None`, as is
/// any position where the model has no distribution.
pub fn run_signals<M: NextModel + ?Sized>(
    model: &M,
    items: &[ExemplarId],
    index: &CategoryIndex,
    signal: SwitchSignal,
    exclude_repeats: bool,
) -> Result<Vec<Option<f64>>, CueError> {
    let mut out = vec![None; items.len()];
    let mut excluded = ExclusionSet::new(model.lexicon().len());
    for k in 1..items.len() {
        if exclude_repeats {
            excluded.insert(items[k - 1]);
        }
        let dist = match model.next(&items[..k], &excluded) {
            Ok(d) => d,
            Err(CueError::DeadEnd | CueError::UnknownPrefix(_)) => continue,
            Err(e) => return Err(e),
        };
        out[k] = Some(match signal {
            SwitchSignal::ProbRatio => switch_mass(&dist, items[k - 1], index),
            SwitchSignal::Entropy => dist.entropy(),
        });
    }
    Ok(out)
}

/// Divides defined signals by their mean; `None` if the mean is not positive.
pub fn prob_ratios(signals: &[Option<f64>]) -> Option<Vec<Option<f64>>> {
    let defined: Vec<f64> = signals.iter().flatten().copied().collect();
    if defined.is_empty() {
        return None;
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    (mean > 0.0).then(|| signals.iter().map(|s| s.map(|v| v / mean)).collect())
}

/// Aligns per-item signals on every switch in `runs` and averages by offset.
pub fn switch_profile<M: NextModel + ?Sized>(
    model: &M,
    runs: &[Vec<ExemplarId>],
    index: &CategoryIndex,
    window: usize,
    signal: SwitchSignal,
    exclude_repeats: bool,
) -> Result<SwitchProfile, EvalError> {
    if window == 0 {
        return Err(EvalError::InvalidWindow);
    }
    let w = window as i32;
    let offsets: Vec<i32> = (-w..=w).filter(|&o| o != 0).collect();
    let mut sums = vec![0.0; offsets.len()];
    let mut n_events = vec![0usize; offsets.len()];
    let (mut no_switch, mut flat) = (0usize, 0usize);
    for items in runs {
        let switches: Vec<usize> = (1..items.len())
            .filter(|&k| index.disjoint(items[k - 1], items[k]))
            .collect();
        if switches.is_empty() {
            no_switch += 1;
            continue;
        }
        let raw = run_signals(model, items, index, signal, exclude_repeats)?;
        let values = match signal {
            SwitchSignal::Entropy => raw,
            SwitchSignal::ProbRatio => match prob_ratios(&raw) {
                Some(v) => v,
                None => {
                    flat += 1;
                    continue;
                }
            },
        };
        for &k in &switches {
            for (slot, &o) in offsets.iter().enumerate() {
                let pos = if o > 0 {
                    k as i64 + o as i64 - 1
                } else {
                    k as i64 + o as i64
                };
                if pos < 1 || pos >= items.len() as i64 {
                    continue;
                }
                if let Some(v) = values[pos as usize] {
                    sums[slot] += v;
                    n_events[slot] += 1;
                }
            }
        }
    }
    if no_switch > 0 {
        warn!("{no_switch} run(s) without a switch skipped");
    }
    if flat > 0 {
        warn!("{flat} run(s) with zero mean switch probability skipped");
    }
    let values = sums
        .iter()
        .zip(&n_events)
        .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
        .collect();
    Ok(SwitchProfile {
        signal,
        offsets,
        values,
        n_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_scheme, CategoryScheme};
    use crate::cues::{CueModel, CueWeights, NextDistribution};
    use crate::lexicon::Lexicon;
    use crate::network::SemanticNetwork;
    use crate::search::generate_greedy;
    use proptest::prelude::*;

    struct Constant(Lexicon, NextDistribution);

    impl NextModel for Constant {
        fn lexicon(&self) -> &Lexicon {
            &self.0
        }
        fn next(&self, _: &[ExemplarId], _: &ExclusionSet) -> Result<NextDistribution, CueError> {
            Ok(self.1.clone())
        }
    }

    fn block_scheme(names: &[String]) -> CategoryScheme {
        let mut text = String::from("exemplar,categories\n");
        for (k, n) in names.iter().enumerate() {
            text += &format!("{n},{}\n", if k < names.len() / 2 { "A" } else { "B" });
        }
        read_scheme(text.as_bytes()).unwrap()
    }

    fn two_cliques() -> SemanticNetwork {
        let names: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let adjacency = (0..10u32)
            .map(|i| {
                (0..10u32)
                    .filter(|&j| j != i)
                    .map(|j| (ExemplarId(j), if (i < 5) == (j < 5) { 0.9 } else { 0.1 }))
                    .collect()
            })
            .collect();
        SemanticNetwork::from_parts(Lexicon::from_surfaces(&names), adjacency, 0.05).unwrap()
    }

    #[test]
    fn constant_model_ratio_is_one() {
        let lex = Lexicon::from_surfaces(["a", "b", "c", "d"]);
        let names: Vec<String> = lex.surfaces().to_vec();
        let idx = CategoryIndex::new(&lex, &block_scheme(&names));
        let m = Constant(
            lex,
            NextDistribution::from_scores((0..4).map(|i| (ExemplarId(i), 1.0))).unwrap(),
        );
        let runs = vec![
            (0..4).map(ExemplarId).collect::<Vec<_>>(),
            vec![ExemplarId(2), ExemplarId(0), ExemplarId(3)],
        ];
        let p = switch_profile(&m, &runs, &idx, 2, SwitchSignal::ProbRatio, false).unwrap();
        for v in p.values.iter().flatten() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(p.offsets, vec![-2, -1, 1, 2]);
    }

    #[test]
    fn one_hot_entropy_is_zero() {
        let lex = Lexicon::from_surfaces(["a", "b", "c", "d"]);
        let names: Vec<String> = lex.surfaces().to_vec();
        let idx = CategoryIndex::new(&lex, &block_scheme(&names));
        let m = Constant(
            lex,
            NextDistribution::from_scores([(ExemplarId(3), 1.0)]).unwrap(),
        );
        let runs = vec![(0..4).map(ExemplarId).collect::<Vec<_>>()];
        let p = switch_profile(&m, &runs, &idx, 1, SwitchSignal::Entropy, false).unwrap();
        assert!(p.values.iter().flatten().all(|&v| v == 0.0));
        assert!(p.n_events.iter().all(|&n| n == 1));
    }

    #[test]
    fn two_clique_switch_spike() {
        let net = two_cliques();
        let idx = CategoryIndex::new(net.nodes(), &block_scheme(net.nodes().surfaces()));
        let model = CueModel::new(&net, CueWeights::LOCAL, None).unwrap();
        let run = generate_greedy(&model, 10, true).unwrap();
        let raw = run_signals(&model, &run, &idx, SwitchSignal::ProbRatio, true).unwrap();
        // Before the switch 1 in-block (0.9) competes with 5 cross edges (0.1); at it, only cross edges remain.
        assert!((raw[4].unwrap() - 0.5 / 1.4).abs() < 1e-12);
        assert_eq!(raw[5], Some(1.0));
        let p = switch_profile(&model, &[run], &idx, 2, SwitchSignal::ProbRatio, true).unwrap();
        let (before, after) = (p.value_at(-1).unwrap(), p.value_at(1).unwrap());
        assert!(after >= 2.0 * before, "{after} vs {before}");
    }

    #[test]
    fn zero_window_rejected() {
        let net = two_cliques();
        let idx = CategoryIndex::new(net.nodes(), &block_scheme(net.nodes().surfaces()));
        let model = CueModel::new(&net, CueWeights::LOCAL, None).unwrap();
        assert!(matches!(
            switch_profile(&model, &[], &idx, 0, SwitchSignal::Entropy, true),
            Err(EvalError::InvalidWindow)
        ));
    }

    proptest! {
        #[test]
        fn run_ratios_average_to_one(perm in Just((0..10u32).collect::<Vec<_>>()).prop_shuffle(), len in 2usize..=10) {
            let net = two_cliques();
            let idx = CategoryIndex::new(net.nodes(), &block_scheme(net.nodes().surfaces()));
            let model = CueModel::new(&net, CueWeights::LOCAL, None).unwrap();
            let run: Vec<ExemplarId> = perm[..len].iter().map(|&i| ExemplarId(i)).collect();
            let raw = run_signals(&model, &run, &idx, SwitchSignal::ProbRatio, true).unwrap();
            if let Some(r) = prob_ratios(&raw) {
                let d: Vec<f64> = r.iter().flatten().copied().collect();
                prop_assert!((d.iter().sum::<f64>() / d.len() as f64 - 1.0).abs() < 1e-12);
                prop_assert!(d.iter().all(|v| v.is_finite() && *v >= 0.0));
            }
        }
    }
}
