use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};

use super::scheme::sorted_intersect;
use super::{CategoryScheme, CorpusError};
use crate::lexicon::normalize;

/// Cluster/switch summary of a set of sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStatistics {
    /// Mean length of maximal segments without a switch.
    pub avg_run_length: f64,
    /// Switches as a percentage of transitions.
    pub pct_switch: f64,
    pub switches: usize,
    pub transitions: usize,
    pub segments: usize,
}

/// A switch is a transition between exemplars with disjoint category sets.
///
/// An unmapped exemplar forms a category of its own.
pub fn is_switch(scheme: &CategoryScheme, from: &str, to: &str) -> bool {
    match (scheme.membership(from), scheme.membership(to)) {
        (Some(a), Some(b)) => !sorted_intersect(a, b),
        _ => normalize(from) != normalize(to),
    }
}

/// Pools switches and segments over all nonempty sequences.
pub fn run_statistics<S: AsRef<str>>(
    sequences: &[Vec<S>],
    scheme: &CategoryScheme,
) -> Result<RunStatistics, CorpusError> {
    let mut switches = 0;
    let mut transitions = 0;
    let mut segments = 0;
    let mut tokens = 0;
    let mut unmapped = BTreeSet::new();
    for seq in sequences.iter().filter(|s| !s.is_empty()) {
        segments += 1;
        tokens += seq.len();
        for item in seq {
            if scheme.membership(item.as_ref()).is_none() {
                unmapped.insert(normalize(item.as_ref()));
            }
        }
        for pair in seq.windows(2) {
            transitions += 1;
            if is_switch(scheme, pair[0].as_ref(), pair[1].as_ref()) {
                switches += 1;
                segments += 1;
            }
        }
    }
    if segments == 0 {
        return Err(CorpusError::Empty("sequence list"));
    }
    if !unmapped.is_empty() {
        warn!(
            "{} unmapped exemplars counted as switches: {}",
            unmapped.len(),
            unmapped.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(RunStatistics {
        avg_run_length: tokens as f64 / segments as f64,
        pct_switch: if transitions == 0 {
            0.0
        } else {
            100.0 * switches as f64 / transitions as f64
        },
        switches,
        transitions,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_scheme;
    use proptest::prelude::*;

    fn scheme() -> CategoryScheme {
        read_scheme(&b"exemplar,categories\na1,A\na2,A\na3,A\nb1,B\nb2,B\nb3,B\nab,A;B\n"[..])
            .unwrap()
    }

    #[test]
    fn single_category_has_no_switches() {
        let s = run_statistics(&[vec!["a1", "a2", "a3", "a1", "a2"]], &scheme()).unwrap();
        assert_eq!(s.pct_switch, 0.0);
        assert_eq!(s.avg_run_length, 5.0);
    }

    #[test]
    fn alternating_switches_everywhere() {
        let s = run_statistics(&[vec!["a1", "b1", "a2", "b2", "a3", "b3"]], &scheme()).unwrap();
        assert_eq!(s.pct_switch, 100.0);
        assert_eq!(s.avg_run_length, 1.0);
    }

    #[test]
    fn shared_membership_is_not_a_switch() {
        let s = run_statistics(&[vec!["a1", "ab", "b1"]], &scheme()).unwrap();
        assert_eq!(s.switches, 0);
    }

    #[test]
    fn unmapped_counts_as_switch() {
        let s = run_statistics(&[vec!["a1", "zz", "a2"]], &scheme()).unwrap();
        assert_eq!(s.switches, 2);
        assert!(run_statistics::<&str>(&[], &scheme()).is_err());
    }

    proptest! {
        #[test]
        fn run_length_bounds(
            seq in prop::collection::vec(prop::sample::select(vec!["a1", "a2", "b1", "b2", "ab", "zz"]), 1..20)
        ) {
            let s = run_statistics(std::slice::from_ref(&seq), &scheme()).unwrap();
            prop_assert!(s.avg_run_length >= 1.0);
            prop_assert_eq!(s.pct_switch == 0.0, s.avg_run_length == seq.len() as f64);
        }
    }
}
