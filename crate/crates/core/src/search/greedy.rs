use super::{dead_end_at, SearchError};
use crate::cues::{ExclusionSet, NextModel};
use crate::lexicon::ExemplarId;

/// Appends the most probable next exemplar `length` times.
pub fn generate_greedy<M: NextModel + ?Sized>(
    model: &M,
    length: usize,
    exclude_repeats: bool,
) -> Result<Vec<ExemplarId>, SearchError> {
    let mut seq = Vec::with_capacity(length);
    let mut excluded = ExclusionSet::new(model.lexicon().len());
    for step in 0..length {
        let dist = model.next(&seq, &excluded).map_err(dead_end_at(step))?;
        let pick = dist.argmax();
        seq.push(pick);
        if exclude_repeats {
            excluded.insert(pick);
        }
    }
    Ok(seq)
}
