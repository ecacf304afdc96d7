use super::{CueError, ExclusionSet, NextDistribution, NextModel};
use crate::corpus::CategoryIndex;
use crate::lexicon::ExemplarId;

/// Probability charged to transitions the model cannot produce.
pub const DEFAULT_FLOOR_PROB: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoglikOptions {
    /// Log-probability used for out-of-support transitions.
    pub floor_logprob: f64,
    /// Exclude previously produced items from each next-step distribution.
    pub exclude_repeats: bool,
}

impl Default for LoglikOptions {
    fn default() -> Self {
        Self {
            floor_logprob: DEFAULT_FLOOR_PROB.ln(),
            exclude_repeats: true,
        }
    }
}

/// Sum over transitions of `ln P(x[n+1] | x[..=n])`.
pub fn sequence_loglik<M: NextModel + ?Sized>(
    model: &M,
    items: &[ExemplarId],
    opts: LoglikOptions,
) -> Result<f64, CueError> {
    if items.len() < 2 {
        return Err(CueError::RunTooShort(items.len()));
    }
    let mut excluded = ExclusionSet::new(model.lexicon().len());
    let mut total = 0.0;
    for n in 1..items.len() {
        if opts.exclude_repeats {
            excluded.insert(items[n - 1]);
        }
        let lp = match model.next(&items[..n], &excluded) {
            Ok(dist) => {
                let p = dist.prob(items[n]);
                if p > 0.0 {
                    p.ln()
                } else {
                    opts.floor_logprob
                }
            }
            Err(CueError::DeadEnd) => opts.floor_logprob,
            Err(e) => return Err(e),
        };
        total += lp;
    }
    Ok(total)
}

/// Probability mass on candidates sharing no category with `current`.
pub fn switch_mass(dist: &NextDistribution, current: ExemplarId, index: &CategoryIndex) -> f64 {
    dist.support()
        .iter()
        .filter(|&&(x, _)| index.disjoint(current, x))
        .map(|&(_, p)| p)
        .sum()
}

/// [`switch_mass`] of the model's distribution after `prefix`.
pub fn switch_mass_at<M: NextModel + ?Sized>(
    model: &M,
    prefix: &[ExemplarId],
    index: &CategoryIndex,
    excluded: &ExclusionSet,
) -> Result<f64, CueError> {
    let current = *prefix.last().ok_or(CueError::RunTooShort(0))?;
    let dist = model.next(prefix, excluded)?;
    Ok(switch_mass(&dist, current, index))
}
