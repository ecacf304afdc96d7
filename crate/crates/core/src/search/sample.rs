use rand::Rng;

use super::{dead_end_at, SearchError};
use crate::cues::{ExclusionSet, NextDistribution, NextModel};
use crate::lexicon::ExemplarId;

/// Draws from `dist` reweighted to `p^(1/temperature)`; infinite temperature is uniform.
pub fn sample_tempered<R: Rng + ?Sized>(
    dist: &NextDistribution,
    temperature: f64,
    rng: &mut R,
) -> ExemplarId {
    let support = dist.support();
    let weights: Vec<f64> = if temperature.is_infinite() {
        vec![1.0; support.len()]
    } else {
        // Shifted by the max log-probability so the largest weight is exactly 1.
        let max = support
            .iter()
            .map(|&(_, p)| p.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        support
            .iter()
            .map(|&(_, p)| ((p.ln() - max) / temperature).exp())
            .collect()
    };
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return support[k].0;
        }
        u -= w;
    }
    // Rounding can leave u marginally above the last weight.
    support[weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(support.len() - 1)]
    .0
}

/// Samples `length` items step by step.
pub fn generate_sampled<M: NextModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    length: usize,
    temperature: f64,
    exclude_repeats: bool,
    rng: &mut R,
) -> Result<Vec<ExemplarId>, SearchError> {
    let mut seq = Vec::with_capacity(length);
    let mut excluded = ExclusionSet::new(model.lexicon().len());
    for step in 0..length {
        let dist = model.next(&seq, &excluded).map_err(dead_end_at(step))?;
        let pick = sample_tempered(&dist, temperature, rng);
        seq.push(pick);
        if exclude_repeats {
            excluded.insert(pick);
        }
    }
    Ok(seq)
}
