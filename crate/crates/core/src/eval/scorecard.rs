use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BleuScore, EvalError, ReferenceSet};
use crate::corpus::{
    code_categories, run_statistics, CategoryCoding, CategoryIndex, CategoryScheme, RunBank,
};
use crate::lexicon::{ExemplarId, Lexicon};

/// Token of a category-coded sequence. Unmapped exemplars keep their identity
/// so coded sequences have the same length as the originals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatToken {
    Category(usize),
    Unmapped(ExemplarId),
}

pub fn category_tokens(
    items: &[ExemplarId],
    index: &CategoryIndex,
    coding: CategoryCoding,
) -> Vec<CatToken> {
    code_categories(items, index, coding)
        .into_iter()
        .zip(items)
        .map(|(code, &id)| code.map_or(CatToken::Unmapped(id), CatToken::Category))
        .collect()
}

/// Category BLEU of `gen` against `refs`, all coded with the same index.
///
/// Errors when no item of `gen` is in the scheme.
pub fn category_bleu(
    gen: &[ExemplarId],
    refs: &[Vec<ExemplarId>],
    index: &CategoryIndex,
    coding: CategoryCoding,
) -> Result<BleuScore, EvalError> {
    if !gen.iter().any(|&x| index.is_mapped(x)) {
        return Err(EvalError::Uncodable);
    }
    let coded: Vec<Vec<CatToken>> = refs
        .iter()
        .map(|r| category_tokens(r, index, coding))
        .collect();
    ReferenceSet::new(&coded)?.bleu(&category_tokens(gen, index, coding), None)
}

/// Table-style summary of a generation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scorecard {
    pub exemplar_bleu: f64,
    pub category_bleu: f64,
    pub avg_run_length: f64,
    pub pct_switch: f64,
    pub n_generations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub coding: CategoryCoding,
    /// Drop the reference whose participant id equals the generation's.
    pub leave_one_out: bool,
}

/// Per-generation scores behind a [`Scorecard`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationScores {
    pub exemplar: Vec<BleuScore>,
    /// `None` for generations with no item in the scheme.
    pub category: Vec<Option<BleuScore>>,
}

/// Maps both banks into one lexicon; reference ids are preserved.
fn shared_ids(
    gens: &RunBank,
    refs: &RunBank,
) -> (Lexicon, Vec<Vec<ExemplarId>>, Vec<Vec<ExemplarId>>) {
    let mut lexicon = refs.lexicon().clone();
    let gen_ids = gens
        .runs()
        .iter()
        .map(|r| {
            r.items
                .iter()
                .map(|&x| lexicon.intern(gens.lexicon().surface(x)))
                .collect()
        })
        .collect();
    let ref_ids = refs.runs().iter().map(|r| r.items.clone()).collect();
    (lexicon, gen_ids, ref_ids)
}

/// Scores every generation against the reference bank.
pub fn score_generations(
    gens: &RunBank,
    refs: &RunBank,
    scheme: &CategoryScheme,
    opts: EvalOptions,
) -> Result<GenerationScores, EvalError> {
    let (lexicon, gen_ids, ref_ids) = shared_ids(gens, refs);
    let index = CategoryIndex::new(&lexicon, scheme);
    let exemplar_refs = ReferenceSet::new(&ref_ids)?;
    let coded: Vec<Vec<CatToken>> = ref_ids
        .iter()
        .map(|r| category_tokens(r, &index, opts.coding))
        .collect();
    let category_refs = ReferenceSet::new(&coded)?;
    let scored: Vec<(BleuScore, Option<BleuScore>)> = gens
        .runs()
        .par_iter()
        .zip(gen_ids.par_iter())
        .map(|(run, ids)| {
            let exclude = if opts.leave_one_out {
                refs.position_of(&run.participant)
            } else {
                None
            };
            let exemplar = exemplar_refs.bleu(ids, exclude)?;
            let category = if ids.iter().any(|&x| index.is_mapped(x)) {
                Some(category_refs.bleu(&category_tokens(ids, &index, opts.coding), exclude)?)
            } else {
                None
            };
            Ok((exemplar, category))
        })
        .collect::<Result<_, EvalError>>()?;
    let short = gen_ids
        .iter()
        .filter(|g| g.len() < super::MAX_ORDER)
        .count();
    if short > 0 {
        warn!(
            "{short} generation(s) shorter than {} items; their higher-order precision is 0",
            super::MAX_ORDER
        );
    }
    let uncodable = scored.iter().filter(|(_, c)| c.is_none()).count();
    if uncodable > 0 {
        warn!("{uncodable} generation(s) have no exemplar in the category scheme; category BLEU counts them as 0");
    }
    let (exemplar, category) = scored.into_iter().unzip();
    Ok(GenerationScores { exemplar, category })
}

/// Mean exemplar and category BLEU plus cluster statistics of the generations.
pub fn corpus_eval(
    gens: &RunBank,
    refs: &RunBank,
    scheme: &CategoryScheme,
    opts: EvalOptions,
) -> Result<Scorecard, EvalError> {
    if gens.is_empty() {
        return Err(EvalError::EmptyGeneration);
    }
    let scores = score_generations(gens, refs, scheme, opts)?;
    let n = gens.len() as f64;
    // Summed in index order so the result does not depend on scheduling.
    let exemplar_bleu = scores.exemplar.iter().map(|b| b.bleu).sum::<f64>() / n;
    let category_bleu = scores
        .category
        .iter()
        .map(|b| b.map_or(0.0, |b| b.bleu))
        .sum::<f64>()
        / n;
    let stats = run_statistics(&gens.sequences(), scheme)?;
    Ok(Scorecard {
        exemplar_bleu,
        category_bleu,
        avg_run_length: stats.avg_run_length,
        pct_switch: stats.pct_switch,
        n_generations: gens.len(),
    })
}
