use super::{pow0, CueError, CueWeights, ExclusionSet, NextDistribution, NextModel};
use crate::corpus::{
    code_categories, CategoryCoding, CategoryIndex, CategoryScheme, TransitionMatrix,
};
use crate::lexicon::{ExemplarId, Lexicon};
use crate::network::SemanticNetwork;

/// Category transition probabilities resolved against a network's nodes.
#[derive(Debug, Clone)]
pub struct SubcategoryCue {
    trans: TransitionMatrix,
    index: CategoryIndex,
    coding: CategoryCoding,
}

impl SubcategoryCue {
    pub fn new(
        nodes: &Lexicon,
        scheme: &CategoryScheme,
        trans: TransitionMatrix,
    ) -> Result<Self, CueError> {
        if trans.num_categories() != scheme.num_categories() {
            return Err(CueError::CategoryMismatch {
                matrix: trans.num_categories(),
                scheme: scheme.num_categories(),
            });
        }
        Ok(Self {
            trans,
            index: CategoryIndex::new(nodes, scheme),
            coding: CategoryCoding::Chained,
        })
    }

    pub fn with_coding(mut self, coding: CategoryCoding) -> Self {
        self.coding = coding;
        self
    }

    pub fn index(&self) -> &CategoryIndex {
        &self.index
    }

    pub fn transitions(&self) -> &TransitionMatrix {
        &self.trans
    }

    /// Coded category of the last prefix item.
    pub fn current_code(&self, prefix: &[ExemplarId]) -> Option<usize> {
        code_categories(prefix, &self.index, self.coding)
            .last()
            .copied()
            .flatten()
    }

    /// Best transition probability into any of the candidate's categories.
    ///
    /// Neutral (1) when either side has no category.
    pub fn factor(&self, current: Option<usize>, candidate: ExemplarId) -> f64 {
        let cats = self.index.categories(candidate);
        match current {
            Some(from) if !cats.is_empty() => cats
                .iter()
                .map(|&to| self.trans.get(from, to))
                .fold(0.0, f64::max),
            _ => 1.0,
        }
    }
}

/// Cue-switching model over a semantic network.
///
/// Scores each candidate by `local^bl * global^bg * subcat^bc` and normalizes.
#[derive(Debug, Clone, Copy)]
pub struct CueModel<'a> {
    net: &'a SemanticNetwork,
    weights: CueWeights,
    subcat: Option<&'a SubcategoryCue>,
    fallback: bool,
}

impl<'a> CueModel<'a> {
    pub fn new(
        net: &'a SemanticNetwork,
        weights: CueWeights,
        subcat: Option<&'a SubcategoryCue>,
    ) -> Result<Self, CueError> {
        if weights.beta_global > 0.0 && net.global().is_none() {
            return Err(CueError::MissingGlobal);
        }
        if weights.beta_subcat > 0.0 && subcat.is_none() {
            return Err(CueError::MissingSubcategory);
        }
        Ok(Self {
            net,
            weights,
            subcat,
            fallback: true,
        })
    }

    /// Disables the dead-end fallback so [`CueError::DeadEnd`] surfaces.
    pub fn without_fallback(mut self) -> Self {
        self.fallback = false;
        self
    }

    pub fn weights(&self) -> CueWeights {
        self.weights
    }

    pub fn network(&self) -> &'a SemanticNetwork {
        self.net
    }

    /// Cue product without any fallback.
    pub fn raw_distribution(
        &self,
        prefix: &[ExemplarId],
        excluded: &ExclusionSet,
    ) -> Result<NextDistribution, CueError> {
        let Some(&current) = prefix.last() else {
            return self.start_distribution(excluded);
        };
        let CueWeights {
            beta_local: bl,
            beta_global: bg,
            beta_subcat: bc,
        } = self.weights;
        let global = self.net.global();
        let code = match (bc > 0.0, self.subcat) {
            (true, Some(sub)) => sub.current_code(prefix),
            _ => None,
        };
        let score = |x: ExemplarId, local: f64| -> f64 {
            let l = pow0(local, bl);
            if l == 0.0 {
                return 0.0;
            }
            let g = match global {
                Some(gl) if bg > 0.0 => pow0(gl[x.index()], bg),
                _ => 1.0,
            };
            let c = match self.subcat {
                Some(sub) if bc > 0.0 => pow0(sub.factor(code, x), bc),
                _ => 1.0,
            };
            l * g * c
        };

        if bl > 0.0 {
            // Non-neighbours have local weight zero and cannot score.
            NextDistribution::from_scores(
                self.net
                    .neighbors(current)
                    .iter()
                    .filter(|(x, _)| !excluded.contains(*x))
                    .map(|&(x, w)| (x, score(x, w))),
            )
        } else {
            NextDistribution::from_scores(
                self.net
                    .nodes()
                    .ids()
                    .filter(|&x| !excluded.contains(x))
                    .map(|x| {
                        let w = self.net.edge_weight(current, x).unwrap_or(0.0);
                        (x, score(x, w))
                    }),
            )
        }
    }

    /// Start of a sequence: the global node's distribution, uniform without one.
    fn start_distribution(&self, excluded: &ExclusionSet) -> Result<NextDistribution, CueError> {
        let ids = self.net.nodes().ids().filter(|&x| !excluded.contains(x));
        match self.net.global() {
            Some(g) => NextDistribution::from_scores(ids.map(|x| (x, g[x.index()]))),
            None => NextDistribution::from_scores(ids.map(|x| (x, 1.0))),
        }
    }

    fn fallback_distribution(&self, excluded: &ExclusionSet) -> Result<NextDistribution, CueError> {
        let ids = || self.net.nodes().ids().filter(|&x| !excluded.contains(x));
        if let Some(g) = self.net.global() {
            if let Ok(d) = NextDistribution::from_scores(ids().map(|x| (x, g[x.index()]))) {
                return Ok(d);
            }
        }
        NextDistribution::from_scores(ids().map(|x| (x, 1.0)))
    }
}

impl NextModel for CueModel<'_> {
    fn lexicon(&self) -> &Lexicon {
        self.net.nodes()
    }

    fn next(
        &self,
        prefix: &[ExemplarId],
        excluded: &ExclusionSet,
    ) -> Result<NextDistribution, CueError> {
        match self.raw_distribution(prefix, excluded) {
            Err(CueError::DeadEnd) if self.fallback => self.fallback_distribution(excluded),
            other => other,
        }
    }
}

/// One-shot cue evaluation at `current` (or the start when `None`), no fallback.
pub fn next_distribution(
    net: &SemanticNetwork,
    subcat: Option<&SubcategoryCue>,
    weights: CueWeights,
    prefix: &[ExemplarId],
    excluded: &ExclusionSet,
) -> Result<NextDistribution, CueError> {
    CueModel::new(net, weights, subcat)?
        .without_fallback()
        .raw_distribution(prefix, excluded)
}
