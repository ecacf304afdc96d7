//! Maximum-likelihood cue weights by grid search.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cues::{sequence_loglik, CueError, CueModel, CueWeights, LoglikOptions, SubcategoryCue};
use crate::lexicon::ExemplarId;
use crate::network::SemanticNetwork;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("no run with at least two items to fit on")]
    EmptyBank,
    #[error("grid has no values")]
    EmptyGrid,
    #[error("grid value {0} is not finite and nonnegative")]
    BadGridValue(f64),
    #[error("every grid point has a non-finite log-likelihood")]
    Degenerate,
    #[error("need 2 <= folds <= runs, got {folds} folds for {runs} runs")]
    BadFolds { folds: usize, runs: usize },
    #[error(transparent)]
    Cue(#[from] CueError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// `beta_subcat` fixed at 0.
    LocalGlobal,
    LocalGlobalSubcat,
}

impl ModelFamily {
    fn dims(self) -> usize {
        match self {
            Self::LocalGlobal => 2,
            Self::LocalGlobalSubcat => 3,
        }
    }
}

impl FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local-global" | "local_global" => Ok(Self::LocalGlobal),
            "local-global-subcat" | "local_global_subcat" => Ok(Self::LocalGlobalSubcat),
            other => Err(format!(
                "unknown family {other:?} (local-global|local-global-subcat)"
            )),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LocalGlobal => "local-global",
            Self::LocalGlobalSubcat => "local-global-subcat",
        })
    }
}

/// Values tried on every active dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Sorted ascending, no duplicates.
    pub values: Vec<f64>,
    /// One pass of coordinate refinement at half the grid spacing.
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            values: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
            refine: true,
        }
    }
}

impl GridSpec {
    pub fn new(mut values: Vec<f64>, refine: bool) -> Result<Self, FitError> {
        if values.is_empty() {
            return Err(FitError::EmptyGrid);
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(FitError::BadGridValue(bad));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(Self { values, refine })
    }

    fn points(&self, family: ModelFamily) -> Vec<[f64; 3]> {
        let v = &self.values;
        let subcat: &[f64] = match family {
            ModelFamily::LocalGlobal => &[0.0],
            ModelFamily::LocalGlobalSubcat => v,
        };
        let mut out = Vec::with_capacity(v.len() * v.len() * subcat.len());
        for &l in v {
            for &g in v {
                for &c in subcat {
                    out.push([l, g, c]);
                }
            }
        }
        out
    }

    /// Midpoints between `value` and its grid neighbours.
    fn half_steps(&self, value: f64) -> Vec<f64> {
        let v = &self.values;
        let Some(i) = v.iter().position(|&x| x == value) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if i > 0 {
            out.push((v[i - 1] + v[i]) / 2.0);
        }
        if i + 1 < v.len() {
            out.push((v[i] + v[i + 1]) / 2.0);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub weights: CueWeights,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub weights: CueWeights,
    pub train_loglik: f64,
    pub heldout_loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: ModelFamily,
    pub weights: CueWeights,
    pub loglik: f64,
    pub grid: GridSpec,
    /// Every point evaluated, grid first then refinement, in evaluation order.
    pub evaluated: Vec<GridPoint>,
    pub per_fold: Option<Vec<FoldResult>>,
}

/// Higher log-likelihood first; exact ties go to the lexicographically smaller weights.
fn better(a: &GridPoint, b: &GridPoint) -> Ordering {
    b.loglik.total_cmp(&a.loglik).then_with(|| {
        a.weights
            .as_array()
            .iter()
            .zip(b.weights.as_array())
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Total log-likelihood of `runs` under `weights`; runs shorter than two items are skipped.
pub fn total_loglik(
    net: &SemanticNetwork,
    subcat: Option<&SubcategoryCue>,
    runs: &[Vec<ExemplarId>],
    weights: CueWeights,
    opts: LoglikOptions,
) -> Result<f64, CueError> {
    let model = CueModel::new(net, weights, subcat)?;
    let mut total = 0.0;
    for run in runs.iter().filter(|r| r.len() >= 2) {
        total += sequence_loglik(&model, run, opts)?;
    }
    Ok(total)
}

fn evaluate(
    net: &SemanticNetwork,
    subcat: Option<&SubcategoryCue>,
    runs: &[Vec<ExemplarId>],
    points: &[[f64; 3]],
    opts: LoglikOptions,
) -> Result<Vec<GridPoint>, FitError> {
    points
        .par_iter()
        .map(|&[l, g, c]| {
            let weights = CueWeights::new(l, g, c)?;
            let loglik = total_loglik(net, subcat, runs, weights, opts)?;
            Ok(GridPoint { weights, loglik })
        })
        .collect()
}

fn best_of(points: &[GridPoint]) -> Result<GridPoint, FitError> {
    points
        .iter()
        .filter(|p| p.loglik.is_finite())
        .min_by(|a, b| better(a, b))
        .copied()
        .ok_or(FitError::Degenerate)
}

/// Grid search over cue weights maximizing summed sequence log-likelihood,
/// then (optionally) one coordinate pass over half-step neighbours.
pub fn fit_betas(
    family: ModelFamily,
    net: &SemanticNetwork,
    subcat: Option<&SubcategoryCue>,
    runs: &[Vec<ExemplarId>],
    grid: &GridSpec,
    opts: LoglikOptions,
) -> Result<FitResult, FitError> {
    if grid.values.is_empty() {
        return Err(FitError::EmptyGrid);
    }
    if !runs.iter().any(|r| r.len() >= 2) {
        return Err(FitError::EmptyBank);
    }
    let mut evaluated = evaluate(net, subcat, runs, &grid.points(family), opts)?;
    let mut best = best_of(&evaluated)?;
    if grid.refine {
        for dim in 0..family.dims() {
            let base = best.weights.as_array();
            let candidates: Vec<[f64; 3]> = grid
                .half_steps(base[dim])
                .into_iter()
                .map(|v| {
                    let mut p = base;
                    p[dim] = v;
                    p
                })
                .collect();
            let trial = evaluate(net, subcat, runs, &candidates, opts)?;
            evaluated.extend_from_slice(&trial);
            let mut pool = trial;
            pool.push(best);
            best = best_of(&pool)?;
        }
    }
    Ok(FitResult {
        family,
        weights: best.weights,
        loglik: best.loglik,
        grid: grid.clone(),
        evaluated,
        per_fold: None,
    })
}

/// [`fit_betas`] on all runs, plus held-out log-likelihoods from `folds`-fold
/// cross-validation. Run `i` belongs to fold `i % folds`.
pub fn fit_betas_cv(
    family: ModelFamily,
    net: &SemanticNetwork,
    subcat: Option<&SubcategoryCue>,
    runs: &[Vec<ExemplarId>],
    grid: &GridSpec,
    opts: LoglikOptions,
    folds: usize,
) -> Result<FitResult, FitError> {
    if folds < 2 || folds > runs.len() {
        return Err(FitError::BadFolds {
            folds,
            runs: runs.len(),
        });
    }
    let mut result = fit_betas(family, net, subcat, runs, grid, opts)?;
    let mut per_fold = Vec::with_capacity(folds);
    for fold in 0..folds {
        let (test, train): (Vec<_>, Vec<_>) = runs
            .iter()
            .enumerate()
            .partition(|(i, _)| i % folds == fold);
        let train: Vec<Vec<ExemplarId>> = train.into_iter().map(|(_, r)| r.clone()).collect();
        let test: Vec<Vec<ExemplarId>> = test.into_iter().map(|(_, r)| r.clone()).collect();
        let fitted = fit_betas(family, net, subcat, &train, grid, opts)?;
        per_fold.push(FoldResult {
            fold,
            weights: fitted.weights,
            train_loglik: fitted.loglik,
            heldout_loglik: total_loglik(net, subcat, &test, fitted.weights, opts)?,
        });
    }
    result.per_fold = Some(per_fold);
    Ok(result)
}
