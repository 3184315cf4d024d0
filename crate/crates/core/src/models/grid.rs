//! Grid search on the validation split and cross-kind model selection.

use rayon::prelude::*;

use super::{fit_with_validation, mae, FittedModel, RegressorSpec};
use crate::domain::{
    ForestParams, Hyperparams, KnnParams, LinearParams, MaxFeatures, MlpParams, ModelKind,
    TreeParams, Weighting,
};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// The default hyperparameter grid for a kind, in evaluation order.
pub fn default_grid(kind: ModelKind) -> Vec<Hyperparams> {
    match kind {
        ModelKind::Linear => [0.0, 1e-3, 1e-2, 1e-1, 1.0]
            .into_iter()
            .map(|lambda| Hyperparams::Linear(LinearParams { lambda }))
            .collect(),
        ModelKind::Knn => {
            let mut g = Vec::new();
            for k in [1, 3, 5, 7, 9, 15, 25] {
                for weighting in [Weighting::Uniform, Weighting::InverseDistance] {
                    g.push(Hyperparams::Knn(KnnParams { k, weighting }));
                }
            }
            g
        }
        ModelKind::Tree => {
            let mut g = Vec::new();
            for max_depth in [Some(2), Some(4), Some(6), Some(8), Some(10), None] {
                for min_samples_leaf in [1, 5, 10, 20] {
                    g.push(Hyperparams::Tree(TreeParams {
                        max_depth,
                        min_samples_leaf,
                    }));
                }
            }
            g
        }
        ModelKind::Forest => {
            let mut g = Vec::new();
            for n_trees in [50, 100, 200] {
                for max_depth in [Some(4), Some(8), None] {
                    for max_features in [MaxFeatures::All, MaxFeatures::Sqrt] {
                        g.push(Hyperparams::Forest(ForestParams {
                            n_trees,
                            max_depth,
                            min_samples_leaf: 1,
                            max_features,
                            bootstrap: true,
                        }));
                    }
                }
            }
            g
        }
        ModelKind::Mlp => {
            let mut g = Vec::new();
            for hidden in [vec![16], vec![32], vec![32, 16]] {
                for learning_rate in [1e-3, 1e-2] {
                    g.push(Hyperparams::Mlp(MlpParams {
                        hidden: hidden.clone(),
                        learning_rate,
                        ..MlpParams::default()
                    }));
                }
            }
            g
        }
    }
}

/// One evaluated grid point. A candidate that failed to train carries an
/// infinite validation error and the failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub hyperparams: Hyperparams,
    pub validation_mae: f64,
    pub test_mae: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct KindSearch {
    pub kind: ModelKind,
    pub candidates: Vec<CandidateResult>,
    /// Index into `candidates` of the winner.
    pub best: usize,
    pub best_model: FittedModel,
}

impl KindSearch {
    pub fn best_candidate(&self) -> &CandidateResult {
        &self.candidates[self.best]
    }

    pub fn best_validation_mae(&self) -> f64 {
        self.best_candidate().validation_mae
    }
}

fn evaluate(spec: &RegressorSpec, dataset: &Dataset) -> Result<(FittedModel, f64, f64)> {
    let train = dataset.train();
    let val = dataset.validation();
    let test = dataset.test();
    let model = fit_with_validation(
        spec,
        &train.features,
        &train.labels,
        Some((&val.features, &val.labels)),
        &dataset.scaler,
    )?;
    let v = mae(&model.predict(&val.features)?, &val.labels);
    let t = mae(&model.predict(&test.features)?, &test.labels);
    Ok((model, v, t))
}

/// Fits every candidate on the training split and scores it on validation.
/// Candidates are evaluated in parallel; the result does not depend on
/// scheduling. Ties go to the earlier grid entry.
pub fn grid_search(kind: ModelKind, grid: &[Hyperparams], dataset: &Dataset) -> Result<KindSearch> {
    if grid.is_empty() {
        return Err(Error::Empty("hyperparameter grid"));
    }
    for hp in grid {
        if hp.kind() != kind {
            return Err(Error::InvalidHyperparams {
                kind,
                reason: format!("grid entry of kind {} ({hp})", hp.kind()),
            });
        }
        hp.validate()?;
    }

    let spec_for = |hp: &Hyperparams| RegressorSpec {
        hyperparams: hp.clone(),
        seed: dataset.seed,
    };
    let outcomes: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|hp| evaluate(&spec_for(hp), dataset).map(|(_, v, t)| (v, t)))
        .collect();

    let mut candidates = Vec::with_capacity(grid.len());
    let mut first_error = None;
    for (hp, outcome) in grid.iter().zip(outcomes) {
        let result = match outcome {
            Ok((v, t)) => CandidateResult {
                hyperparams: hp.clone(),
                validation_mae: v,
                test_mae: t,
                failure: None,
            },
            Err(e) => {
                log::warn!("{kind} {hp}: {e}");
                let msg = e.to_string();
                first_error.get_or_insert(e);
                CandidateResult {
                    hyperparams: hp.clone(),
                    validation_mae: f64::INFINITY,
                    test_mae: f64::INFINITY,
                    failure: Some(msg),
                }
            }
        };
        candidates.push(result);
    }

    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if c.failure.is_some() {
            continue;
        }
        if best.is_none_or(|b| c.validation_mae < candidates[b].validation_mae) {
            best = Some(i);
        }
    }
    let Some(best) = best else {
        return Err(first_error.expect("every candidate failed, so one error was recorded"));
    };
    // Only the metrics are kept during the search; the winner is refitted,
    // which reproduces it exactly because fitting is deterministic.
    let (best_model, _, _) = evaluate(&spec_for(&grid[best]), dataset)?;
    log::info!(
        "{kind}: best {} (validation MAE {:.5})",
        grid[best],
        candidates[best].validation_mae
    );
    Ok(KindSearch {
        kind,
        candidates,
        best,
        best_model,
    })
}

/// Picks the kind with the lowest validation error. All five kinds must be
/// present; ties follow [`ModelKind::TIE_ORDER`].
pub fn select_kind(scores: &[(ModelKind, f64)]) -> Result<ModelKind> {
    for kind in ModelKind::ALL {
        if !scores.iter().any(|&(k, _)| k == kind) {
            return Err(Error::MissingKind(kind));
        }
    }
    let mut ranked: Vec<(ModelKind, f64)> = scores.to_vec();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.tie_rank().cmp(&b.0.tie_rank())));
    Ok(ranked[0].0)
}

pub fn select_model(searches: &[KindSearch]) -> Result<&FittedModel> {
    let scores: Vec<(ModelKind, f64)> = searches
        .iter()
        .map(|s| (s.kind, s.best_validation_mae()))
        .collect();
    let kind = select_kind(&scores)?;
    Ok(&searches
        .iter()
        .find(|s| s.kind == kind)
        .expect("selected kind was searched")
        .best_model)
}

/// Outcome of searching every kind.
#[derive(Debug, Clone)]
pub struct GridSearchReport {
    pub searches: Vec<KindSearch>,
    pub winner: ModelKind,
}

impl GridSearchReport {
    pub fn winner_model(&self) -> &FittedModel {
        select_model(&self.searches).expect("report holds all five kinds")
    }

    /// Kinds ordered best first, with their best validation MAE.
    pub fn ranking(&self) -> Vec<(ModelKind, f64)> {
        let mut r: Vec<(ModelKind, f64)> = self
            .searches
            .iter()
            .map(|s| (s.kind, s.best_validation_mae()))
            .collect();
        r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.tie_rank().cmp(&b.0.tie_rank())));
        r
    }

    /// `kind,hyperparams,validation_mae,test_mae`, one row per candidate in
    /// search order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "hyperparams", "validation_mae", "test_mae"])
            .expect("in-memory write");
        for s in &self.searches {
            for c in &s.candidates {
                w.write_record([
                    s.kind.as_str(),
                    &c.hyperparams.to_string(),
                    &c.validation_mae.to_string(),
                    &c.test_mae.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

/// Runs the given grids for all five kinds and selects the winner.
pub fn search_all(
    dataset: &Dataset,
    grid_for: impl Fn(ModelKind) -> Vec<Hyperparams>,
) -> Result<GridSearchReport> {
    let searches = ModelKind::ALL
        .iter()
        .map(|&kind| grid_search(kind, &grid_for(kind), dataset))
        .collect::<Result<Vec<_>>>()?;
    let winner = select_model(&searches)?.kind();
    Ok(GridSearchReport { searches, winner })
}
