//! The five regressors behind one fit/predict contract.
//!
//! Every model consumes standardized features. A [`FittedModel`] carries the
//! scaler it was trained under so raw records can be scored directly with
//! [`FittedModel::predict_records`].

pub mod forest;
pub mod grid;
pub mod knn;
pub mod linear;
pub mod mlp;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::domain::{Hyperparams, ModelKind, SkaterRecord};
use crate::error::{Error, Result};
use crate::ingest::{feature_matrix, Scaler};
use crate::matrix::Matrix;

pub use forest::RandomForest;
pub use grid::{
    default_grid, grid_search, search_all, select_kind, select_model, CandidateResult,
    GridSearchReport, KindSearch,
};
pub use knn::KnnModel;
pub use linear::LinearModel;
pub use mlp::{Mlp, MlpGradient, TrainingMeta};
pub use tree::{DecisionTree, Node, TreeConfig};

/// What to train: hyperparameters (which fix the kind) plus the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl RegressorSpec {
    pub fn new(hyperparams: Hyperparams, seed: u64) -> Result<Self> {
        hyperparams.validate()?;
        Ok(Self { hyperparams, seed })
    }

    pub fn kind(&self) -> ModelKind {
        self.hyperparams.kind()
    }
}

/// Learned state, one variant per kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Linear(LinearModel),
    Knn(KnnModel),
    Tree(DecisionTree),
    Forest(RandomForest),
    Mlp(Mlp),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Linear(_) => ModelKind::Linear,
            ModelParams::Knn(_) => ModelKind::Knn,
            ModelParams::Tree(_) => ModelKind::Tree,
            ModelParams::Forest(_) => ModelKind::Forest,
            ModelParams::Mlp(_) => ModelKind::Mlp,
        }
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            ModelParams::Linear(m) => m.predict_row(row),
            ModelParams::Knn(m) => m.predict_row(row),
            ModelParams::Tree(m) => m.predict_row(row),
            ModelParams::Forest(m) => m.predict_row(row),
            ModelParams::Mlp(m) => m.predict_row(row),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: RegressorSpec,
    pub scaler: Scaler,
    pub n_features: usize,
    pub params: ModelParams,
    /// Present for the MLP only.
    pub training_meta: Option<TrainingMeta>,
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    /// Predicts for features already standardized with `self.scaler`.
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        features.ensure_width(self.n_features)?;
        Ok(features.rows().map(|r| self.params.predict_row(r)).collect())
    }

    /// Standardizes the records' raw features and predicts.
    pub fn predict_records(&self, records: &[SkaterRecord]) -> Result<Vec<f64>> {
        let raw = feature_matrix(records);
        self.predict(&self.scaler.transform(&raw)?)
    }
}

/// Fits on standardized training data. For the MLP, early stopping watches
/// the training MAE; use [`fit_with_validation`] to watch a held-out set.
pub fn fit(spec: &RegressorSpec, x: &Matrix, y: &[f64], scaler: &Scaler) -> Result<FittedModel> {
    fit_with_validation(spec, x, y, None, scaler)
}

pub fn fit_with_validation(
    spec: &RegressorSpec,
    x: &Matrix,
    y: &[f64],
    validation: Option<(&Matrix, &[f64])>,
    scaler: &Scaler,
) -> Result<FittedModel> {
    spec.hyperparams.validate()?;
    if x.nrows() == 0 {
        return Err(Error::Empty("training rows"));
    }
    if x.nrows() != y.len() {
        return Err(Error::Shape {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    x.ensure_width(scaler.width())?;
    if x.as_slice().iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training data"));
    }
    let mut meta = None;
    let params = match &spec.hyperparams {
        Hyperparams::Linear(p) => ModelParams::Linear(LinearModel::fit(x, y, p.lambda)?),
        Hyperparams::Knn(p) => ModelParams::Knn(KnnModel::fit(x, y, p.k, p.weighting)?),
        Hyperparams::Tree(p) => ModelParams::Tree(DecisionTree::fit(
            x,
            y,
            TreeConfig {
                max_depth: p.max_depth,
                min_samples_leaf: p.min_samples_leaf,
                max_features: None,
            },
        )?),
        Hyperparams::Forest(p) => ModelParams::Forest(RandomForest::fit(x, y, p, spec.seed)?),
        Hyperparams::Mlp(p) => {
            let (net, m) = Mlp::train(p, x, y, validation, spec.seed)?;
            meta = Some(m);
            ModelParams::Mlp(net)
        }
    };
    Ok(FittedModel {
        spec: spec.clone(),
        scaler: scaler.clone(),
        n_features: x.ncols(),
        params,
        training_meta: meta,
    })
}

/// Mean absolute error.
pub fn mae(predicted: &[f64], actual: &[f64]) -> f64 {
    predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).abs())
        .sum::<f64>()
        / predicted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{KnnParams, LinearParams, TreeParams, Weighting};

    fn spec(hp: Hyperparams) -> RegressorSpec {
        RegressorSpec::new(hp, 0).unwrap()
    }

    #[test]
    fn predict_checks_width() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let m = fit(
            &spec(Hyperparams::Linear(LinearParams { lambda: 0.0 })),
            &x,
            &[1.0, 2.0],
            &Scaler::identity(2),
        )
        .unwrap();
        let wide = Matrix::zeros(1, 3);
        assert!(matches!(
            m.predict(&wide),
            Err(Error::Shape { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn knn_needs_k_rows() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let err = fit(
            &spec(Hyperparams::Knn(KnnParams {
                k: 5,
                weighting: Weighting::Uniform,
            })),
            &x,
            &[0.0, 1.0],
            &Scaler::identity(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::TooFewRows { .. }));
    }

    #[test]
    fn tree_kind_memorizes() {
        let rows: Vec<[f64; 1]> = (0..12).map(|i| [i as f64]).collect();
        let y: Vec<f64> = (0..12).map(|i| ((i * 5) % 7) as f64).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit(
            &spec(Hyperparams::Tree(TreeParams {
                max_depth: None,
                min_samples_leaf: 1,
            })),
            &x,
            &y,
            &Scaler::identity(1),
        )
        .unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn mlp_zero_weights_predict_zero() {
        let m = FittedModel {
            spec: spec(Hyperparams::defaults(ModelKind::Mlp)),
            scaler: Scaler::identity(4),
            n_features: 4,
            params: ModelParams::Mlp(Mlp::zeros(&[4, 16, 1])),
            training_meta: None,
        };
        let probe = Matrix::from_rows(&[[1.0, -2.0, 3.0, 0.5], [0.0; 4]]).unwrap();
        assert_eq!(m.predict(&probe).unwrap(), vec![0.0, 0.0]);
    }
}
