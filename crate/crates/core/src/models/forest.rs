//! Bagged CART ensemble.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use crate::domain::ForestParams;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Seed each tree was grown from, parallel to `trees`.
    pub tree_seeds: Vec<u64>,
}

impl RandomForest {
    /// Tree seeds are drawn up front from `seed`, so trees can be grown in
    /// parallel without affecting the result.
    pub fn fit(x: &Matrix, y: &[f64], params: &ForestParams, seed: u64) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::Empty("training rows"));
        }
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let tree_seeds: Vec<u64> = (0..params.n_trees).map(|_| master.next_u64()).collect();
        let p = x.ncols();
        let m = params.max_features.count(p);
        let config = TreeConfig {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: (m < p).then_some(m),
        };

        let trees = tree_seeds
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let rows: Vec<usize> = if params.bootstrap {
                    let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                    rows.sort_unstable();
                    rows
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_rows(x, y, rows, config, Some(&mut rng))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trees, tree_seeds })
    }

    /// Unweighted mean of the trees' outputs, summed in tree order.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }
}
