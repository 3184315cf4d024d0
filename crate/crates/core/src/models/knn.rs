//! k-nearest-neighbour regression over Euclidean distance.

use serde::{Deserialize, Serialize};

use crate::domain::Weighting;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Stores the training set verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub weighting: Weighting,
    pub train_features: Matrix,
    pub train_labels: Vec<f64>,
}

impl KnnModel {
    pub fn fit(x: &Matrix, y: &[f64], k: usize, weighting: Weighting) -> Result<Self> {
        if k == 0 || x.nrows() < k {
            return Err(Error::TooFewRows {
                needed: k.max(1),
                got: x.nrows(),
            });
        }
        Ok(Self {
            k,
            weighting,
            train_features: x.clone(),
            train_labels: y.to_vec(),
        })
    }

    /// Neighbours are ordered by `(distance, training row index)`, so equal
    /// distances resolve to the earlier row.
    pub fn predict_row(&self, query: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .train_features
            .rows()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, query), i))
            .collect();
        let k = self.k.min(dist.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_distance);
            dist.truncate(k);
        }
        dist.sort_unstable_by(by_distance);

        match self.weighting {
            Weighting::Uniform => {
                dist.iter().map(|&(_, i)| self.train_labels[i]).sum::<f64>() / k as f64
            }
            Weighting::InverseDistance => {
                if let Some(&(_, i)) = dist.iter().find(|(d, _)| *d == 0.0) {
                    return self.train_labels[i];
                }
                let mut num = 0.0;
                let mut den = 0.0;
                for &(d2, i) in &dist {
                    let w = 1.0 / d2.sqrt();
                    num += w * self.train_labels[i];
                    den += w;
                }
                num / den
            }
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rows: &[[f64; 2]], y: &[f64], k: usize, w: Weighting) -> KnnModel {
        KnnModel::fit(&Matrix::from_rows(rows).unwrap(), y, k, w).unwrap()
    }

    #[test]
    fn one_nn_reproduces_labels() {
        let rows = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 3.0]];
        let y = [0.1, 0.2, 0.3, 0.4];
        let m = model(&rows, &y, 1, Weighting::Uniform);
        for (r, &l) in rows.iter().zip(&y) {
            assert_eq!(m.predict_row(r), l);
        }
    }

    #[test]
    fn uniform_mean_of_equidistant_neighbours() {
        let rows = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [5.0, 5.0]];
        let y = [0.5, 0.7, 0.9, 10.0];
        let m = model(&rows, &y, 3, Weighting::Uniform);
        assert!((m.predict_row(&[0.0, 0.0]) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn inverse_distance_exact_match_short_circuits() {
        let rows = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let y = [1.0, 2.0, 3.0];
        let m = model(&rows, &y, 3, Weighting::InverseDistance);
        assert_eq!(m.predict_row(&[1.0, 0.0]), 2.0);
        // distances from x = 3 are 3, 2, 1
        let p = m.predict_row(&[3.0, 0.0]);
        let want = (1.0 / 3.0 + 2.0 / 2.0 + 3.0 / 1.0) / (1.0 / 3.0 + 1.0 / 2.0 + 1.0);
        assert!((p - want).abs() < 1e-15);
    }

    #[test]
    fn distance_ties_prefer_lower_row() {
        let rows = [[1.0, 0.0], [-1.0, 0.0]];
        let m = model(&rows, &[5.0, 7.0], 1, Weighting::Uniform);
        assert_eq!(m.predict_row(&[0.0, 0.0]), 5.0);
    }

    #[test]
    fn k_larger_than_training_set_is_rejected() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            KnnModel::fit(&x, &[1.0, 2.0], 3, Weighting::Uniform),
            Err(Error::TooFewRows { needed: 3, got: 2 })
        ));
    }
}
