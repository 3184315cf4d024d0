//! CART regression trees.
//!
//! Splits maximize variance reduction (equivalently, the drop in the sum of
//! squared deviations). Candidate thresholds are midpoints between
//! consecutive distinct sorted values; rows with `x <= threshold` go left.
//! Ties between candidates resolve to the lower feature index, then the lower
//! threshold.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node array; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them without
    /// touching the RNG.
    pub max_features: Option<usize>,
}

impl DecisionTree {
    pub fn fit(x: &Matrix, y: &[f64], config: TreeConfig) -> Result<Self> {
        let rows: Vec<usize> = (0..x.nrows()).collect();
        Self::fit_rows(x, y, rows, config, None)
    }

    /// Fits on the given row multiset (bootstrap samples may repeat rows).
    pub(crate) fn fit_rows(
        x: &Matrix,
        y: &[f64],
        mut rows: Vec<usize>,
        config: TreeConfig,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("training rows"));
        }
        if config.max_features.is_some() && rng.is_none() {
            return Err(Error::Empty("feature-subsampling rng"));
        }
        let mut builder = Builder {
            x,
            y,
            config,
            rng,
            nodes: Vec::new(),
        };
        builder.grow(&mut rows, 0);
        Ok(DecisionTree {
            nodes: builder.nodes,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Checks child links point forward and in range; used after loading.
    pub(crate) fn is_well_formed(&self, n_features: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Leaf { value } => value.is_finite(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < n_features
                        && !threshold.is_nan()
                        && left > i
                        && right > i
                        && left < self.nodes.len()
                        && right < self.nodes.len()
                }
            })
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a, 'r> {
    x: &'a Matrix,
    y: &'a [f64],
    config: TreeConfig,
    rng: Option<&'r mut ChaCha8Rng>,
    nodes: Vec<Node>,
}

impl Builder<'_, '_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&r| self.y[r] == first);
        let leaf_value = if pure {
            first
        } else {
            rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64
        };
        self.nodes.push(Node::Leaf { value: leaf_value });

        let depth_reached = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || rows.len() < 2 * self.config.min_samples_leaf {
            return id;
        }
        let Some(best) = self.best_split(rows, leaf_value) else {
            return id;
        };

        let (feature, threshold) = (best.feature, best.threshold);
        let mut n_left = 0;
        for i in 0..rows.len() {
            if self.x.get(rows[i], feature) <= threshold {
                rows.swap(i, n_left);
                n_left += 1;
            }
        }
        // keep each side in a canonical order so the build does not depend on
        // the partition's swap pattern
        let (left_rows, right_rows) = rows.split_at_mut(n_left);
        left_rows.sort_unstable();
        right_rows.sort_unstable();
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.ncols();
        match (self.config.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut f = index::sample(rng, p, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize], mean: f64) -> Option<Candidate> {
        let n = rows.len();
        let min_leaf = self.config.min_samples_leaf;
        let parent_sse: f64 = rows.iter().map(|&r| (self.y[r] - mean).powi(2)).sum();
        if parent_sse <= 0.0 {
            return None;
        }
        let tie_eps = parent_sse * 1e-12;
        let total: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let total_sq: f64 = rows.iter().map(|&r| self.y[r] * self.y[r]).sum();

        let mut best: Option<Candidate> = None;
        let mut order = rows.to_vec();
        for feature in self.candidate_features() {
            let x = self.x;
            order.sort_unstable_by(|&a, &b| {
                x.get(a, feature)
                    .total_cmp(&x.get(b, feature))
                    .then(a.cmp(&b))
            });
            let mut sum_l = 0.0;
            let mut sq_l = 0.0;
            for pos in 1..n {
                let yl = self.y[order[pos - 1]];
                sum_l += yl;
                sq_l += yl * yl;
                if pos < min_leaf || n - pos < min_leaf {
                    continue;
                }
                let lo = x.get(order[pos - 1], feature);
                let hi = x.get(order[pos], feature);
                if lo == hi {
                    continue;
                }
                let (nl, nr) = (pos as f64, (n - pos) as f64);
                let sum_r = total - sum_l;
                let sse_l = (sq_l - sum_l * sum_l / nl).max(0.0);
                let sse_r = ((total_sq - sq_l) - sum_r * sum_r / nr).max(0.0);
                let gain = parent_sse - sse_l - sse_r;
                let better = match best {
                    None => gain > 0.0,
                    Some(b) => gain > b.gain + tie_eps,
                };
                if better {
                    best = Some(Candidate {
                        feature,
                        threshold: midpoint(lo, hi),
                        gain,
                    });
                }
            }
        }
        best
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if lo <= mid && mid < hi {
        mid
    } else {
        lo
    }
}
