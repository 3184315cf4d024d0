//! Ridge regression by the normal equations.
//!
//! The intercept is not penalized: features and labels are centred, the
//! penalized system `(XcᵀXc + λI) w = Xcᵀyc` is solved for the coefficients,
//! and the intercept is recovered as `ȳ − x̄·w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn fit(x: &Matrix, y: &[f64], lambda: f64) -> Result<Self> {
        let n = x.nrows();
        let p = x.ncols();
        if n == 0 {
            return Err(Error::Empty("training rows"));
        }
        let nf = n as f64;
        // a constant column centres to exactly zero, so it gets coefficient 0
        let x_mean: Vec<f64> = (0..p)
            .map(|j| {
                let first = x.get(0, j);
                if x.rows().all(|r| r[j] == first) {
                    first
                } else {
                    x.rows().map(|r| r[j]).sum::<f64>() / nf
                }
            })
            .collect();
        let y_mean = y.iter().sum::<f64>() / nf;

        let mut gram = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for (row, &yi) in x.rows().zip(y) {
            let yc = yi - y_mean;
            for a in 0..p {
                let xa = row[a] - x_mean[a];
                rhs[a] += xa * yc;
                for b in a..p {
                    gram[a * p + b] += xa * (row[b] - x_mean[b]);
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[a * p + b] = gram[b * p + a];
            }
            gram[a * p + a] += lambda;
        }

        let coefficients = solve_symmetric(gram, rhs, p);
        let intercept = y_mean
            - coefficients
                .iter()
                .zip(&x_mean)
                .map(|(w, m)| w * m)
                .sum::<f64>();
        if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("linear coefficients"));
        }
        Ok(Self {
            coefficients,
            intercept,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }
}

/// Solves `A w = b` for symmetric positive semi-definite `A` (row-major,
/// `p x p`) by Gaussian elimination with diagonal pivoting. Directions whose
/// pivot vanishes (e.g. a constant feature with λ = 0) get coefficient 0.
fn solve_symmetric(mut a: Vec<f64>, mut b: Vec<f64>, p: usize) -> Vec<f64> {
    let scale = (0..p).map(|i| a[i * p + i].abs()).fold(0.0, f64::max);
    let tol = scale * 1e-12;
    let mut perm: Vec<usize> = (0..p).collect();
    let mut rank = p;

    for k in 0..p {
        // largest remaining diagonal
        let (piv, val) = (k..p)
            .map(|i| (i, a[i * p + i]))
            .fold((k, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        if val <= tol {
            rank = k;
            break;
        }
        if piv != k {
            for j in 0..p {
                a.swap(k * p + j, piv * p + j);
            }
            for i in 0..p {
                a.swap(i * p + k, i * p + piv);
            }
            b.swap(k, piv);
            perm.swap(k, piv);
        }
        for i in k + 1..p {
            let f = a[i * p + k] / a[k * p + k];
            if f == 0.0 {
                continue;
            }
            for j in k..p {
                a[i * p + j] -= f * a[k * p + j];
            }
            b[i] -= f * b[k];
        }
    }

    let mut z = vec![0.0; p];
    for k in (0..rank).rev() {
        let s: f64 = (k + 1..rank).map(|j| a[k * p + j] * z[j]).sum();
        z[k] = (b[k] - s) / a[k * p + k];
    }
    let mut w = vec![0.0; p];
    for (k, &orig) in perm.iter().enumerate() {
        w[orig] = z[k];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_noiseless_line() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64 / 3.0 - 2.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let m = LinearModel::fit(&Matrix::from_rows(&rows).unwrap(), &y, 0.0).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-8);
        assert!((m.intercept - 1.0).abs() < 1e-8);
    }

    #[test]
    fn recovers_multivariate_plane() {
        let rows: Vec<[f64; 4]> = (0..50)
            .map(|i| {
                let t = i as f64;
                [t.sin(), (0.7 * t).cos(), (t * 0.13).sqrt(), (t % 7.0) - 3.0]
            })
            .collect();
        let w = [0.5, -1.25, 2.0, 0.1];
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 3.0 + r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let m = LinearModel::fit(&Matrix::from_rows(&rows).unwrap(), &y, 0.0).unwrap();
        for (got, want) in m.coefficients.iter().zip(&w) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!((m.intercept - 3.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_shrinks_coefficients() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64 - 10.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let ols = LinearModel::fit(&x, &y, 0.0).unwrap();
        let ridge = LinearModel::fit(&x, &y, 100.0).unwrap();
        assert!(ridge.coefficients[0].abs() < ols.coefficients[0].abs());
        // closed form for one centred feature: w = Σxy / (Σx² + λ)
        let sxx: f64 = rows.iter().map(|r| (r[0] + 0.5).powi(2)).sum();
        let sxy: f64 = rows.iter().map(|r| (r[0] + 0.5) * 2.0 * r[0]).sum();
        assert!((ridge.coefficients[0] - sxy / (sxx + 100.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_inert() {
        let rows: Vec<[f64; 2]> = (0..30).map(|i| [(i as f64 * 0.37).sin(), 0.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 4.0 * r[0] - 1.0).collect();
        let m = LinearModel::fit(&Matrix::from_rows(&rows).unwrap(), &y, 0.0).unwrap();
        assert_eq!(m.coefficients[1], 0.0);
        assert!((m.coefficients[0] - 4.0).abs() < 1e-10);
    }
}
