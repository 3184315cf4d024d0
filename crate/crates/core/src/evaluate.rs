//! Error summaries over the top scorers and curve data for plotting.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::ModelKind;
use crate::error::{Error, Result};
use crate::ingest::{BaselineSource, Baselines};

/// Where a set of predictions came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    Model(ModelKind),
    Baseline(BaselineSource),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Model(k) => k.fmt(f),
            Source::Baseline(b) => b.fmt(f),
        }
    }
}

/// A player's observed points per game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActualPpg {
    pub player_id: String,
    pub ppg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub source: Source,
    pub mean_abs_error: f64,
    pub median_abs_error: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Rank by actual PPG among the top `n`, starting at 1.
    pub rank: usize,
    pub player_id: String,
    pub actual_ppg: f64,
    pub predicted_ppg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub source: Source,
    pub points: Vec<CurvePoint>,
}

/// Highest actual PPG first; equal PPG resolves by ascending `player_id`.
/// Returns fewer than `n` players when the pool is smaller.
pub fn top_n_by_actual(pool: &[ActualPpg], n: usize) -> Vec<ActualPpg> {
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| {
        b.ppg
            .total_cmp(&a.ppg)
            .then_with(|| a.player_id.cmp(&b.player_id))
    });
    sorted.truncate(n);
    sorted
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Mean and median of `|predicted - actual|` over `(predicted, actual)` pairs.
pub fn error_summary(pairs: &[(f64, f64)], source: Source) -> Result<ErrorSummary> {
    if pairs.is_empty() {
        return Err(Error::Empty("prediction pairs"));
    }
    let mut errors: Vec<f64> = pairs.iter().map(|(p, a)| (p - a).abs()).collect();
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite("prediction pairs"));
    }
    errors.sort_by(f64::total_cmp);
    // sum in sorted order so the mean does not depend on input order
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    Ok(ErrorSummary {
        source,
        mean_abs_error: mean,
        median_abs_error: median_of_sorted(&errors),
        n: errors.len(),
    })
}

/// `(position in the top-n, prediction)` for one source.
type Aligned = (Source, Vec<(usize, f64)>);

/// Pairs each top-`n` player with every source's prediction. The model must
/// cover every player; a baseline source only contributes the players it has,
/// and a baseline with no coverage is left out.
fn aligned(
    model: ModelKind,
    predictions: &BTreeMap<String, f64>,
    baselines: &Baselines,
    top: &[ActualPpg],
) -> Result<Vec<Aligned>> {
    let mut model_preds = Vec::with_capacity(top.len());
    for (i, p) in top.iter().enumerate() {
        let pred = predictions
            .get(&p.player_id)
            .ok_or_else(|| Error::MissingPrediction(p.player_id.clone()))?;
        model_preds.push((i, *pred));
    }
    let mut out = vec![(Source::Model(model), model_preds)];
    for source in BaselineSource::ALL {
        let preds: Vec<(usize, f64)> = top
            .iter()
            .enumerate()
            .filter_map(|(i, p)| baselines.get(&(p.player_id.clone(), source)).map(|&v| (i, v)))
            .collect();
        if !preds.is_empty() {
            out.push((Source::Baseline(source), preds));
        }
    }
    Ok(out)
}

pub fn compare_all(
    model: ModelKind,
    predictions: &BTreeMap<String, f64>,
    baselines: &Baselines,
    actuals: &[ActualPpg],
    n: usize,
) -> Result<Vec<ErrorSummary>> {
    let top = top_n_by_actual(actuals, n);
    aligned(model, predictions, baselines, &top)?
        .into_iter()
        .map(|(source, preds)| {
            let pairs: Vec<(f64, f64)> = preds.iter().map(|&(i, p)| (p, top[i].ppg)).collect();
            error_summary(&pairs, source)
        })
        .collect()
}

/// One series per source in top-`n` order. Ranks are positions in the
/// top-`n` list, so a baseline that misses a player skips that rank.
pub fn emit_curves(
    model: ModelKind,
    predictions: &BTreeMap<String, f64>,
    baselines: &Baselines,
    actuals: &[ActualPpg],
    n: usize,
) -> Result<Vec<CurveSeries>> {
    let top = top_n_by_actual(actuals, n);
    Ok(aligned(model, predictions, baselines, &top)?
        .into_iter()
        .map(|(source, preds)| CurveSeries {
            source,
            points: preds
                .into_iter()
                .map(|(i, p)| CurvePoint {
                    rank: i + 1,
                    player_id: top[i].player_id.clone(),
                    actual_ppg: top[i].ppg,
                    predicted_ppg: p,
                })
                .collect(),
        })
        .collect())
}

/// `source,n,mean_abs_error,median_abs_error`.
pub fn summaries_to_csv(summaries: &[ErrorSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "n", "mean_abs_error", "median_abs_error"])
        .expect("in-memory write");
    for s in summaries {
        w.write_record([
            s.source.to_string(),
            s.n.to_string(),
            s.mean_abs_error.to_string(),
            s.median_abs_error.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// `source,rank,player_id,actual_ppg,predicted_ppg`.
pub fn curve_to_csv(series: &CurveSeries) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "rank", "player_id", "actual_ppg", "predicted_ppg"])
        .expect("in-memory write");
    for p in &series.points {
        w.write_record([
            series.source.to_string(),
            p.rank.to_string(),
            p.player_id.clone(),
            p.actual_ppg.to_string(),
            p.predicted_ppg.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
