//! Player Availability Rating.
//!
//! ```text
//! PAR = (predicted - actual) / ppcg_season + w_o * (predicted - actual) / ppcg_recent
//! ```
//!
//! A positive rating marks a player producing below projection; larger values
//! also reflect a team under more pressure to make a move. Both denominators
//! are clamped below at `denominator_floor`, since a team can go 0-for-10.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{ParEntry, TeamForm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParConfig {
    /// Weight on the recent-form term.
    pub w_o: f64,
    pub denominator_floor: f64,
}

impl Default for ParConfig {
    fn default() -> Self {
        Self {
            w_o: 2.0,
            denominator_floor: 0.05,
        }
    }
}

impl ParConfig {
    pub fn new(w_o: f64, denominator_floor: f64) -> Result<Self> {
        if !(w_o.is_finite() && w_o >= 0.0) {
            return Err(Error::InvalidRecord(format!("w_o must be >= 0, got {w_o}")));
        }
        if !(denominator_floor > 0.0 && denominator_floor <= 0.1) {
            return Err(Error::InvalidRecord(format!(
                "denominator_floor must be in (0, 0.1], got {denominator_floor}"
            )));
        }
        Ok(Self {
            w_o,
            denominator_floor,
        })
    }

    pub fn with_w_o(w_o: f64) -> Result<Self> {
        Self::new(w_o, Self::default().denominator_floor)
    }
}

pub fn par_score(
    ppg_predicted: f64,
    ppg_actual: f64,
    form: &TeamForm,
    config: &ParConfig,
) -> Result<f64> {
    par_from_parts(
        ppg_predicted,
        ppg_actual,
        form.ppcg_season,
        form.ppcg_recent,
        config,
    )
}

pub(crate) fn par_from_parts(
    ppg_predicted: f64,
    ppg_actual: f64,
    ppcg_season: f64,
    ppcg_recent: f64,
    config: &ParConfig,
) -> Result<f64> {
    if [ppg_predicted, ppg_actual, ppcg_season, ppcg_recent]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("PAR inputs"));
    }
    let gap = ppg_predicted - ppg_actual;
    let season = ppcg_season.max(config.denominator_floor);
    let recent = ppcg_recent.max(config.denominator_floor);
    Ok(gap / season + config.w_o * (gap / recent))
}

/// Recomputes an entry's rating from its stored inputs.
pub fn recompute(entry: &ParEntry, config: &ParConfig) -> Result<f64> {
    par_from_parts(
        entry.ppg_predicted,
        entry.ppg_actual,
        entry.ppcg_season,
        entry.ppcg_recent,
        config,
    )
}

/// A player with a projection and an observed PPG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerProjection {
    pub player_id: String,
    pub name: String,
    pub team_id: String,
    pub ppg_predicted: f64,
    pub ppg_actual: f64,
}

/// Rates every player, sorts by descending PAR (ties by ascending
/// `player_id`), and keeps the first `top`. Players whose team has no form
/// are all reported in one error.
pub fn par_leaderboard(
    players: &[PlayerProjection],
    forms: &BTreeMap<String, TeamForm>,
    config: &ParConfig,
    top: usize,
) -> Result<Vec<ParEntry>> {
    let unknown: Vec<String> = players
        .iter()
        .filter(|p| !forms.contains_key(&p.team_id))
        .map(|p| format!("{} (team {})", p.player_id, p.team_id))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownTeam(unknown));
    }
    let mut entries = players
        .iter()
        .map(|p| {
            let form = &forms[&p.team_id];
            Ok(ParEntry {
                player_id: p.player_id.clone(),
                name: p.name.clone(),
                ppg_predicted: p.ppg_predicted,
                ppg_actual: p.ppg_actual,
                ppcg_season: form.ppcg_season,
                ppcg_recent: form.ppcg_recent,
                par: par_score(p.ppg_predicted, p.ppg_actual, form, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| {
        b.par
            .total_cmp(&a.par)
            .then_with(|| a.player_id.cmp(&b.player_id))
    });
    entries.truncate(top);
    Ok(entries)
}

/// `rank,player_id,name,ppg_predicted,ppg_actual,ppcg_season,ppcg_recent,par`.
pub fn leaderboard_to_csv(entries: &[ParEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "rank",
        "player_id",
        "name",
        "ppg_predicted",
        "ppg_actual",
        "ppcg_season",
        "ppcg_recent",
        "par",
    ])
    .expect("in-memory write");
    for (i, e) in entries.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            e.player_id.clone(),
            e.name.clone(),
            e.ppg_predicted.to_string(),
            e.ppg_actual.to_string(),
            e.ppcg_season.to_string(),
            e.ppcg_recent.to_string(),
            e.par.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
