//! Synthetic league data for demos and tests.
//!
//! The label is driven by usage and finishing only:
//!
//! ```text
//! ppg = clamp(0.3 * z_toi + 0.2 * z_shooting + 0.5, 0, 2) + N(0, noise_sd)
//! ```
//!
//! where the z-scores use the population mean and standard deviation of the
//! generated sample. TOI and shooting percentage are drawn from shifted
//! exponentials, whose z-scores never fall below -1, so the lower clamp is
//! essentially never active and the relationship stays linear. Height and
//! weight are pure noise features.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::domain::{SkaterRecord, TeamForm};
use crate::ingest::{BaselineSource, Baselines};

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub n_players: usize,
    pub n_teams: usize,
    pub games_played: u32,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_players: 2000,
            n_teams: 31,
            games_played: 82,
            noise_sd: 0.05,
            seed: 7,
        }
    }
}

/// Noise-free part of the label, computed from standardized usage features.
pub fn true_ppg(z_toi: f64, z_shooting: f64) -> f64 {
    (0.3 * z_toi + 0.2 * z_shooting + 0.5).clamp(0.0, 2.0)
}

fn z_scores(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    v.iter()
        .map(|x| if sd > 0.0 { (x - mean) / sd } else { 0.0 })
        .collect()
}

pub fn team_id(i: usize) -> String {
    format!("T{:02}", i + 1)
}

/// Player-season rows. Points are rounded to whole numbers, so the stored
/// PPG is the noisy target quantized to `1 / games_played` and floored at 0.
pub fn skaters(config: &SynthConfig) -> Vec<SkaterRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_players;
    let height = Normal::new(185.0, 5.5).expect("valid normal");
    let weight = Normal::new(91.0, 7.0).expect("valid normal");
    let toi_extra: Exp<f64> = Exp::new(1.0 / 5.0).expect("valid exponential");
    let shot_extra: Exp<f64> = Exp::new(1.0 / 0.06).expect("valid exponential");
    let noise = Normal::new(0.0, config.noise_sd).expect("valid normal");

    let heights: Vec<f64> = (0..n).map(|_| height.sample(&mut rng)).collect();
    let weights: Vec<f64> = (0..n).map(|_| weight.sample(&mut rng)).collect();
    let toi: Vec<f64> = (0..n)
        .map(|_| (8.0 + toi_extra.sample(&mut rng)).min(35.0_f64))
        .collect();
    let shooting: Vec<f64> = (0..n)
        .map(|_| (0.02 + shot_extra.sample(&mut rng)).min(0.5_f64))
        .collect();
    let z_toi = z_scores(&toi);
    let z_shot = z_scores(&shooting);

    let games = config.games_played;
    (0..n)
        .map(|i| {
            let target = true_ppg(z_toi[i], z_shot[i]) + noise.sample(&mut rng);
            let points = (target.max(0.0) * f64::from(games)).round() as u32;
            let goals = (f64::from(points) * rng.random_range(0.25..0.55)).round() as u32;
            SkaterRecord {
                player_id: format!("p{:04}", i + 1),
                name: format!("Skater {:04}", i + 1),
                team_id: team_id(i % config.n_teams),
                season: "2016-2017".to_string(),
                height: heights[i],
                weight: weights[i],
                toi_per_game: toi[i],
                shooting_pct: shooting[i],
                games_played: games,
                goals,
                assists: points - goals,
            }
        })
        .collect()
}

/// Season and last-ten-game points percentages for every team.
pub fn team_forms(n_teams: usize, seed: u64) -> BTreeMap<String, TeamForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_teams)
        .map(|i| {
            let games = 30;
            let season_points = rng.random_range(18..=48u32);
            let recent_points = rng.random_range(2..=18u32);
            let form = TeamForm::from_points(team_id(i), season_points, games, recent_points, 10)
                .expect("points are within range");
            (form.team_id.clone(), form)
        })
        .collect()
}

/// Noisy projections from both providers, each missing a few players.
pub fn baselines(records: &[SkaterRecord], seed: u64) -> Baselines {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.08).expect("valid normal");
    let mut out = Baselines::new();
    for r in records {
        let actual = f64::from(r.points()) / f64::from(r.games_played);
        for source in BaselineSource::ALL {
            if rng.random_bool(0.05) {
                continue;
            }
            let v = (actual + jitter.sample(&mut rng)).max(0.0);
            out.insert((r.player_id.clone(), source), (v * 100.0).round() / 100.0);
        }
    }
    out
}

pub fn skaters_to_csv(records: &[SkaterRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(crate::ingest::SKATER_COLUMNS)
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.player_id.clone(),
            r.name.clone(),
            r.team_id.clone(),
            r.season.clone(),
            r.height.to_string(),
            r.weight.to_string(),
            r.toi_per_game.to_string(),
            r.shooting_pct.to_string(),
            r.games_played.to_string(),
            r.goals.to_string(),
            r.assists.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn team_forms_to_csv(forms: &BTreeMap<String, TeamForm>) -> String {
    let mut s = String::from("team_id,ppcg_season,ppcg_recent\n");
    for f in forms.values() {
        s.push_str(&format!("{},{},{}\n", f.team_id, f.ppcg_season, f.ppcg_recent));
    }
    s
}

pub fn baselines_to_csv(baselines: &Baselines) -> String {
    let mut s = String::from("player_id,source,projected_ppg\n");
    for ((player, source), v) in baselines {
        s.push_str(&format!("{player},{source},{v}\n"));
    }
    s
}
