//! Rank players by availability rating: projected minus actual PPG, scaled
//! by how the team is doing over the season and lately.

use puckpar::ingest::Dataset;
use puckpar::models::{self, RegressorSpec};
use puckpar::par::{self, ParConfig, PlayerProjection};
use puckpar::synth::{self, SynthConfig};
use puckpar::{ppg, Hyperparams, ModelKind};

fn main() -> anyhow::Result<()> {
    let cfg = SynthConfig::default();
    let records = synth::skaters(&cfg);
    let forms = synth::team_forms(cfg.n_teams, cfg.seed);
    let dataset = Dataset::from_records(&records, 42)?;
    let train = dataset.train();
    let spec = RegressorSpec::new(Hyperparams::defaults(ModelKind::Linear), 0)?;
    let model = models::fit(&spec, &train.features, &train.labels, &dataset.scaler)?;

    let players = records
        .iter()
        .zip(model.predict_records(&records)?)
        .map(|(r, p)| {
            Ok(PlayerProjection {
                player_id: r.player_id.clone(),
                name: r.name.clone(),
                team_id: r.team_id.clone(),
                ppg_predicted: p,
                ppg_actual: ppg(r)?.value(),
            })
        })
        .collect::<puckpar::Result<Vec<_>>>()?;

    for w_o in [2.0, 0.0] {
        let board = par::par_leaderboard(&players, &forms, &ParConfig::with_w_o(w_o)?, 10)?;
        println!("w_o = {w_o}");
        print!("{}", par::leaderboard_to_csv(&board));
    }
    Ok(())
}
