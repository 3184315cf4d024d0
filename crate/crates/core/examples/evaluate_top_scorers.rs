//! Score a model and two external projection sources on the top 100
//! scorers by actual PPG.

use std::collections::BTreeMap;

use puckpar::evaluate::{self, ActualPpg};
use puckpar::ingest::Dataset;
use puckpar::models::{self, RegressorSpec};
use puckpar::synth::{self, SynthConfig};
use puckpar::{ppg, Hyperparams, ModelKind};

fn main() -> anyhow::Result<()> {
    let records = synth::skaters(&SynthConfig::default());
    let dataset = Dataset::from_records(&records, 42)?;
    let train = dataset.train();
    let spec = RegressorSpec::new(Hyperparams::parse(ModelKind::Knn, "k=15;weighting=uniform")?, 0)?;
    let model = models::fit(&spec, &train.features, &train.labels, &dataset.scaler)?;

    let predictions: BTreeMap<String, f64> = records
        .iter()
        .map(|r| r.player_id.clone())
        .zip(model.predict_records(&records)?)
        .collect();
    let actuals = records
        .iter()
        .map(|r| {
            Ok(ActualPpg {
                player_id: r.player_id.clone(),
                ppg: ppg(r)?.value(),
            })
        })
        .collect::<puckpar::Result<Vec<_>>>()?;
    let baselines = synth::baselines(&records, 3);

    let summaries = evaluate::compare_all(ModelKind::Knn, &predictions, &baselines, &actuals, 100)?;
    print!("{}", evaluate::summaries_to_csv(&summaries));
    let curves = evaluate::emit_curves(ModelKind::Knn, &predictions, &baselines, &actuals, 100)?;
    for c in &curves {
        println!("{}: {} curve points", c.source, c.points.len());
    }
    Ok(())
}
