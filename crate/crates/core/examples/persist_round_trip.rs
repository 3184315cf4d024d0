//! Save a fitted model of each kind as JSON, reload it, and confirm the
//! predictions are bit-identical.

use puckpar::ingest::Dataset;
use puckpar::models::{self, RegressorSpec};
use puckpar::synth::{self, SynthConfig};
use puckpar::{persist, Hyperparams, ModelKind};

fn main() -> anyhow::Result<()> {
    let records = synth::skaters(&SynthConfig {
        n_players: 400,
        ..SynthConfig::default()
    });
    let dataset = Dataset::from_records(&records, 42)?;
    let train = dataset.train();
    let dir = tempfile::tempdir()?;
    for kind in ModelKind::ALL {
        let hp = match kind {
            ModelKind::Mlp => Hyperparams::parse(kind, "hidden=16;max_epochs=30")?,
            _ => Hyperparams::defaults(kind),
        };
        let model = models::fit(&RegressorSpec::new(hp, 1)?, &train.features, &train.labels, &dataset.scaler)?;
        let path = dir.path().join(format!("{kind}.json"));
        persist::save(&model, &path)?;
        let loaded = persist::load(&path)?;
        let a = model.predict_records(&records)?;
        let b = loaded.predict_records(&records)?;
        let identical = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
        println!(
            "{kind:>6}: {:>8} bytes, predictions identical: {identical}",
            std::fs::metadata(&path)?.len()
        );
    }
    Ok(())
}
