//! Load a skaters CSV, split 80/10/10, and standardize with training
//! statistics.

use puckpar::ingest::{self, Dataset};
use puckpar::synth::{self, SynthConfig};
use puckpar::domain::FEATURE_NAMES;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("skaters.csv");
    let records = synth::skaters(&SynthConfig {
        n_players: 500,
        ..SynthConfig::default()
    });
    std::fs::write(&path, synth::skaters_to_csv(&records))?;

    let loaded = ingest::load_skaters(&path)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let ds = Dataset::from_records(&loaded.records, 42)?;
    println!(
        "{} rows: train {} / validation {} / test {}",
        ds.labels.len(),
        ds.split.train.len(),
        ds.split.validation.len(),
        ds.split.test.len()
    );
    for (j, name) in FEATURE_NAMES.iter().enumerate() {
        println!(
            "{name:>14}  mean {:9.4}  std {:8.4}",
            ds.scaler.mean[j], ds.scaler.std[j]
        );
    }
    Ok(())
}
