//! Grid-search all five regressors on synthetic data and pick the winner.

use std::time::Instant;

use puckpar::ingest::Dataset;
use puckpar::models::{default_grid, search_all};
use puckpar::synth::{self, SynthConfig};

fn main() -> anyhow::Result<()> {
    let records = synth::skaters(&SynthConfig::default());
    let dataset = Dataset::from_records(&records, 7)?;
    let start = Instant::now();
    let report = search_all(&dataset, default_grid)?;
    for s in &report.searches {
        let best = s.best_candidate();
        println!(
            "{:>6}  {:2} candidates  best {:<60} val {:.5}  test {:.5}",
            s.kind,
            s.candidates.len(),
            best.hyperparams.to_string(),
            best.validation_mae,
            best.test_mae
        );
    }
    let model = report.winner_model();
    println!(
        "selected {} ({}) in {:.1?}",
        model.kind(),
        model.spec.hyperparams,
        start.elapsed()
    );
    Ok(())
}
