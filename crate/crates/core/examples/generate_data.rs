//! Writes a synthetic league to a directory for use with the CLI.
//!
//! ```text
//! cargo run --example generate_data -- data
//! cargo run -- train --skaters data/skaters.csv --out out --seed 7
//! ```

use std::fs;
use std::path::PathBuf;

use puckpar::synth::{self, SynthConfig};

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    fs::create_dir_all(&dir)?;
    let cfg = SynthConfig::default();
    let records = synth::skaters(&cfg);
    fs::write(dir.join("skaters.csv"), synth::skaters_to_csv(&records))?;
    fs::write(
        dir.join("teams.csv"),
        synth::team_forms_to_csv(&synth::team_forms(cfg.n_teams, cfg.seed)),
    )?;
    fs::write(
        dir.join("baselines.csv"),
        synth::baselines_to_csv(&synth::baselines(&records, cfg.seed)),
    )?;
    println!("wrote {} skaters to {}", records.len(), dir.display());
    Ok(())
}
