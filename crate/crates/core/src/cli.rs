//! Command-line pipeline: train, evaluate, predict, par.
//!
//! Exit codes: 0 on success, 2 for bad input (unreadable or malformed files,
//! unknown teams, bad flags), 1 for internal failures.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::domain::ppg;
use crate::error::{Error, Result};
use crate::evaluate::{self, ActualPpg, ErrorSummary, Source};
use crate::ingest::{self, Baselines, Dataset};
use crate::models::{default_grid, search_all, FittedModel};
use crate::par::{self, ParConfig, PlayerProjection};
use crate::persist;

pub const DEFAULT_SEED: u64 = 42;
pub const MODEL_FILE: &str = "model.json";
pub const GRID_REPORT_FILE: &str = "grid_report.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const LEADERBOARD_FILE: &str = "leaderboard.csv";

#[derive(Debug, Parser)]
#[command(name = "puckpar", version, about = "Skater PPG projection and availability ratings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid-search all five model kinds and save the winner.
    Train(TrainArgs),
    /// Mean/median absolute error over the top scorers, plus curve data.
    Evaluate(EvaluateArgs),
    /// Predict PPG for every row of a skaters file.
    Predict(PredictArgs),
    /// Rank players by availability rating.
    Par(ParArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub skaters: PathBuf,
    /// Directory for the model archive and grid report.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Archive path; defaults to `<out>/model.json`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// One or more model archives.
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    /// Skaters file holding the actual PPG to score against.
    #[arg(long)]
    pub skaters: PathBuf,
    #[arg(long)]
    pub baselines: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub top: u64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub skaters: PathBuf,
    /// Writes `<out>/predictions.csv`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub skaters: PathBuf,
    #[arg(long)]
    pub teams: PathBuf,
    /// Weight on recent team form.
    #[arg(long, default_value_t = 2.0)]
    pub wo: f64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub top: u64,
    /// Writes `<out>/leaderboard.csv`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a, stdout),
        Command::Par(a) => cmd_par(a, stdout),
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_user_error() {
        2
    } else {
        1
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn emit(out: Option<&Path>, file: &str, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(dir) => write_file(&dir.join(file), contents),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    eprintln!("seed: {}", args.seed);
    let loaded = ingest::load_skaters(&args.skaters)?;
    let dataset = Dataset::from_records(&loaded.records, args.seed)?;
    log::info!(
        "{} rows: {} train / {} validation / {} test",
        dataset.labels.len(),
        dataset.split.train.len(),
        dataset.split.validation.len(),
        dataset.split.test.len()
    );
    let report = search_all(&dataset, default_grid)?;
    for (kind, mae) in report.ranking() {
        log::info!("{kind:>6}  validation MAE {mae:.5}");
    }
    let model = report.winner_model();
    eprintln!(
        "selected: {} ({})",
        model.kind(),
        model.spec.hyperparams
    );
    let model_path = args
        .model
        .clone()
        .unwrap_or_else(|| args.out.join(MODEL_FILE));
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    persist::save(model, &model_path)?;
    write_file(&args.out.join(GRID_REPORT_FILE), &report.to_csv())
}

fn predictions_by_player(
    model: &FittedModel,
    records: &[crate::domain::SkaterRecord],
) -> Result<BTreeMap<String, f64>> {
    let preds = model.predict_records(records)?;
    Ok(records
        .iter()
        .zip(preds)
        .map(|(r, p)| (r.player_id.clone(), p))
        .collect())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let models = args
        .model
        .iter()
        .map(persist::load)
        .collect::<Result<Vec<_>>>()?;
    let records = ingest::load_skaters(&args.skaters)?.records;
    let baselines = match &args.baselines {
        Some(p) => ingest::load_baselines(p)?,
        None => Baselines::new(),
    };
    let actuals = records
        .iter()
        .map(|r| {
            Ok(ActualPpg {
                player_id: r.player_id.clone(),
                ppg: ppg(r)?.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = usize::try_from(args.top).unwrap_or(usize::MAX);

    let mut summaries: Vec<ErrorSummary> = Vec::new();
    let mut curves = Vec::new();
    for (i, model) in models.iter().enumerate() {
        let preds = predictions_by_player(model, &records)?;
        // baseline rows only once, from the first model's pass
        let b = if i == 0 { &baselines } else { &Baselines::new() };
        let mut s = evaluate::compare_all(model.kind(), &preds, b, &actuals, n)?;
        let mut c = evaluate::emit_curves(model.kind(), &preds, b, &actuals, n)?;
        summaries.push(s.remove(0));
        curves.push(c.remove(0));
        if i == 0 {
            summaries.extend(s);
            curves.extend(c);
        }
    }
    // models first, then baselines
    summaries.sort_by_key(|s| matches!(s.source, Source::Baseline(_)));
    write_file(&args.out.join(SUMMARY_FILE), &evaluate::summaries_to_csv(&summaries))?;
    for c in &curves {
        write_file(
            &args.out.join(format!("curves_{}.csv", c.source)),
            &evaluate::curve_to_csv(c),
        )?;
    }
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = persist::load(&args.model)?;
    let records = ingest::load_skaters(&args.skaters)?.records;
    let preds = model.predict_records(&records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["player_id", "name", "predicted_ppg"])
        .expect("in-memory write");
    for (r, p) in records.iter().zip(preds) {
        w.write_record([r.player_id.as_str(), r.name.as_str(), &p.to_string()])
            .expect("in-memory write");
    }
    let text = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    emit(args.out.as_deref(), PREDICTIONS_FILE, &text, stdout)
}

pub fn cmd_par(args: &ParArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = ParConfig::with_w_o(args.wo)?;
    let model = persist::load(&args.model)?;
    let records = ingest::load_skaters(&args.skaters)?.records;
    let forms = ingest::load_team_forms(&args.teams)?;
    let preds = model.predict_records(&records)?;
    let players = records
        .iter()
        .zip(preds)
        .map(|(r, p)| {
            Ok(PlayerProjection {
                player_id: r.player_id.clone(),
                name: r.name.clone(),
                team_id: r.team_id.clone(),
                ppg_predicted: p,
                ppg_actual: ppg(r)?.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let top = usize::try_from(args.top).unwrap_or(usize::MAX);
    let board = par::par_leaderboard(&players, &forms, &config, top)?;
    emit(
        args.out.as_deref(),
        LEADERBOARD_FILE,
        &par::leaderboard_to_csv(&board),
        stdout,
    )
}
