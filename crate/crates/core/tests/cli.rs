use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use puckpar::domain::{SkaterRecord, Weighting};
use puckpar::ingest::{feature_matrix, Scaler, SKATER_COLUMNS};
use puckpar::models::{FittedModel, KnnModel, ModelParams, RegressorSpec};
use puckpar::{persist, synth, Hyperparams, ModelKind};
use tempfile::TempDir;

fn puckpar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puckpar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn record(id: &str, team: &str, toi: f64, gp: u32, points: u32) -> SkaterRecord {
    SkaterRecord {
        player_id: id.into(),
        name: format!("Player {id}"),
        team_id: team.into(),
        season: "2017-2018".into(),
        height: 185.0,
        weight: 90.0,
        toi_per_game: toi,
        shooting_pct: 0.1,
        games_played: gp,
        goals: points / 2,
        assists: points - points / 2,
    }
}

/// A 1-NN archive over raw features that answers `labels[i]` for
/// `records[i]`.
fn lookup_archive(dir: &Path, records: &[SkaterRecord], labels: &[f64]) -> PathBuf {
    let x = feature_matrix(records);
    let knn = KnnModel::fit(&x, labels, 1, Weighting::Uniform).unwrap();
    let model = FittedModel {
        spec: RegressorSpec::new(Hyperparams::parse(ModelKind::Knn, "k=1").unwrap(), 0).unwrap(),
        scaler: Scaler::identity(4),
        n_features: 4,
        params: ModelParams::Knn(knn),
        training_meta: None,
    };
    let path = dir.join("lookup.json");
    persist::save(&model, &path).unwrap();
    path
}

fn summary_row(dir: &Path, source: &str) -> (usize, f64, f64) {
    let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{source},")))
        .unwrap_or_else(|| panic!("no {source} row in\n{text}"));
    let f: Vec<&str> = line.split(',').collect();
    (f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
}

#[test]
fn unreadable_skaters_is_a_user_error_naming_the_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = puckpar(&["train", "--skaters", s(&missing), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn missing_column_is_a_user_error() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("s.csv");
    fs::write(&p, "player_id,name\np1,A\n").unwrap();
    let out = puckpar(&["train", "--skaters", s(&p), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing required column"));
}

#[test]
fn too_few_rows_to_split() {
    let dir = TempDir::new().unwrap();
    let recs: Vec<SkaterRecord> = (0..9)
        .map(|i| record(&format!("p{i}"), "T01", 10.0 + i as f64, 10, i))
        .collect();
    let p = dir.path().join("s.csv");
    fs::write(&p, synth::skaters_to_csv(&recs)).unwrap();
    let out = puckpar(&["train", "--skaters", s(&p), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn header_only_predict_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let recs: Vec<SkaterRecord> = (0..3)
        .map(|i| record(&format!("p{i}"), "T01", 10.0 + i as f64, 10, i))
        .collect();
    let model = lookup_archive(dir.path(), &recs, &[0.1, 0.2, 0.3]);
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, format!("{}\n", SKATER_COLUMNS.join(","))).unwrap();
    let out = puckpar(&["predict", "--model", s(&model), "--skaters", s(&empty)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "player_id,name,predicted_ppg\n");
}

#[test]
fn predict_to_stdout_and_file_agree() {
    let dir = TempDir::new().unwrap();
    let recs: Vec<SkaterRecord> = (0..4)
        .map(|i| record(&format!("p{i}"), "T01", 10.0 + i as f64, 10, i))
        .collect();
    let model = lookup_archive(dir.path(), &recs, &[0.5, 0.25, 1.0, 0.0]);
    let sk = dir.path().join("s.csv");
    fs::write(&sk, synth::skaters_to_csv(&recs)).unwrap();
    let out = puckpar(&["predict", "--model", s(&model), "--skaters", s(&sk)]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        stdout,
        "player_id,name,predicted_ppg\np0,Player p0,0.5\np1,Player p1,0.25\np2,Player p2,1\np3,Player p3,0\n"
    );
    let out = puckpar(&[
        "predict", "--model", s(&model), "--skaters", s(&sk), "--out", s(dir.path()),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("predictions.csv")).unwrap(), stdout);
}

#[test]
fn evaluate_with_a_perfect_lookup_scores_zero() {
    let dir = TempDir::new().unwrap();
    let recs: Vec<SkaterRecord> = (0..30)
        .map(|i| record(&format!("p{i:02}"), "T01", 8.0 + i as f64 * 0.5, 40, 3 * i))
        .collect();
    let actual: Vec<f64> = recs.iter().map(|r| f64::from(r.points()) / 40.0).collect();
    let model = lookup_archive(dir.path(), &recs, &actual);
    let sk = dir.path().join("s.csv");
    fs::write(&sk, synth::skaters_to_csv(&recs)).unwrap();
    let out = puckpar(&[
        "evaluate", "--model", s(&model), "--skaters", s(&sk), "--top", "10", "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary_row(dir.path(), "knn"), (10, 0.0, 0.0));
    let curve = fs::read_to_string(dir.path().join("curves_knn.csv")).unwrap();
    // header plus ten ranks, best scorer first
    assert_eq!(curve.lines().count(), 11);
    assert!(curve.lines().nth(1).unwrap().starts_with("knn,1,p29,"));
}

#[test]
fn evaluate_reproduces_the_top_ten_fixture() {
    let dir = TempDir::new().unwrap();
    // actual PPG as points over 100 games; predicted via the lookup archive
    let table = [
        (148, 1.18),
        (117, 1.02),
        (107, 1.00),
        (117, 0.99),
        (117, 0.99),
        (128, 0.98),
        (114, 0.97),
        (106, 0.96),
        (85, 0.93),
        (121, 0.91),
    ];
    let recs: Vec<SkaterRecord> = table
        .iter()
        .enumerate()
        .map(|(i, &(pts, _))| record(&format!("p{i}"), "T01", 10.0 + i as f64, 100, pts))
        .collect();
    let predicted: Vec<f64> = table.iter().map(|&(_, p)| p).collect();
    let model = lookup_archive(dir.path(), &recs, &predicted);
    let sk = dir.path().join("s.csv");
    fs::write(&sk, synth::skaters_to_csv(&recs)).unwrap();
    let out = puckpar(&[
        "evaluate", "--model", s(&model), "--skaters", s(&sk), "--top", "10", "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (n, mean, median) = summary_row(dir.path(), "knn");
    assert_eq!(n, 10);
    assert!((mean - 0.183).abs() <= 1e-12, "mean {mean}");
    assert!((median - 0.175).abs() <= 1e-12, "median {median}");
}

#[test]
fn evaluate_reports_baselines_over_their_coverage() {
    let dir = TempDir::new().unwrap();
    let recs: Vec<SkaterRecord> = (0..12)
        .map(|i| record(&format!("p{i:02}"), "T01", 8.0 + i as f64, 10, i))
        .collect();
    let actual: Vec<f64> = recs.iter().map(|r| f64::from(r.points()) / 10.0).collect();
    let model = lookup_archive(dir.path(), &recs, &actual);
    let sk = dir.path().join("s.csv");
    fs::write(&sk, synth::skaters_to_csv(&recs)).unwrap();
    let bl = dir.path().join("b.csv");
    // tsn misses by 0.5 on two of the top five; nhl has nobody in the top five
    fs::write(
        &bl,
        "player_id,source,projected_ppg\np11,tsn,1.6\np10,tsn,0.5\np00,nhl,0.0\n",
    )
    .unwrap();
    let out = puckpar(&[
        "evaluate", "--model", s(&model), "--skaters", s(&sk), "--baselines", s(&bl),
        "--top", "5", "--out", s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary_row(dir.path(), "tsn"), (2, 0.5, 0.5));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(!summary.contains("\nnhl,"));
}

fn par_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let recs = vec![
        record("a", "T01", 10.0, 10, 5),
        record("b", "T01", 11.0, 10, 8),
        record("c", "T02", 12.0, 10, 2),
    ];
    let model = lookup_archive(dir, &recs, &[1.0, 0.6, 0.4]);
    let sk = dir.join("s.csv");
    fs::write(&sk, synth::skaters_to_csv(&recs)).unwrap();
    let teams = dir.join("t.csv");
    fs::write(&teams, "team_id,ppcg_season,ppcg_recent\nT01,0.5,0.25\nT02,0.8,0.0\n").unwrap();
    (model, sk, teams)
}

#[test]
fn par_leaderboard_by_hand() {
    let dir = TempDir::new().unwrap();
    let (model, sk, teams) = par_fixture(dir.path());
    let out = puckpar(&[
        "par", "--model", s(&model), "--skaters", s(&sk), "--teams", s(&teams),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    // a: gap 0.5 -> 0.5/0.5 + 2 * 0.5/0.25 = 5
    // c: gap 0.2 -> 0.2/0.8 + 2 * 0.2/0.05 = 8.25 (recent floored)
    // b: gap -0.2 -> -0.2/0.5 + 2 * -0.2/0.25 = -2
    let ids: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(ids, ["c", "a", "b"]);
    let par: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    for (got, want) in par.iter().zip([8.25, 5.0, -2.0]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn par_with_zero_wo_and_top_limit() {
    let dir = TempDir::new().unwrap();
    let (model, sk, teams) = par_fixture(dir.path());
    let out = puckpar(&[
        "par", "--model", s(&model), "--skaters", s(&sk), "--teams", s(&teams), "--wo", "0",
        "--top", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // season term only: a = 1.0, c = 0.25
    assert!(rows[0].starts_with("1,a,"));
    assert!(rows[1].starts_with("2,c,"));
}

#[test]
fn par_unknown_team_is_a_user_error() {
    let dir = TempDir::new().unwrap();
    let (model, sk, _) = par_fixture(dir.path());
    let teams = dir.path().join("t1.csv");
    fs::write(&teams, "team_id,ppcg_season,ppcg_recent\nT01,0.5,0.25\n").unwrap();
    let out = puckpar(&[
        "par", "--model", s(&model), "--skaters", s(&sk), "--teams", s(&teams),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c (team T02)"));
}

#[test]
fn corrupt_archive_is_a_user_error() {
    let dir = TempDir::new().unwrap();
    let (model, sk, _) = par_fixture(dir.path());
    let text = fs::read_to_string(&model).unwrap();
    fs::write(&model, text.replace("\"schema_version\": 1", "\"schema_version\": 9")).unwrap();
    let out = puckpar(&["predict", "--model", s(&model), "--skaters", s(&sk)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
}

#[test]
fn train_writes_archive_and_report() {
    let dir = TempDir::new().unwrap();
    let recs = synth::skaters(&synth::SynthConfig {
        n_players: 120,
        ..synth::SynthConfig::default()
    });
    let sk = dir.path().join("s.csv");
    fs::write(&sk, synth::skaters_to_csv(&recs)).unwrap();
    let out_dir = dir.path().join("run");
    let out = puckpar(&["train", "--skaters", s(&sk), "--out", s(&out_dir), "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed: 3"));
    assert!(stderr.contains("selected: "));
    let report = fs::read_to_string(out_dir.join("grid_report.csv")).unwrap();
    // header plus 5 + 14 + 24 + 18 + 6 candidates
    assert_eq!(report.lines().count(), 1 + 67);
    let model = persist::load(out_dir.join("model.json")).unwrap();
    assert_eq!(model.spec.seed, 3);
}
