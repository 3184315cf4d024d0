//! CSV loading, the 80/10/10 split, and z-score standardization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ppg, SkaterRecord, TeamForm, N_FEATURES};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const SKATER_COLUMNS: [&str; 11] = [
    "player_id",
    "name",
    "team_id",
    "season",
    "height_cm",
    "weight_kg",
    "toi_per_game",
    "shooting_pct",
    "games_played",
    "goals",
    "assists",
];

const CM_PER_INCH: f64 = 2.54;
const KG_PER_POUND: f64 = 0.453_592_37;

/// Smallest dataset that leaves one row each for validation and test.
pub const MIN_ROWS: usize = 10;

/// External projection providers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineSource {
    Tsn,
    Nhl,
}

impl BaselineSource {
    pub const ALL: [BaselineSource; 2] = [BaselineSource::Tsn, BaselineSource::Nhl];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineSource::Tsn => "tsn",
            BaselineSource::Nhl => "nhl",
        }
    }
}

impl fmt::Display for BaselineSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for BaselineSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tsn" => Ok(BaselineSource::Tsn),
            "nhl" => Ok(BaselineSource::Nhl),
            other => Err(format!("unknown baseline source {other:?} (expected tsn or nhl)")),
        }
    }
}

pub type Baselines = BTreeMap<(String, BaselineSource), f64>;

/// Result of reading a skaters file: the admitted rows plus one warning per
/// dropped row.
#[derive(Debug, Clone, Default)]
pub struct LoadedSkaters {
    pub records: Vec<SkaterRecord>,
    pub warnings: Vec<String>,
}

/// Column lookup over a header row.
struct Columns<'a> {
    path: &'a Path,
    index: HashMap<String, usize>,
}

impl<'a> Columns<'a> {
    fn new(path: &'a Path, headers: &csv::StringRecord) -> Self {
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        Self { path, index }
    }

    fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    fn require(&self, names: &[&str]) -> Result<()> {
        for name in names {
            if !self.has(name) {
                return Err(Error::Schema {
                    path: self.path.to_path_buf(),
                    column: (*name).to_string(),
                });
            }
        }
        Ok(())
    }

    fn str<'r>(&self, row: &'r csv::StringRecord, name: &str) -> &'r str {
        row.get(self.index[name]).unwrap_or("").trim()
    }

    fn parse<T: FromStr>(&self, row: &csv::StringRecord, line: usize, name: &str) -> Result<T> {
        let raw = self.str(row, name);
        raw.parse().map_err(|_| Error::Parse {
            path: self.path.to_path_buf(),
            row: line,
            column: name.to_string(),
            value: raw.to_string(),
        })
    }
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

fn line_of(row: &csv::StringRecord) -> usize {
    row.position().map_or(0, |p| p.line() as usize)
}

/// Reads a skaters CSV. Rows keep file order. Rows with `games_played = 0`
/// are dropped with a warning; any other bad row is an error.
///
/// Imperial `height_in` / `weight_lb` columns are accepted in place of
/// `height_cm` / `weight_kg` and converted on load.
pub fn load_skaters(path: impl AsRef<Path>) -> Result<LoadedSkaters> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(path, &headers);

    let height_col = if !cols.has("height_cm") && cols.has("height_in") {
        ("height_in", CM_PER_INCH)
    } else {
        ("height_cm", 1.0)
    };
    let weight_col = if !cols.has("weight_kg") && cols.has("weight_lb") {
        ("weight_lb", KG_PER_POUND)
    } else {
        ("weight_kg", 1.0)
    };
    let required: Vec<&str> = SKATER_COLUMNS
        .iter()
        .map(|&c| match c {
            "height_cm" => height_col.0,
            "weight_kg" => weight_col.0,
            other => other,
        })
        .collect();
    cols.require(&required)?;

    let mut out = LoadedSkaters::default();
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = line_of(&row);
        let record = SkaterRecord {
            player_id: cols.str(&row, "player_id").to_string(),
            name: cols.str(&row, "name").to_string(),
            team_id: cols.str(&row, "team_id").to_string(),
            season: cols.str(&row, "season").to_string(),
            height: cols.parse::<f64>(&row, line, height_col.0)? * height_col.1,
            weight: cols.parse::<f64>(&row, line, weight_col.0)? * weight_col.1,
            toi_per_game: cols.parse(&row, line, "toi_per_game")?,
            shooting_pct: cols.parse(&row, line, "shooting_pct")?,
            games_played: cols.parse(&row, line, "games_played")?,
            goals: cols.parse(&row, line, "goals")?,
            assists: cols.parse(&row, line, "assists")?,
        };
        if record.games_played == 0 {
            let msg = format!(
                "{}: row {line}: skipping {} ({}), games_played is 0",
                path.display(),
                record.player_id,
                record.name
            );
            log::warn!("{msg}");
            out.warnings.push(msg);
            continue;
        }
        record.validate().map_err(|e| Error::Validation {
            path: path.to_path_buf(),
            row: line,
            reason: e.to_string(),
        })?;
        out.records.push(record);
    }
    Ok(out)
}

/// Reads a teams CSV (`team_id,ppcg_season,ppcg_recent`).
pub fn load_team_forms(path: impl AsRef<Path>) -> Result<BTreeMap<String, TeamForm>> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(path, &headers);
    cols.require(&["team_id", "ppcg_season", "ppcg_recent"])?;

    let mut forms = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = line_of(&row);
        let team_id = cols.str(&row, "team_id").to_string();
        let form = TeamForm::new(
            team_id.clone(),
            cols.parse(&row, line, "ppcg_season")?,
            cols.parse(&row, line, "ppcg_recent")?,
        )
        .map_err(|e| Error::Validation {
            path: path.to_path_buf(),
            row: line,
            reason: e.to_string(),
        })?;
        if forms.insert(team_id.clone(), form).is_some() {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                key: team_id,
            });
        }
    }
    Ok(forms)
}

/// Reads a baselines CSV (`player_id,source,projected_ppg`).
pub fn load_baselines(path: impl AsRef<Path>) -> Result<Baselines> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(path, &headers);
    cols.require(&["player_id", "source", "projected_ppg"])?;

    let mut out = Baselines::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = line_of(&row);
        let invalid = |reason: String| Error::Validation {
            path: path.to_path_buf(),
            row: line,
            reason,
        };
        let player_id = cols.str(&row, "player_id").to_string();
        let source: BaselineSource = cols.str(&row, "source").parse().map_err(invalid)?;
        let projected: f64 = cols.parse(&row, line, "projected_ppg")?;
        if !(projected.is_finite() && projected >= 0.0) {
            return Err(invalid(format!(
                "projected_ppg must be non-negative, got {projected}"
            )));
        }
        let key = (player_id, source);
        if out.contains_key(&key) {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                key: format!("({}, {})", key.0, key.1),
            });
        }
        out.insert(key, projected);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

/// Row partition. Index lists are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub assignment: Vec<SplitTag>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// `(train, validation, test)` sizes for `n` rows.
    pub fn sizes(n: usize) -> (usize, usize, usize) {
        let tenth = n / 10;
        (n - 2 * tenth, tenth, tenth)
    }
}

/// Seeded shuffle, then contiguous assignment: the first `floor(n/10)`
/// shuffled rows go to test, the next `floor(n/10)` to validation, the rest
/// to train.
pub fn split_indices(n: usize, seed: u64) -> Result<Split> {
    if n < MIN_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_ROWS,
            got: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let (_, n_val, n_test) = Split::sizes(n);
    let mut assignment = vec![SplitTag::Train; n];
    for &i in &order[..n_test] {
        assignment[i] = SplitTag::Test;
    }
    for &i in &order[n_test..n_test + n_val] {
        assignment[i] = SplitTag::Validation;
    }
    let pick = |tag| {
        assignment
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t == tag)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    };
    Ok(Split {
        train: pick(SplitTag::Train),
        validation: pick(SplitTag::Validation),
        test: pick(SplitTag::Test),
        assignment,
    })
}

pub fn split(records: &[SkaterRecord], seed: u64) -> Result<Split> {
    split_indices(records.len(), seed)
}

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-variance columns hold 1.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn identity(width: usize) -> Self {
        Self {
            mean: vec![0.0; width],
            std: vec![1.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, rows: &Matrix) -> Result<Matrix> {
        rows.ensure_width(self.width())?;
        let mut out = rows.clone();
        for i in 0..out.nrows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, rows: &Matrix) -> Result<Matrix> {
        rows.ensure_width(self.width())?;
        let mut out = rows.clone();
        for i in 0..out.nrows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = *v * self.std[j] + self.mean[j];
            }
        }
        Ok(out)
    }
}

pub fn fit_scaler(train: &Matrix) -> Result<Scaler> {
    if train.nrows() == 0 {
        return Err(Error::Empty("training split"));
    }
    let n = train.nrows() as f64;
    let mut mean = vec![0.0; train.ncols()];
    let mut std = vec![0.0; train.ncols()];
    for j in 0..train.ncols() {
        let first = train.get(0, j);
        // rounding in the mean would otherwise leave a constant column with a
        // tiny positive variance
        if train.rows().all(|r| r[j] == first) {
            mean[j] = first;
            std[j] = 1.0;
            continue;
        }
        let m = train.rows().map(|r| r[j]).sum::<f64>() / n;
        let var = train.rows().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
        mean[j] = m;
        std[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    if mean.iter().chain(&std).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }
    Ok(Scaler { mean, std })
}

pub fn transform(scaler: &Scaler, rows: &Matrix) -> Result<Matrix> {
    scaler.transform(rows)
}

/// Raw (unstandardized) feature matrix for a set of records.
pub fn feature_matrix(records: &[SkaterRecord]) -> Matrix {
    let data = records.iter().flat_map(|r| r.features().0).collect();
    Matrix::from_vec(records.len(), N_FEATURES, data).expect("fixed-width rows")
}

/// Standardized features and labels with a frozen partition. The scaler is
/// fitted on the training rows only and then applied to every row.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<f64>,
    pub split: Split,
    pub scaler: Scaler,
    pub seed: u64,
    /// Row identities, parallel to `labels`; empty when built from raw arrays.
    pub player_ids: Vec<String>,
}

/// One slice of a dataset, copied out for training or scoring.
#[derive(Debug, Clone)]
pub struct Part {
    pub features: Matrix,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn from_records(records: &[SkaterRecord], seed: u64) -> Result<Self> {
        let labels = records
            .iter()
            .map(|r| ppg(r).map(|l| l.value()))
            .collect::<Result<Vec<_>>>()?;
        let mut ds = Self::from_raw(feature_matrix(records), labels, seed)?;
        ds.player_ids = records.iter().map(|r| r.player_id.clone()).collect();
        Ok(ds)
    }

    /// Builds from an unscaled feature matrix of any width.
    pub fn from_raw(raw: Matrix, labels: Vec<f64>, seed: u64) -> Result<Self> {
        if raw.nrows() != labels.len() {
            return Err(Error::Shape {
                expected: raw.nrows(),
                got: labels.len(),
            });
        }
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        let split = split_indices(raw.nrows(), seed)?;
        let scaler = fit_scaler(&raw.select_rows(&split.train))?;
        let features = scaler.transform(&raw)?;
        Ok(Self {
            features,
            labels,
            split,
            scaler,
            seed,
            player_ids: Vec::new(),
        })
    }

    fn part(&self, idx: &[usize]) -> Part {
        Part {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn train(&self) -> Part {
        self.part(&self.split.train)
    }

    pub fn validation(&self) -> Part {
        self.part(&self.split.validation)
    }

    pub fn test(&self) -> Part {
        self.part(&self.split.test)
    }
}
