//! Value types shared across the pipeline.
//!
//! Everything here is plain data: immutable once built, `Send + Sync`, and free
//! of I/O. Units are metric (cm, kg) and shooting percentage is a fraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of model features.
pub const N_FEATURES: usize = 4;

/// Feature names in their fixed column order.
pub const FEATURE_NAMES: [&str; N_FEATURES] =
    ["height_cm", "weight_kg", "toi_per_game", "shooting_pct"];

/// One player-season row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkaterRecord {
    pub player_id: String,
    pub name: String,
    pub team_id: String,
    pub season: String,
    /// Centimeters.
    pub height: f64,
    /// Kilograms.
    pub weight: f64,
    /// Minutes per game.
    pub toi_per_game: f64,
    /// Fraction in [0, 1].
    pub shooting_pct: f64,
    pub games_played: u32,
    pub goals: u32,
    pub assists: u32,
}

impl SkaterRecord {
    /// Checks the physical and usage ranges. `games_played` is not checked here:
    /// a zero is legal on a roster row, it only makes the label undefined.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRecord(format!("{}: {msg}", self.player_id)));
        if !(self.height.is_finite() && self.height > 0.0) {
            return bad(format!("height must be positive, got {}", self.height));
        }
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return bad(format!("weight must be positive, got {}", self.weight));
        }
        if !(self.toi_per_game > 0.0 && self.toi_per_game <= 60.0) {
            return bad(format!(
                "toi_per_game must be in (0, 60], got {}",
                self.toi_per_game
            ));
        }
        if !(0.0..=1.0).contains(&self.shooting_pct) {
            return bad(format!(
                "shooting_pct must be a fraction in [0, 1], got {}",
                self.shooting_pct
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> u32 {
        self.goals + self.assists
    }

    pub fn features(&self) -> FeatureVector {
        FeatureVector([
            self.height,
            self.weight,
            self.toi_per_game,
            self.shooting_pct,
        ])
    }
}

/// `[height, weight, toi_per_game, shooting_pct]`, always in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Points per game.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PpgLabel(pub f64);

impl PpgLabel {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(goals + assists) / games_played`.
pub fn ppg(record: &SkaterRecord) -> Result<PpgLabel> {
    if record.games_played == 0 {
        return Err(Error::UndefinedLabel {
            player_id: record.player_id.clone(),
        });
    }
    Ok(PpgLabel(
        f64::from(record.points()) / f64::from(record.games_played),
    ))
}

/// Standings points earned over points possible, for the whole season and
/// for the last ten games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamForm {
    pub team_id: String,
    pub ppcg_season: f64,
    pub ppcg_recent: f64,
}

impl TeamForm {
    pub fn new(team_id: impl Into<String>, ppcg_season: f64, ppcg_recent: f64) -> Result<Self> {
        let team_id = team_id.into();
        if !(ppcg_season > 0.0 && ppcg_season <= 1.0) {
            return Err(Error::InvalidRecord(format!(
                "{team_id}: ppcg_season must be in (0, 1], got {ppcg_season}"
            )));
        }
        if !(0.0..=1.0).contains(&ppcg_recent) {
            return Err(Error::InvalidRecord(format!(
                "{team_id}: ppcg_recent must be in [0, 1], got {ppcg_recent}"
            )));
        }
        Ok(Self {
            team_id,
            ppcg_season,
            ppcg_recent,
        })
    }

    /// Builds a form from raw standings points (two are possible per game).
    pub fn from_points(
        team_id: impl Into<String>,
        season_points: u32,
        season_games: u32,
        recent_points: u32,
        recent_games: u32,
    ) -> Result<Self> {
        let pct = |pts: u32, games: u32| {
            if games == 0 {
                0.0
            } else {
                f64::from(pts) / (2.0 * f64::from(games))
            }
        };
        Self::new(
            team_id,
            pct(season_points, season_games),
            pct(recent_points, recent_games),
        )
    }
}

/// One row of the availability leaderboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParEntry {
    pub player_id: String,
    pub name: String,
    pub ppg_predicted: f64,
    pub ppg_actual: f64,
    pub ppcg_season: f64,
    pub ppcg_recent: f64,
    pub par: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Knn,
    Tree,
    Forest,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Linear,
        ModelKind::Knn,
        ModelKind::Tree,
        ModelKind::Forest,
        ModelKind::Mlp,
    ];

    /// Order used to break validation-error ties between kinds.
    pub const TIE_ORDER: [ModelKind; 5] = [
        ModelKind::Mlp,
        ModelKind::Forest,
        ModelKind::Tree,
        ModelKind::Knn,
        ModelKind::Linear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Mlp => "mlp",
        }
    }

    pub(crate) fn tie_rank(self) -> usize {
        Self::TIE_ORDER
            .iter()
            .position(|&k| k == self)
            .expect("every kind is in TIE_ORDER")
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "knn" => Ok(ModelKind::Knn),
            "tree" => Ok(ModelKind::Tree),
            "forest" => Ok(ModelKind::Forest),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    InverseDistance,
}

impl Weighting {
    fn as_str(self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::InverseDistance => "inverse_distance",
        }
    }
}

/// How many features a forest split may look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(n_features))`.
    Sqrt,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => ((n_features as f64).sqrt().ceil() as usize).clamp(1, n_features),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            MaxFeatures::All => "all",
            MaxFeatures::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    /// Ridge penalty; 0 gives ordinary least squares.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub weighting: Weighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a `min_delta` improvement before stopping.
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![16],
            learning_rate: 1e-2,
            momentum: 0.9,
            batch_size: 32,
            max_epochs: 2000,
            patience: 50,
            min_delta: 1e-5,
        }
    }
}

/// Kind-specific hyperparameters. The variant determines the model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparams {
    Linear(LinearParams),
    Knn(KnnParams),
    Tree(TreeParams),
    Forest(ForestParams),
    Mlp(MlpParams),
}

impl Hyperparams {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::Linear(_) => ModelKind::Linear,
            Hyperparams::Knn(_) => ModelKind::Knn,
            Hyperparams::Tree(_) => ModelKind::Tree,
            Hyperparams::Forest(_) => ModelKind::Forest,
            Hyperparams::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Default values for `kind`, before any overrides.
    pub fn defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Linear => Hyperparams::Linear(LinearParams { lambda: 0.0 }),
            ModelKind::Knn => Hyperparams::Knn(KnnParams {
                k: 5,
                weighting: Weighting::Uniform,
            }),
            ModelKind::Tree => Hyperparams::Tree(TreeParams {
                max_depth: None,
                min_samples_leaf: 1,
            }),
            ModelKind::Forest => Hyperparams::Forest(ForestParams {
                n_trees: 100,
                max_depth: None,
                min_samples_leaf: 1,
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            }),
            ModelKind::Mlp => Hyperparams::Mlp(MlpParams::default()),
        }
    }

    /// Builds hyperparameters from `key=value` pairs on top of the kind's
    /// defaults. Keys that do not belong to `kind` are rejected.
    pub fn from_pairs<K, V>(kind: ModelKind, pairs: &[(K, V)]) -> Result<Self>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut hp = Self::defaults(kind);
        for (key, value) in pairs {
            hp.set(key.as_ref(), value.as_ref())?;
        }
        hp.validate()?;
        Ok(hp)
    }

    /// Parses the `key=value;key=value` form produced by `Display`.
    pub fn parse(kind: ModelKind, s: &str) -> Result<Self> {
        let pairs = s
            .split(';')
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.split_once('=').ok_or_else(|| Error::InvalidHyperparams {
                    kind,
                    reason: format!("expected key=value, got {p:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(kind, &pairs)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let kind = self.kind();
        let err = |reason: String| Error::InvalidHyperparams { kind, reason };
        let float = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(format!("{key}: not a number: {v:?}")))
        };
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| err(format!("{key}: not a non-negative integer: {v:?}")))
        };
        let depth = |v: &str| {
            if v == "none" {
                Ok(None)
            } else {
                int(v).map(Some)
            }
        };
        match (self, key) {
            (Hyperparams::Linear(p), "lambda") => p.lambda = float(value)?,
            (Hyperparams::Knn(p), "k") => p.k = int(value)?,
            (Hyperparams::Knn(p), "weighting") => {
                p.weighting = match value {
                    "uniform" => Weighting::Uniform,
                    "inverse_distance" | "distance" => Weighting::InverseDistance,
                    other => return Err(err(format!("unknown weighting {other:?}"))),
                }
            }
            (Hyperparams::Tree(p), "max_depth") => p.max_depth = depth(value)?,
            (Hyperparams::Tree(p), "min_samples_leaf") => p.min_samples_leaf = int(value)?,
            (Hyperparams::Forest(p), "n_trees") => p.n_trees = int(value)?,
            (Hyperparams::Forest(p), "max_depth") => p.max_depth = depth(value)?,
            (Hyperparams::Forest(p), "min_samples_leaf") => p.min_samples_leaf = int(value)?,
            (Hyperparams::Forest(p), "max_features") => {
                p.max_features = match value {
                    "all" => MaxFeatures::All,
                    "sqrt" => MaxFeatures::Sqrt,
                    other => return Err(err(format!("unknown max_features {other:?}"))),
                }
            }
            (Hyperparams::Forest(p), "bootstrap") => {
                p.bootstrap = value
                    .parse()
                    .map_err(|_| err(format!("bootstrap: not a bool: {value:?}")))?
            }
            (Hyperparams::Mlp(p), "hidden") => {
                p.hidden = value
                    .split(',')
                    .map(int)
                    .collect::<Result<Vec<_>>>()?;
            }
            (Hyperparams::Mlp(p), "learning_rate") => p.learning_rate = float(value)?,
            (Hyperparams::Mlp(p), "momentum") => p.momentum = float(value)?,
            (Hyperparams::Mlp(p), "batch_size") => p.batch_size = int(value)?,
            (Hyperparams::Mlp(p), "max_epochs") => p.max_epochs = int(value)?,
            (Hyperparams::Mlp(p), "patience") => p.patience = int(value)?,
            (Hyperparams::Mlp(p), "min_delta") => p.min_delta = float(value)?,
            (_, key) => return Err(err(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind();
        let fail = |reason: &str| {
            Err(Error::InvalidHyperparams {
                kind,
                reason: reason.to_string(),
            })
        };
        match self {
            Hyperparams::Linear(p) => {
                if !(p.lambda.is_finite() && p.lambda >= 0.0) {
                    return fail("lambda must be finite and >= 0");
                }
            }
            Hyperparams::Knn(p) => {
                if p.k == 0 {
                    return fail("k must be >= 1");
                }
            }
            Hyperparams::Tree(p) => {
                if p.min_samples_leaf == 0 {
                    return fail("min_samples_leaf must be >= 1");
                }
                if p.max_depth == Some(0) {
                    return fail("max_depth must be >= 1 or none");
                }
            }
            Hyperparams::Forest(p) => {
                if p.n_trees == 0 {
                    return fail("n_trees must be >= 1");
                }
                if p.min_samples_leaf == 0 {
                    return fail("min_samples_leaf must be >= 1");
                }
                if p.max_depth == Some(0) {
                    return fail("max_depth must be >= 1 or none");
                }
            }
            Hyperparams::Mlp(p) => {
                if p.hidden.contains(&0) {
                    return fail("hidden layer widths must be >= 1");
                }
                if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
                    return fail("learning_rate must be > 0");
                }
                if !(0.0..1.0).contains(&p.momentum) {
                    return fail("momentum must be in [0, 1)");
                }
                if p.batch_size == 0 || p.max_epochs == 0 {
                    return fail("batch_size and max_epochs must be >= 1");
                }
                if !(p.min_delta.is_finite() && p.min_delta >= 0.0) {
                    return fail("min_delta must be >= 0");
                }
            }
        }
        Ok(())
    }
}

fn fmt_depth(d: Option<usize>) -> String {
    d.map_or_else(|| "none".to_string(), |d| d.to_string())
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparams::Linear(p) => write!(f, "lambda={}", p.lambda),
            Hyperparams::Knn(p) => write!(f, "k={};weighting={}", p.k, p.weighting.as_str()),
            Hyperparams::Tree(p) => write!(
                f,
                "max_depth={};min_samples_leaf={}",
                fmt_depth(p.max_depth),
                p.min_samples_leaf
            ),
            Hyperparams::Forest(p) => write!(
                f,
                "n_trees={};max_depth={};min_samples_leaf={};max_features={};bootstrap={}",
                p.n_trees,
                fmt_depth(p.max_depth),
                p.min_samples_leaf,
                p.max_features.as_str(),
                p.bootstrap
            ),
            Hyperparams::Mlp(p) => {
                let hidden: Vec<String> = p.hidden.iter().map(|h| h.to_string()).collect();
                write!(
                    f,
                    "hidden={};learning_rate={};momentum={};batch_size={};max_epochs={};patience={};min_delta={}",
                    hidden.join(","),
                    p.learning_rate,
                    p.momentum,
                    p.batch_size,
                    p.max_epochs,
                    p.patience,
                    p.min_delta
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(goals: u32, assists: u32, games: u32) -> SkaterRecord {
        SkaterRecord {
            player_id: "p".into(),
            name: "P".into(),
            team_id: "T".into(),
            season: "2016-2017".into(),
            height: 185.0,
            weight: 90.0,
            toi_per_game: 17.5,
            shooting_pct: 0.1,
            games_played: games,
            goals,
            assists,
        }
    }

    #[test]
    fn ppg_examples() {
        assert_eq!(ppg(&record(0, 0, 82)).unwrap().value(), 0.0);
        assert_eq!(ppg(&record(41, 41, 82)).unwrap().value(), 1.0);
        assert_eq!(ppg(&record(30, 40, 70)).unwrap().value(), 1.0);
    }

    #[test]
    fn ppg_zero_games_is_undefined() {
        assert!(matches!(
            ppg(&record(1, 1, 0)),
            Err(Error::UndefinedLabel { .. })
        ));
    }

    proptest! {
        #[test]
        fn ppg_is_scale_free(g in 0u32..100, a in 0u32..100, n in 1u32..100, c in 1u32..20) {
            let base = ppg(&record(g, a, n)).unwrap().value();
            let scaled = ppg(&record(g * c, a * c, n * c)).unwrap().value();
            prop_assert!((base - scaled).abs() <= 1e-15 * base.max(1.0));
        }
    }

    #[test]
    fn feature_order_is_fixed() {
        let r = record(1, 1, 1);
        assert_eq!(r.features().0, [185.0, 90.0, 17.5, 0.1]);
    }

    #[test]
    fn record_validation() {
        let mut r = record(1, 1, 1);
        assert!(r.validate().is_ok());
        r.shooting_pct = 9.5;
        assert!(r.validate().is_err());
        let mut r = record(1, 1, 1);
        r.toi_per_game = 0.0;
        assert!(r.validate().is_err());
        let mut r = record(1, 1, 1);
        r.height = -1.0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn team_form_from_points() {
        let f = TeamForm::from_points("BOS", 41, 41, 20, 10).unwrap();
        assert_eq!(f.ppcg_season, 0.5);
        assert_eq!(f.ppcg_recent, 1.0);
        assert!(TeamForm::new("X", 0.0, 0.5).is_err());
        assert!(TeamForm::new("X", 0.5, 1.5).is_err());
        assert!(TeamForm::new("X", 0.5, 0.0).is_ok());
    }

    #[test]
    fn hyperparams_reject_foreign_keys() {
        let err = Hyperparams::from_pairs(ModelKind::Linear, &[("k", "3")]).unwrap_err();
        assert!(matches!(err, Error::InvalidHyperparams { .. }));
        let hp = Hyperparams::from_pairs(ModelKind::Knn, &[("k", "3"), ("weighting", "inverse_distance")])
            .unwrap();
        assert_eq!(
            hp,
            Hyperparams::Knn(KnnParams {
                k: 3,
                weighting: Weighting::InverseDistance
            })
        );
        assert!(Hyperparams::from_pairs(ModelKind::Knn, &[("k", "0")]).is_err());
    }

    #[test]
    fn hyperparams_display_parses_back() {
        for kind in ModelKind::ALL {
            let hp = Hyperparams::defaults(kind);
            let again = Hyperparams::parse(kind, &hp.to_string()).unwrap();
            assert_eq!(hp, again);
        }
        let hp = Hyperparams::parse(ModelKind::Mlp, "hidden=32,16;learning_rate=0.001").unwrap();
        match hp {
            Hyperparams::Mlp(p) => {
                assert_eq!(p.hidden, vec![32, 16]);
                assert_eq!(p.learning_rate, 1e-3);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn max_features_sqrt_of_four_is_two() {
        assert_eq!(MaxFeatures::Sqrt.count(4), 2);
        assert_eq!(MaxFeatures::All.count(4), 4);
    }
}
