//! Validation and aggregation: leave-one-week-out cross validation,
//! training-size sweeps and player/team leaderboards.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epv::clamp_yac;
use crate::error::{Error, Result};
use crate::ghost::{GhostConfig, GhostGrid};
use crate::rfcde::{
    density_mean, density_mode, empirical_cde_loss, train, FeatureMatrix, Forest, ForestConfig, Grid,
    Responses,
};
use crate::rng;
use crate::tracking::{build_feature_vector, FeatureSet, PlayRecord, RosterEntry, Role};

/// Points in the common grid used for the YAC CDE loss.
pub const LOSS_GRID_POINTS: usize = 401;
/// Padding of the loss grid beyond the observed response range, in yards.
pub const LOSS_GRID_PADDING: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Yards after catch given the 20 catch features.
    Yac,
    /// Nearest-defender location given everyone else.
    Ghost2d,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Yac => "yac",
            ModelKind::Ghost2d => "ghost2d",
        }
    }

    pub fn default_features(self) -> FeatureSet {
        match self {
            ModelKind::Yac => FeatureSet::yac(),
            ModelKind::Ghost2d => FeatureSet::ghost(),
        }
    }

    pub fn metric_names(self) -> [&'static str; 3] {
        match self {
            ModelKind::Yac => ["cde_loss", "rmse_mean", "rmse_mode"],
            ModelKind::Ghost2d => ["cross_entropy", "dist_mean", "dist_mode"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "yac" => Ok(ModelKind::Yac),
            "ghost" | "ghost2d" => Ok(ModelKind::Ghost2d),
            other => Err(Error::InvalidConfig(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Design matrix and responses for one model.
#[derive(Clone, Debug)]
pub struct TrainingData {
    pub x: FeatureMatrix,
    pub y: Responses,
    /// YAC responses moved into the grid range.
    pub clamped: usize,
}

fn feature_rows(records: &[&PlayRecord], set: &FeatureSet) -> Result<FeatureMatrix> {
    let rows = records
        .iter()
        .map(|r| build_feature_vector(r, set).map(|v| v.values))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return FeatureMatrix::new(0, set.len(), Vec::new());
    }
    FeatureMatrix::from_rows(&rows)
}

/// YAC model data; responses are clamped to each play's grid range.
pub fn yac_training_data(records: &[&PlayRecord], set: &FeatureSet) -> Result<TrainingData> {
    let mut clamped = 0;
    let y = records
        .iter()
        .map(|r| {
            let (v, moved) = clamp_yac(r.yac, r.catch_x_adj());
            clamped += moved as usize;
            v
        })
        .collect();
    if clamped > 0 {
        log::info!("{clamped} training YAC values clamped to the grid range");
    }
    Ok(TrainingData {
        x: feature_rows(records, set)?,
        y: Responses::univariate(y),
        clamped,
    })
}

/// Ghost-location data: responses are the nearest defender's `(x_adj, y_adj)`.
pub fn ghost_training_data(records: &[&PlayRecord], set: &FeatureSet) -> Result<TrainingData> {
    if set.contains(Role::Def(1)) {
        return Err(Error::InvalidConfig(
            "ghost location features must exclude def1".into(),
        ));
    }
    let y = records
        .iter()
        .map(|r| {
            r.def1()
                .map(|d| (d.x_adj, d.y_adj))
                .ok_or(Error::MissingRole(Role::Def(1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingData {
        x: feature_rows(records, set)?,
        y: Responses::bivariate(&y),
        clamped: 0,
    })
}

pub fn training_data(kind: ModelKind, records: &[&PlayRecord], set: &FeatureSet) -> Result<TrainingData> {
    match kind {
        ModelKind::Yac => yac_training_data(records, set),
        ModelKind::Ghost2d => ghost_training_data(records, set),
    }
}

pub fn train_model(
    kind: ModelKind,
    records: &[&PlayRecord],
    set: &FeatureSet,
    config: &ForestConfig,
) -> Result<Forest> {
    let data = training_data(kind, records, set)?;
    train(&data.x, &data.y, config)
}

/// Common grid for the YAC CDE loss: the clamped response range of
/// `records` padded on both sides.
pub fn yac_loss_grid(records: &[&PlayRecord]) -> Result<Grid> {
    let (lo, hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        let v = clamp_yac(r.yac, r.catch_x_adj()).0;
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return Err(Error::InsufficientData("no plays for loss grid".into()));
    }
    Ok(Grid::linspace(
        lo - LOSS_GRID_PADDING,
        hi + LOSS_GRID_PADDING,
        LOSS_GRID_POINTS,
    ))
}

fn rmse(sq: &[f64]) -> f64 {
    (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
}

/// CDE loss on `loss_grid` and RMSE of the density mean and mode against
/// the observed (clamped) YAC.
pub fn yac_metrics(
    forest: &Forest,
    set: &FeatureSet,
    test: &[&PlayRecord],
    loss_grid: &Grid,
) -> Result<BTreeMap<String, f64>> {
    let data = yac_training_data(test, set)?;
    let m = test.len();
    let per_play: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let c = forest.condition(data.x.row(i), None)?;
            let d = c.on_grid(loss_grid)?;
            let y = data.y.row(i)[0];
            let mean = density_mean(&d)[0];
            let mode = density_mode(&d)[0];
            Ok(((mean - y).powi(2), (mode - y).powi(2)))
        })
        .collect::<Result<_>>()?;
    let loss = empirical_cde_loss(m, loss_grid, |i| {
        let c = forest.condition(data.x.row(i), None)?;
        Ok((c.on_grid(loss_grid)?.values, c.density_at(data.y.row(i))?))
    })?;
    let (mean_sq, mode_sq): (Vec<f64>, Vec<f64>) = per_play.into_iter().unzip();
    Ok(BTreeMap::from([
        ("cde_loss".to_string(), loss),
        ("rmse_mean".to_string(), rmse(&mean_sq)),
        ("rmse_mode".to_string(), rmse(&mode_sq)),
    ]))
}

/// Cross entropy `-mean log h(l_obs)` of the observed defender locations
/// and mean Euclidean distance from the observed location to the mean and
/// mode of the normalised density on each play's ghost lattice.
pub fn ghost_metrics(
    forest: &Forest,
    set: &FeatureSet,
    test: &[&PlayRecord],
    grid_config: &GhostConfig,
) -> Result<BTreeMap<String, f64>> {
    let data = ghost_training_data(test, set)?;
    let per_play: Vec<(f64, f64, f64)> = test
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let c = forest.condition(data.x.row(i), None)?;
            let obs = data.y.row(i);
            let log_h = c.density_at(obs)?.max(f64::MIN_POSITIVE).ln();
            let lattice = GhostGrid::around(&r.receiver, grid_config)?.lattice();
            let d = c.on_grid(&lattice)?.normalized()?;
            let mean = density_mean(&d);
            let mode = density_mode(&d);
            let dist = |p: &[f64]| (p[0] - obs[0]).hypot(p[1] - obs[1]);
            Ok((-log_h, dist(&mean), dist(&mode)))
        })
        .collect::<Result<_>>()?;
    let n = per_play.len() as f64;
    let avg = |f: fn(&(f64, f64, f64)) -> f64| per_play.iter().map(f).sum::<f64>() / n;
    Ok(BTreeMap::from([
        ("cross_entropy".to_string(), avg(|t| t.0)),
        ("dist_mean".to_string(), avg(|t| t.1)),
        ("dist_mode".to_string(), avg(|t| t.2)),
    ]))
}

/// Shared settings for validation runs.
#[derive(Clone, Debug)]
pub struct EvalSettings {
    pub forest: ForestConfig,
    pub ghost_grid: GhostConfig,
}

fn fold_metrics(
    kind: ModelKind,
    train_set: &[&PlayRecord],
    test_set: &[&PlayRecord],
    set: &FeatureSet,
    forest_config: &ForestConfig,
    settings: &EvalSettings,
    loss_grid: &Grid,
) -> Result<BTreeMap<String, f64>> {
    let forest = train_model(kind, train_set, set, forest_config)?;
    match kind {
        ModelKind::Yac => yac_metrics(&forest, set, test_set, loss_grid),
        ModelKind::Ghost2d => ghost_metrics(&forest, set, test_set, &settings.ghost_grid),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub feature_set: String,
    pub test_week: u32,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub feature_set: String,
    pub metric: String,
    pub mean: f64,
    pub se: f64,
    pub n_folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub kind: ModelKind,
    pub folds: Vec<FoldResult>,
    pub summary: Vec<MetricSummary>,
}

/// Mean and standard error `sd / sqrt(n)` (sample sd); the error is NaN
/// with fewer than two values.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / n.sqrt())
}

fn weeks_of(records: &[PlayRecord]) -> Vec<u32> {
    records
        .iter()
        .map(|r| r.week)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Leave-one-week-out cross validation of each candidate feature set.
pub fn lowo_cv(
    records: &[PlayRecord],
    sets: &[FeatureSet],
    kind: ModelKind,
    settings: &EvalSettings,
) -> Result<CvReport> {
    let weeks = weeks_of(records);
    if weeks.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "cross validation needs at least 2 weeks, found {}",
            weeks.len()
        )));
    }
    let all: Vec<&PlayRecord> = records.iter().collect();
    let loss_grid = yac_loss_grid(&all)?;
    let jobs: Vec<(usize, u32)> = (0..sets.len())
        .flat_map(|s| weeks.iter().map(move |&w| (s, w)))
        .collect();
    let folds = jobs
        .par_iter()
        .map(|&(s, week)| {
            let (test, train_set): (Vec<&PlayRecord>, Vec<&PlayRecord>) =
                all.iter().partition(|r| r.week == week);
            let forest_config = ForestConfig {
                seed: rng::derive_seed(settings.forest.seed, &[s as u64, week as u64]),
                ..settings.forest.clone()
            };
            let metrics = fold_metrics(
                kind,
                &train_set,
                &test,
                &sets[s],
                &forest_config,
                settings,
                &loss_grid,
            )?;
            Ok(FoldResult {
                feature_set: sets[s].label(),
                test_week: week,
                n_train: train_set.len(),
                n_test: test.len(),
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Vec::new();
    for set in sets {
        let label = set.label();
        for metric in kind.metric_names() {
            let values: Vec<f64> = folds
                .iter()
                .filter(|f| f.feature_set == label)
                .map(|f| f.metrics[metric])
                .collect();
            let (mean, se) = mean_se(&values);
            summary.push(MetricSummary {
                feature_set: label.clone(),
                metric: metric.to_string(),
                mean,
                se,
                n_folds: values.len(),
            });
        }
    }
    Ok(CvReport {
        kind,
        folds,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_weeks: usize,
    pub last_train_week: u32,
    pub test_week: u32,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: BTreeMap<String, f64>,
}

/// Trains on growing prefixes of the weeks (first week, first two, ...)
/// and tests each model on the final week.
pub fn week_sweep(
    records: &[PlayRecord],
    kind: ModelKind,
    set: &FeatureSet,
    settings: &EvalSettings,
) -> Result<Vec<SweepRow>> {
    let weeks = weeks_of(records);
    if weeks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "week sweep needs at least 3 weeks, found {}",
            weeks.len()
        )));
    }
    let test_week = *weeks.last().unwrap();
    let all: Vec<&PlayRecord> = records.iter().collect();
    let loss_grid = yac_loss_grid(&all)?;
    let test: Vec<&PlayRecord> = all.iter().copied().filter(|r| r.week == test_week).collect();
    (1..weeks.len())
        .into_par_iter()
        .map(|k| {
            let last = weeks[k - 1];
            let train_set: Vec<&PlayRecord> = all.iter().copied().filter(|r| r.week <= last).collect();
            let forest_config = ForestConfig {
                seed: rng::derive_seed(settings.forest.seed, &[k as u64]),
                ..settings.forest.clone()
            };
            let metrics = fold_metrics(kind, &train_set, &test, set, &forest_config, settings, &loss_grid)?;
            Ok(SweepRow {
                n_weeks: k,
                last_train_week: last,
                test_week,
                n_train: train_set.len(),
                n_test: test.len(),
                metrics,
            })
        })
        .collect()
}

/// Pearson correlation; `None` with fewer than two pairs or zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Per-play season result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayOutcome {
    pub game_id: u64,
    pub play_id: u64,
    pub week: u32,
    pub defense_team: String,
    pub def1_id: Option<u64>,
    pub epv_catch: f64,
    pub expected_delta: f64,
    pub percentile: f64,
    pub yac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerSummary {
    pub player_id: u64,
    pub display_name: String,
    pub position: String,
    pub receptions: usize,
    pub total_delta: f64,
    pub avg_delta: f64,
    pub total_yac: f64,
    pub avg_yac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    /// Ascending by total expected delta (best defenders first).
    pub players: Vec<PlayerSummary>,
    pub min_receptions: usize,
    /// Correlation of average delta and average YAC among players with at
    /// least `min_receptions`.
    pub r_overall: Option<f64>,
    pub r_by_group: BTreeMap<String, Option<f64>>,
}

impl Leaderboard {
    pub fn scatter(&self) -> impl Iterator<Item = &PlayerSummary> {
        self.players.iter().filter(|p| p.receptions >= self.min_receptions)
    }
}

/// Coarse position group used for the per-group correlations.
pub fn position_group(position: &str) -> &'static str {
    match position {
        "CB" | "S" | "SS" | "FS" | "DB" => "DB",
        "LB" | "OLB" | "ILB" | "MLB" => "LB",
        _ => "other",
    }
}

pub fn aggregate_players(
    outcomes: &[PlayOutcome],
    rosters: &BTreeMap<u64, RosterEntry>,
    min_receptions: usize,
) -> Leaderboard {
    let mut acc: BTreeMap<u64, (usize, f64, f64)> = BTreeMap::new();
    for o in outcomes {
        if let Some(id) = o.def1_id {
            let e = acc.entry(id).or_insert((0, 0.0, 0.0));
            e.0 += 1;
            e.1 += o.expected_delta;
            e.2 += o.yac;
        }
    }
    let mut players: Vec<PlayerSummary> = acc
        .into_iter()
        .map(|(id, (n, delta, yac))| {
            let roster = rosters.get(&id);
            PlayerSummary {
                player_id: id,
                display_name: roster.map(|r| r.display_name.clone()).unwrap_or_default(),
                position: roster.map(|r| r.position.clone()).unwrap_or_default(),
                receptions: n,
                total_delta: delta,
                avg_delta: delta / n as f64,
                total_yac: yac,
                avg_yac: yac / n as f64,
            }
        })
        .collect();
    players.sort_by(|a, b| {
        a.total_delta
            .total_cmp(&b.total_delta)
            .then(a.player_id.cmp(&b.player_id))
    });
    let mut board = Leaderboard {
        players,
        min_receptions,
        r_overall: None,
        r_by_group: BTreeMap::new(),
    };
    let corr = |group: Option<&str>| {
        let (x, y): (Vec<f64>, Vec<f64>) = board
            .scatter()
            .filter(|p| group.is_none_or(|g| position_group(&p.position) == g))
            .map(|p| (p.avg_delta, p.avg_yac))
            .unzip();
        pearson(&x, &y)
    };
    let r_overall = corr(None);
    let r_by_group = ["DB", "LB"]
        .into_iter()
        .map(|g| (g.to_string(), corr(Some(g))))
        .collect();
    board.r_overall = r_overall;
    board.r_by_group = r_by_group;
    board
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamSummary {
    pub team: String,
    pub plays: usize,
    pub total_delta: f64,
    pub avg_delta: f64,
    pub epa: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamReport {
    pub teams: Vec<TeamSummary>,
    /// Teams with evaluations but no EPA row; excluded from `r`.
    pub missing: Vec<String>,
    pub r: Option<f64>,
}

pub fn aggregate_teams(outcomes: &[PlayOutcome], epa: &BTreeMap<String, f64>) -> TeamReport {
    let mut acc: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for o in outcomes {
        let e = acc.entry(&o.defense_team).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += o.expected_delta;
    }
    let teams: Vec<TeamSummary> = acc
        .into_iter()
        .map(|(team, (n, total))| TeamSummary {
            team: team.to_string(),
            plays: n,
            total_delta: total,
            avg_delta: total / n as f64,
            epa: epa.get(team).copied(),
        })
        .collect();
    let missing = teams
        .iter()
        .filter(|t| t.epa.is_none())
        .map(|t| t.team.clone())
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = teams
        .iter()
        .filter_map(|t| t.epa.map(|e| (t.avg_delta, e)))
        .unzip();
    TeamReport {
        r: pearson(&x, &y),
        teams,
        missing,
    }
}

#[derive(Deserialize)]
struct EpaRow {
    team: String,
    epa: f64,
}

/// Reads a `team,epa` file of defensive passing EPA per team.
pub fn load_team_epa(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = BTreeMap::new();
    for row in reader.deserialize() {
        let r: EpaRow = row.map_err(|e| Error::csv(path, e))?;
        out.insert(r.team, r.epa);
    }
    Ok(out)
}

/// Serialized rows, or just `header` when there are none.
fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    if rows.is_empty() {
        w.write_record(header).map_err(|e| Error::csv(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_outcomes(path: &Path, rows: &[PlayOutcome]) -> Result<()> {
    write_rows(
        path,
        rows,
        &["game_id", "play_id", "week", "defense_team", "def1_id", "epv_catch", "expected_delta", "percentile", "yac"],
    )
}

pub fn read_outcomes(path: &Path) -> Result<Vec<PlayOutcome>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn write_players(path: &Path, rows: &[PlayerSummary]) -> Result<()> {
    write_rows(
        path,
        rows,
        &["player_id", "display_name", "position", "receptions", "total_delta", "avg_delta", "total_yac", "avg_yac"],
    )
}

pub fn write_teams(path: &Path, rows: &[TeamSummary]) -> Result<()> {
    write_rows(path, rows, &["team", "plays", "total_delta", "avg_delta", "epa"])
}

#[derive(Serialize)]
struct CorrelationRow<'a> {
    scope: &'a str,
    group: &'a str,
    n: usize,
    r: Option<f64>,
}

/// `scope,group,n,r` rows for the player scatter and the team comparison.
pub fn write_correlations(path: &Path, board: &Leaderboard, teams: Option<&TeamReport>) -> Result<()> {
    let mut rows = vec![CorrelationRow {
        scope: "player",
        group: "all",
        n: board.scatter().count(),
        r: board.r_overall,
    }];
    for (g, r) in &board.r_by_group {
        rows.push(CorrelationRow {
            scope: "player",
            group: g,
            n: board.scatter().filter(|p| position_group(&p.position) == g).count(),
            r: *r,
        });
    }
    if let Some(t) = teams {
        rows.push(CorrelationRow {
            scope: "team",
            group: "all",
            n: t.teams.iter().filter(|s| s.epa.is_some()).count(),
            r: t.r,
        });
    }
    write_rows(path, &rows, &["scope", "group", "n", "r"])
}

#[derive(Serialize)]
struct MetricRow<'a> {
    feature_set: &'a str,
    test_week: u32,
    n_train: usize,
    n_test: usize,
    metric: &'a str,
    value: f64,
}

/// Long-format fold metrics and the mean/SE summary.
pub fn write_cv_report(folds_path: &Path, summary_path: &Path, report: &CvReport) -> Result<()> {
    let rows: Vec<MetricRow> = report
        .folds
        .iter()
        .flat_map(|f| {
            f.metrics.iter().map(move |(m, v)| MetricRow {
                feature_set: &f.feature_set,
                test_week: f.test_week,
                n_train: f.n_train,
                n_test: f.n_test,
                metric: m,
                value: *v,
            })
        })
        .collect();
    write_rows(
        folds_path,
        &rows,
        &["feature_set", "test_week", "n_train", "n_test", "metric", "value"],
    )?;
    write_rows(summary_path, &report.summary, &["feature_set", "metric", "mean", "se", "n_folds"])
}

#[derive(Serialize)]
struct SweepMetricRow<'a> {
    n_weeks: usize,
    last_train_week: u32,
    test_week: u32,
    n_train: usize,
    n_test: usize,
    metric: &'a str,
    value: f64,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let long: Vec<SweepMetricRow> = rows
        .iter()
        .flat_map(|r| {
            r.metrics.iter().map(move |(m, v)| SweepMetricRow {
                n_weeks: r.n_weeks,
                last_train_week: r.last_train_week,
                test_week: r.test_week,
                n_train: r.n_train,
                n_test: r.n_test,
                metric: m,
                value: *v,
            })
        })
        .collect();
    write_rows(
        path,
        &long,
        &["n_weeks", "last_train_week", "test_week", "n_train", "n_test", "metric", "value"],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(id: u64, team: &str, delta: f64, yac: f64) -> PlayOutcome {
        PlayOutcome {
            game_id: 1,
            play_id: id,
            week: 1,
            defense_team: team.into(),
            def1_id: Some(id / 10),
            epv_catch: 0.0,
            expected_delta: delta,
            percentile: 0.5,
            yac,
        }
    }

    #[test]
    fn two_player_leaderboard() {
        let outcomes = vec![outcome(10, "A", -1.0, 2.0), outcome(11, "A", -1.0, 4.0), outcome(20, "B", 0.5, 9.0)];
        let board = aggregate_players(&outcomes, &BTreeMap::new(), 1);
        assert_eq!(board.players[0].player_id, 1);
        assert_eq!(board.players[0].total_delta, -2.0);
        assert_eq!(board.players[0].avg_yac, 3.0);
        assert_eq!(board.players[1].total_delta, 0.5);
    }

    #[test]
    fn pearson_extremes() {
        let x = [1.0, 2.0, 3.0, 5.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -2.0 * v + 1.0).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[1.0; 4]), None);
    }

    #[test]
    fn standard_error_formula() {
        let (m, se) = mean_se(&[1.0, 2.0, 4.0]);
        let sd = ((1.0f64 - 7.0 / 3.0).powi(2) + (2.0f64 - 7.0 / 3.0).powi(2) + (4.0f64 - 7.0 / 3.0).powi(2)) / 2.0;
        assert!((m - 7.0 / 3.0).abs() < 1e-15);
        assert!((se - sd.sqrt() / 3f64.sqrt()).abs() < 1e-15);
        assert!(mean_se(&[1.0]).1.is_nan());
    }

    #[test]
    fn teams_missing_epa_are_listed() {
        let outcomes = vec![outcome(10, "A", -1.0, 2.0), outcome(20, "B", 0.5, 9.0), outcome(30, "C", 0.0, 1.0)];
        let epa = BTreeMap::from([("A".to_string(), -0.2), ("C".to_string(), 0.1)]);
        let report = aggregate_teams(&outcomes, &epa);
        assert_eq!(report.missing, vec!["B".to_string()]);
        assert!((report.r.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("yac".parse::<ModelKind>().unwrap(), ModelKind::Yac);
        assert_eq!("ghost".parse::<ModelKind>().unwrap(), ModelKind::Ghost2d);
        assert!("other".parse::<ModelKind>().is_err());
    }
}
