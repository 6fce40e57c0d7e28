//! Command implementations behind the `ghostcde` binary.
//!
//! Every command reads its inputs from the paths in [`RunConfig`] and writes
//! into the output directory:
//!
//! ```text
//! <out>/run_config.toml          copy of the effective configuration
//! <out>/data/                    synthetic inputs (`synth`)
//! <out>/ingest/                  load and eligibility reports (`ingest`, `features`)
//! <out>/features.csv             one row per eligible play (`features`)
//! <out>/rosters.csv              player names and positions (`features`)
//! <out>/models/yac.rfcde         YAC forest (`train-yac`)
//! <out>/models/ghost.rfcde       ghost-location forest (`train-ghost`)
//! <out>/plays/<game>_<play>/     ghost_grid.csv, ghost_samples.csv, summary.csv (`eval-play`)
//! <out>/season/                  per-play results and leaderboards (`eval-season`)
//! <out>/reports/                 cross validation, sweeps, re-aggregated leaderboards
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ghost::{
    expected_delta, write_ghost_grid, write_ghost_samples, write_summary, GhostConfig,
    GhostEvaluation, GhostModels, GhostSummary, TrajectoryPool,
};
use crate::harness::{
    aggregate_players, aggregate_teams, load_team_epa, lowo_cv, read_outcomes, training_data,
    week_sweep, write_correlations, write_cv_report, write_outcomes, write_players, write_sweep,
    write_teams, EvalSettings, ModelKind, PlayOutcome, TeamReport,
};
use crate::rfcde::{load_forest, save_forest, train, Forest, ForestConfig};
use crate::rng::derive_seed;
use crate::synth::{generate, SynthConfig};
use crate::tracking::{
    load_plays, load_tracking, read_feature_table, read_rosters, rosters_from_frames,
    select_eligible_plays, write_feature_table, write_rosters, Convention, FeatureSet, PlayKey,
    PlayRecord, Role, RosterEntry, TrackingSchema,
};
use crate::utility::{ParametricEp, PlayUtility, UtilityTable};

const YAC_STREAM: u64 = 1;
const GHOST_STREAM: u64 = 2;
const EVAL_STREAM: u64 = 3;
const CV_STREAM: u64 = 4;
const SWEEP_STREAM: u64 = 5;

pub const ENV_TRACKING: &str = "GHOSTS_TRACKING";
pub const ENV_PLAYS: &str = "GHOSTS_PLAYS";
pub const ENV_GAMES: &str = "GHOSTS_GAMES";
pub const ENV_EP_TABLE: &str = "GHOSTS_EP_TABLE";
pub const ENV_TEAM_EPA: &str = "GHOSTS_TEAM_EPA";
pub const ENV_OUT: &str = "GHOSTS_OUT";

/// Input and output locations. Relative paths resolve against the working
/// directory; unset data paths fall back to `<data_dir>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsConfig {
    /// Tracking files or directories; a directory contributes every
    /// `tracking*.csv` inside it.
    pub tracking: Vec<PathBuf>,
    pub plays: Option<PathBuf>,
    pub games: Option<PathBuf>,
    /// Expected-points table; the built-in parametric surface is used when unset.
    pub ep_table: Option<PathBuf>,
    /// Team defensive EPA file (`team,epa`).
    pub team_epa: Option<PathBuf>,
    /// Default location of tracking, plays and games files; `<out>/data` when unset.
    pub data_dir: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            tracking: Vec::new(),
            plays: None,
            games: None,
            ep_table: None,
            team_epa: None,
            data_dir: None,
            out: PathBuf::from("out"),
        }
    }
}

/// Feature sets used for training and the candidates compared by `cv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub yac: FeatureSet,
    pub ghost: FeatureSet,
    pub cv_yac: Vec<FeatureSet>,
    pub cv_ghost: Vec<FeatureSet>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        let set = |roles: &[Role]| FeatureSet::new(roles.to_vec()).expect("static feature set");
        FeatureConfig {
            yac: FeatureSet::yac(),
            ghost: FeatureSet::ghost(),
            cv_yac: vec![
                FeatureSet::yac(),
                set(&[Role::Rec, Role::Def(1)]),
                set(&[Role::Rec, Role::Qb, Role::Def(1), Role::Def(2)]),
                set(&[Role::Rec, Role::Qb, Role::Def(1), Role::Off(1)]),
            ],
            cv_ghost: vec![
                FeatureSet::ghost(),
                set(&[Role::Rec]),
                set(&[Role::Rec, Role::Qb, Role::Off(1)]),
            ],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestsConfig {
    pub yac: ForestConfig,
    pub ghost: ForestConfig,
}

/// Everything a run depends on besides its input files. Forest seeds are
/// derived from `seed`; the `seed` fields inside the forest sections are
/// ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Minimum receptions faced for the player scatter table.
    pub min_receptions: usize,
    pub paths: PathsConfig,
    pub schema: TrackingSchema,
    pub convention: Convention,
    pub features: FeatureConfig,
    pub forests: ForestsConfig,
    pub ghost: GhostConfig,
    /// Parametric expected-points surface used without an EP table.
    pub expected_points: ParametricEp,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            workers: 0,
            min_receptions: 10,
            paths: PathsConfig::default(),
            schema: TrackingSchema::default(),
            convention: Convention::default(),
            features: FeatureConfig::default(),
            forests: ForestsConfig::default(),
            ghost: GhostConfig::default(),
            expected_points: ParametricEp::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Applies `GHOSTS_*` path overrides. `GHOSTS_TRACKING` is a list in the
    /// platform path-list syntax.
    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) {
        if let Some(v) = env(ENV_TRACKING) {
            self.paths.tracking = std::env::split_paths(&v).collect();
        }
        if let Some(v) = env(ENV_PLAYS) {
            self.paths.plays = Some(v.into());
        }
        if let Some(v) = env(ENV_GAMES) {
            self.paths.games = Some(v.into());
        }
        if let Some(v) = env(ENV_EP_TABLE) {
            self.paths.ep_table = Some(v.into());
        }
        if let Some(v) = env(ENV_TEAM_EPA) {
            self.paths.team_epa = Some(v.into());
        }
        if let Some(v) = env(ENV_OUT) {
            self.paths.out = v.into();
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ghost.validate()?;
        self.synth.validate()?;
        if self.features.yac.contains(Role::Def(1)) && !self.features.ghost.contains(Role::Def(1)) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "the YAC feature set must contain def1 and the ghost set must not".into(),
            ))
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.paths
            .data_dir
            .clone()
            .unwrap_or_else(|| self.paths.out.join("data"))
    }

    pub fn plays_path(&self) -> PathBuf {
        self.paths
            .plays
            .clone()
            .unwrap_or_else(|| self.data_dir().join("plays.csv"))
    }

    pub fn games_path(&self) -> PathBuf {
        self.paths
            .games
            .clone()
            .unwrap_or_else(|| self.data_dir().join("games.csv"))
    }

    /// Tracking files in sorted order.
    pub fn tracking_files(&self) -> Result<Vec<PathBuf>> {
        let sources = if self.paths.tracking.is_empty() {
            vec![self.data_dir()]
        } else {
            self.paths.tracking.clone()
        };
        let mut files = Vec::new();
        for src in sources {
            if src.is_dir() {
                let mut found: Vec<PathBuf> = fs::read_dir(&src)
                    .map_err(|e| Error::io(&src, e))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| {
                        p.file_name()
                            .and_then(|n| n.to_str())
                            .is_some_and(|n| n.starts_with("tracking") && n.ends_with(".csv"))
                    })
                    .collect();
                found.sort();
                files.extend(found);
            } else if src.exists() {
                files.push(src);
            } else {
                return Err(missing(&src, "synth"));
            }
        }
        if files.is_empty() {
            return Err(missing(&self.data_dir().join("tracking_week1.csv"), "synth"));
        }
        Ok(files)
    }

    pub fn out(&self) -> &Path {
        &self.paths.out
    }

    pub fn features_path(&self) -> PathBuf {
        self.out().join("features.csv")
    }

    pub fn rosters_path(&self) -> PathBuf {
        self.out().join("rosters.csv")
    }

    pub fn model_path(&self, kind: ModelKind) -> PathBuf {
        let name = match kind {
            ModelKind::Yac => "yac.rfcde",
            ModelKind::Ghost2d => "ghost.rfcde",
        };
        self.out().join("models").join(name)
    }

    pub fn play_dir(&self, key: PlayKey) -> PathBuf {
        self.out()
            .join("plays")
            .join(format!("{}_{}", key.game_id, key.play_id))
    }

    pub fn season_dir(&self) -> PathBuf {
        self.out().join("season")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.out().join("reports")
    }

    /// Forest settings for `kind` with the seed derived from the run seed.
    pub fn forest_config(&self, kind: ModelKind) -> ForestConfig {
        let (base, stream) = match kind {
            ModelKind::Yac => (&self.forests.yac, YAC_STREAM),
            ModelKind::Ghost2d => (&self.forests.ghost, GHOST_STREAM),
        };
        ForestConfig {
            seed: derive_seed(self.seed, &[stream]),
            ..base.clone()
        }
    }

    pub fn feature_set(&self, kind: ModelKind) -> &FeatureSet {
        match kind {
            ModelKind::Yac => &self.features.yac,
            ModelKind::Ghost2d => &self.features.ghost,
        }
    }

    /// Root seed of the ghost trajectory streams.
    pub fn eval_seed(&self) -> u64 {
        derive_seed(self.seed, &[EVAL_STREAM])
    }

    pub fn utility(&self) -> Result<Box<dyn PlayUtility>> {
        match &self.paths.ep_table {
            Some(path) => {
                if !path.exists() {
                    return Err(Error::io(
                        path,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "expected-points table not found"),
                    ));
                }
                let table = UtilityTable::load(path)?;
                if table.fallback_count() > 0 {
                    warn!(
                        "expected-points table has {} cells filled from neighbours",
                        table.fallback_count()
                    );
                }
                Ok(Box::new(table))
            }
            None => Ok(Box::new(self.expected_points.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Features,
    TrainYac,
    TrainGhost,
    EvalPlay { game_id: u64, play_id: u64 },
    EvalSeason,
    Cv { kind: ModelKind },
    Sweep { kind: ModelKind },
    Report,
    Synth,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Features => "features",
            Command::TrainYac => "train-yac",
            Command::TrainGhost => "train-ghost",
            Command::EvalPlay { .. } => "eval-play",
            Command::EvalSeason => "eval-season",
            Command::Cv { .. } => "cv",
            Command::Sweep { .. } => "sweep",
            Command::Report => "report",
            Command::Synth => "synth",
        }
    }
}

fn missing(path: &Path, producer: &str) -> Error {
    Error::MissingArtifact {
        path: path.to_path_buf(),
        producer: producer.to_string(),
    }
}

fn require(path: &Path, producer: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(missing(path, producer))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Runs `command` on a pool of `config.workers` threads and returns a JSON
/// report of what was written.
pub fn run(command: &Command, config: &RunConfig) -> Result<Value> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        create_dir(config.out())?;
        let cfg_path = config.out().join("run_config.toml");
        fs::write(&cfg_path, config.to_toml()?).map_err(|e| Error::io(&cfg_path, e))?;
        let mut report = match command {
            Command::Ingest => ingest(config).map(|(_, v)| v),
            Command::Features => features(config),
            Command::TrainYac => train_command(config, ModelKind::Yac),
            Command::TrainGhost => train_command(config, ModelKind::Ghost2d),
            Command::EvalPlay { game_id, play_id } => eval_play(
                config,
                PlayKey {
                    game_id: *game_id,
                    play_id: *play_id,
                },
            ),
            Command::EvalSeason => eval_season(config),
            Command::Cv { kind } => cv(config, *kind),
            Command::Sweep { kind } => sweep(config, *kind),
            Command::Report => report(config),
            Command::Synth => synth(config),
        }?;
        if let Value::Object(map) = &mut report {
            map.insert("status".into(), json!("ok"));
            map.insert("command".into(), json!(command.name()));
        }
        Ok(report)
    })
}

/// Machine-readable failure report.
pub fn error_report(command: &str, err: &Error) -> Value {
    json!({
        "status": "error",
        "command": command,
        "kind": err.kind(),
        "error": err.to_string(),
    })
}

#[derive(Serialize)]
struct CountRow<'a> {
    reason: &'a str,
    count: usize,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut empty = true;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
        empty = false;
    }
    if empty {
        w.write_record(header).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Ingested {
    records: Vec<PlayRecord>,
    rosters: BTreeMap<u64, RosterEntry>,
}

fn ingest(config: &RunConfig) -> Result<(Ingested, Value)> {
    let files = config.tracking_files()?;
    let plays_path = config.plays_path();
    let games_path = config.games_path();
    require(&plays_path, "synth")?;
    require(&games_path, "synth")?;
    let (frames, tracking_report) = load_tracking(&files, &config.schema)?;
    let (plays, plays_report) = load_plays(&plays_path, &games_path, &config.schema)?;
    let (snapshots, exclusions) = select_eligible_plays(&plays, &frames);
    info!(
        "loaded {} frames and {} plays; {} eligible",
        frames.len(),
        plays.len(),
        snapshots.len()
    );
    let dir = config.out().join("ingest");
    create_dir(&dir)?;
    let rejects_path = dir.join("rejects.csv");
    write_rows(
        &rejects_path,
        tracking_report.rejects.iter().chain(&plays_report.rejects),
        &["file", "line", "reason"],
    )?;
    let exclusions_path = dir.join("exclusions.csv");
    write_rows(
        &exclusions_path,
        exclusions.0.iter().map(|(reason, &count)| CountRow { reason, count }),
        &["reason", "count"],
    )?;
    let records = snapshots
        .iter()
        .map(|s| PlayRecord::from_snapshot(s, &config.convention))
        .collect();
    let rosters = rosters_from_frames(&frames);
    let report = json!({
        "tracking_files": files.len(),
        "frames": tracking_report.accepted,
        "rejected_rows": tracking_report.reject_count() + plays_report.reject_count(),
        "plays": plays.len(),
        "eligible_plays": snapshots.len(),
        "excluded_plays": exclusions.0,
        "outputs": [path_str(&rejects_path), path_str(&exclusions_path)],
    });
    Ok((Ingested { records, rosters }, report))
}

fn features(config: &RunConfig) -> Result<Value> {
    let (data, mut report) = ingest(config)?;
    let features_path = config.features_path();
    let rosters_path = config.rosters_path();
    write_feature_table(&features_path, &data.records)?;
    write_rosters(&rosters_path, &data.rosters)?;
    if let Some(outputs) = report.get_mut("outputs").and_then(Value::as_array_mut) {
        outputs.push(json!(path_str(&features_path)));
        outputs.push(json!(path_str(&rosters_path)));
    }
    Ok(report)
}

fn load_records(config: &RunConfig) -> Result<Vec<PlayRecord>> {
    let path = config.features_path();
    require(&path, "features")?;
    read_feature_table(&path)
}

fn load_model(config: &RunConfig, kind: ModelKind) -> Result<Forest> {
    let path = config.model_path(kind);
    let producer = match kind {
        ModelKind::Yac => "train-yac",
        ModelKind::Ghost2d => "train-ghost",
    };
    require(&path, producer)?;
    let forest = load_forest(&path)?;
    let expected = config.feature_set(kind).len();
    if forest.n_features() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: forest.n_features(),
        });
    }
    Ok(forest)
}

fn train_command(config: &RunConfig, kind: ModelKind) -> Result<Value> {
    let records = load_records(config)?;
    let refs: Vec<&PlayRecord> = records.iter().collect();
    let data = training_data(kind, &refs, config.feature_set(kind))?;
    if data.clamped > 0 {
        info!("{} training responses clamped into the YAC grid range", data.clamped);
    }
    let forest = train(&data.x, &data.y, &config.forest_config(kind))?;
    let path = config.model_path(kind);
    create_dir(path.parent().expect("model path has a parent"))?;
    save_forest(&forest, &path)?;
    info!("trained {kind} forest on {} plays", records.len());
    Ok(json!({
        "model": kind.as_str(),
        "plays": records.len(),
        "clamped_responses": data.clamped,
        "trees": forest.trees().len(),
        "features": config.feature_set(kind).names(),
        "outputs": [path_str(&path)],
    }))
}

struct Models {
    yac: Forest,
    ghost: Forest,
    utility: Box<dyn PlayUtility>,
    pool: TrajectoryPool,
    records: Vec<PlayRecord>,
}

impl Models {
    fn load(config: &RunConfig) -> Result<Self> {
        let records = load_records(config)?;
        Ok(Models {
            yac: load_model(config, ModelKind::Yac)?,
            ghost: load_model(config, ModelKind::Ghost2d)?,
            utility: config.utility()?,
            pool: TrajectoryPool::from_records(&records),
            records,
        })
    }

    fn ghost_models<'a>(&'a self, config: &'a RunConfig) -> GhostModels<'a> {
        GhostModels {
            yac: &self.yac,
            yac_features: &config.features.yac,
            ghost: &self.ghost,
            ghost_features: &config.features.ghost,
            utility: self.utility.as_ref(),
            pool: &self.pool,
        }
    }
}

fn eval_play(config: &RunConfig, key: PlayKey) -> Result<Value> {
    let models = Models::load(config)?;
    let record = models
        .records
        .iter()
        .find(|r| r.key() == key)
        .ok_or(Error::UnknownPlay {
            game_id: key.game_id,
            play_id: key.play_id,
        })?;
    let eval = expected_delta(
        &models.ghost_models(config),
        record,
        &config.ghost,
        config.eval_seed(),
    )?;
    let dir = config.play_dir(key);
    create_dir(&dir)?;
    let grid = dir.join("ghost_grid.csv");
    let samples = dir.join("ghost_samples.csv");
    let summary = dir.join("summary.csv");
    write_ghost_grid(&grid, &eval)?;
    write_ghost_samples(&samples, &eval)?;
    write_summary(&summary, &[GhostSummary::from(&eval)])?;
    Ok(json!({
        "game_id": key.game_id,
        "play_id": key.play_id,
        "epv_catch": eval.epv_catch,
        "expected_delta": eval.expected_delta,
        "percentile": eval.percentile,
        "outputs": [path_str(&grid), path_str(&samples), path_str(&summary)],
    }))
}

/// Per-play failures that skip the play instead of aborting the season.
fn is_play_level(err: &Error) -> bool {
    matches!(
        err,
        Error::NoSupport(_)
            | Error::MissingRole(_)
            | Error::CatchInEndzone(_)
            | Error::InsufficientData(_)
    )
}

#[derive(Serialize)]
struct SkippedPlay {
    game_id: u64,
    play_id: u64,
    kind: &'static str,
    error: String,
}

fn outcome(record: &PlayRecord, eval: &GhostEvaluation) -> PlayOutcome {
    PlayOutcome {
        game_id: record.game_id,
        play_id: record.play_id,
        week: record.week,
        defense_team: record.defense_team.clone(),
        def1_id: eval.def1_id,
        epv_catch: eval.epv_catch,
        expected_delta: eval.expected_delta,
        percentile: eval.percentile,
        yac: record.yac,
    }
}

fn eval_season(config: &RunConfig) -> Result<Value> {
    let models = Models::load(config)?;
    let ghost_models = models.ghost_models(config);
    let seed = config.eval_seed();
    let results: Vec<Result<GhostEvaluation>> = models
        .records
        .par_iter()
        .map(|r| expected_delta(&ghost_models, r, &config.ghost, seed))
        .collect();
    let mut outcomes = Vec::new();
    let mut summaries = Vec::new();
    let mut skipped = Vec::new();
    for (record, result) in models.records.iter().zip(results) {
        match result {
            Ok(eval) => {
                outcomes.push(outcome(record, &eval));
                summaries.push(GhostSummary::from(&eval));
            }
            Err(e) if is_play_level(&e) => {
                warn!("skipping play {}: {e}", record.key());
                skipped.push(SkippedPlay {
                    game_id: record.game_id,
                    play_id: record.play_id,
                    kind: e.kind(),
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let dir = config.season_dir();
    create_dir(&dir)?;
    let plays_path = dir.join("plays.csv");
    let summary_path = dir.join("summary.csv");
    let skipped_path = dir.join("skipped.csv");
    write_outcomes(&plays_path, &outcomes)?;
    write_summary(&summary_path, &summaries)?;
    write_rows(&skipped_path, &skipped, &["game_id", "play_id", "kind", "error"])?;
    let mut outputs = vec![path_str(&plays_path), path_str(&summary_path), path_str(&skipped_path)];
    let agg = write_aggregates(config, &outcomes, &dir)?;
    outputs.extend(agg.outputs);
    Ok(json!({
        "plays": outcomes.len(),
        "skipped": skipped.len(),
        "players": agg.players,
        "r_players": agg.r_players,
        "r_teams": agg.r_teams,
        "outputs": outputs,
    }))
}

struct Aggregates {
    outputs: Vec<String>,
    players: usize,
    r_players: Option<f64>,
    r_teams: Option<f64>,
}

fn write_aggregates(config: &RunConfig, outcomes: &[PlayOutcome], dir: &Path) -> Result<Aggregates> {
    let rosters_path = config.rosters_path();
    require(&rosters_path, "features")?;
    let rosters = read_rosters(&rosters_path)?;
    let board = aggregate_players(outcomes, &rosters, config.min_receptions);
    let leaderboard = dir.join("leaderboard.csv");
    let scatter = dir.join("player_scatter.csv");
    let correlations = dir.join("correlations.csv");
    write_players(&leaderboard, &board.players)?;
    write_players(&scatter, &board.scatter().cloned().collect::<Vec<_>>())?;
    let mut outputs = vec![path_str(&leaderboard), path_str(&scatter)];
    let teams: Option<TeamReport> = match &config.paths.team_epa {
        Some(path) => {
            let epa = load_team_epa(path)?;
            let report = aggregate_teams(outcomes, &epa);
            if !report.missing.is_empty() {
                warn!("teams without EPA: {}", report.missing.join(", "));
            }
            let teams_path = dir.join("teams.csv");
            write_teams(&teams_path, &report.teams)?;
            outputs.push(path_str(&teams_path));
            Some(report)
        }
        None => None,
    };
    write_correlations(&correlations, &board, teams.as_ref())?;
    outputs.push(path_str(&correlations));
    Ok(Aggregates {
        outputs,
        players: board.players.len(),
        r_players: board.r_overall,
        r_teams: teams.and_then(|t| t.r),
    })
}

fn report(config: &RunConfig) -> Result<Value> {
    let plays_path = config.season_dir().join("plays.csv");
    require(&plays_path, "eval-season")?;
    let outcomes = read_outcomes(&plays_path)?;
    let dir = config.reports_dir();
    create_dir(&dir)?;
    let agg = write_aggregates(config, &outcomes, &dir)?;
    Ok(json!({
        "plays": outcomes.len(),
        "players": agg.players,
        "r_players": agg.r_players,
        "r_teams": agg.r_teams,
        "outputs": agg.outputs,
    }))
}

fn eval_settings(config: &RunConfig, kind: ModelKind, stream: u64) -> EvalSettings {
    let forest = config.forest_config(kind);
    EvalSettings {
        forest: ForestConfig {
            seed: derive_seed(config.seed, &[stream]),
            ..forest
        },
        ghost_grid: config.ghost.clone(),
    }
}

fn cv(config: &RunConfig, kind: ModelKind) -> Result<Value> {
    let records = load_records(config)?;
    let sets = match kind {
        ModelKind::Yac => &config.features.cv_yac,
        ModelKind::Ghost2d => &config.features.cv_ghost,
    };
    let report = lowo_cv(&records, sets, kind, &eval_settings(config, kind, CV_STREAM))?;
    let dir = config.reports_dir();
    create_dir(&dir)?;
    let folds = dir.join(format!("cv_{}_folds.csv", kind.as_str()));
    let summary = dir.join(format!("cv_{}_summary.csv", kind.as_str()));
    write_cv_report(&folds, &summary, &report)?;
    Ok(json!({
        "model": kind.as_str(),
        "folds": report.folds.len(),
        "summary": report.summary,
        "outputs": [path_str(&folds), path_str(&summary)],
    }))
}

fn sweep(config: &RunConfig, kind: ModelKind) -> Result<Value> {
    let records = load_records(config)?;
    let rows = week_sweep(
        &records,
        kind,
        config.feature_set(kind),
        &eval_settings(config, kind, SWEEP_STREAM),
    )?;
    let dir = config.reports_dir();
    create_dir(&dir)?;
    let path = dir.join(format!("sweep_{}.csv", kind.as_str()));
    write_sweep(&path, &rows)?;
    Ok(json!({
        "model": kind.as_str(),
        "rows": rows.len(),
        "outputs": [path_str(&path)],
    }))
}

fn synth(config: &RunConfig) -> Result<Value> {
    let synth_config = SynthConfig {
        seed: config.seed,
        ..config.synth.clone()
    };
    let data = generate(&synth_config)?;
    let dir = config.data_dir();
    let tracking = data.write(&dir)?;
    let mut outputs = vec![
        path_str(&dir.join("games.csv")),
        path_str(&dir.join("plays.csv")),
        path_str(&dir.join("truth.csv")),
    ];
    outputs.extend(tracking.iter().map(|p| path_str(p)));
    Ok(json!({
        "plays": data.plays.len(),
        "frames": data.frames.len(),
        "outputs": outputs,
    }))
}
