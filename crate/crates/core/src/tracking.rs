//! Tracking ingestion, eligible-play selection and feature extraction.
//!
//! Field convention: `x` runs along the field in `[0, 120]` including both
//! 10-yard endzones, `y` across it in `[0, 53.3]`. The target goal line sits at
//! `x = 10` when the play moves left and at `x = 110` when it moves right.
//! Orientation and direction are compass degrees measured clockwise from the
//! `+y` axis.
//!
//! Every feature is computed from a [`PlayerState`], which holds a player's
//! position in adjusted coordinates (`x_adj` = yards from the target goal
//! line, `y_adj` = yards from the field centre, positive on the offense's
//! left) and compass angles rotated into a standard frame in which the
//! offense always attacks the `+x` direction (target endzone bearing 90°).
//! Working in the standard frame makes features independent of play
//! direction and lets ghost trajectories move between plays.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::utility::DownContext;

pub const FIELD_LENGTH: f64 = 120.0;
pub const FIELD_WIDTH: f64 = 53.3;
pub const FIELD_CENTER_Y: f64 = 26.65;
/// Bounds of `x_adj` over the whole field (both endzones included).
pub const X_ADJ_MIN: f64 = -10.0;
pub const X_ADJ_MAX: f64 = 110.0;
/// Compass bearing of the target endzone in the standard frame.
pub const ENDZONE_BEARING: f64 = 90.0;

pub const REC_FEATURES: [&str; 6] = [
    "x_adj",
    "y_adj",
    "dir_endzone",
    "o_endzone",
    "x_adj_from_first_down",
    "s",
];
pub const QB_FEATURES: [&str; 4] = ["s", "x_adj_change", "y_adj_change", "dist_to_rec"];
pub const PLAYER_FEATURES: [&str; 10] = [
    "x_adj",
    "y_adj",
    "dir_endzone",
    "o_endzone",
    "s",
    "x_adj_change",
    "y_adj_change",
    "dist_to_rec",
    "dir_wrt_rec_diff",
    "o_wrt_rec_diff",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlayDirection {
    Left,
    Right,
}

impl PlayDirection {
    pub fn flipped(self) -> Self {
        match self {
            PlayDirection::Left => PlayDirection::Right,
            PlayDirection::Right => PlayDirection::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlayDirection::Left => "left",
            PlayDirection::Right => "right",
        }
    }
}

impl FromStr for PlayDirection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(PlayDirection::Left),
            "right" => Ok(PlayDirection::Right),
            other => Err(format!("unknown play direction `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    BallSnap,
    PassForward,
    PassShovel,
    PassArrived,
    PassOutcomeCaught,
    PassOutcomeIncomplete,
    PassOutcomeInterception,
    Tackle,
    OutOfBounds,
    Touchdown,
    Other(String),
}

impl Event {
    /// Parses an event label; `None`, `NA` and empty cells mean "no event".
    pub fn parse(label: &str) -> Option<Event> {
        let label = label.trim();
        Some(match label {
            "" | "None" | "NA" => return None,
            "ball_snap" => Event::BallSnap,
            "pass_forward" => Event::PassForward,
            "pass_shovel" => Event::PassShovel,
            "pass_arrived" => Event::PassArrived,
            "pass_outcome_caught" => Event::PassOutcomeCaught,
            "pass_outcome_incomplete" => Event::PassOutcomeIncomplete,
            "pass_outcome_interception" => Event::PassOutcomeInterception,
            "tackle" => Event::Tackle,
            "out_of_bounds" => Event::OutOfBounds,
            "touchdown" => Event::Touchdown,
            other => Event::Other(other.to_string()),
        })
    }

    pub fn as_str(&self) -> &str {
        match self {
            Event::BallSnap => "ball_snap",
            Event::PassForward => "pass_forward",
            Event::PassShovel => "pass_shovel",
            Event::PassArrived => "pass_arrived",
            Event::PassOutcomeCaught => "pass_outcome_caught",
            Event::PassOutcomeIncomplete => "pass_outcome_incomplete",
            Event::PassOutcomeInterception => "pass_outcome_interception",
            Event::Tackle => "tackle",
            Event::OutOfBounds => "out_of_bounds",
            Event::Touchdown => "touchdown",
            Event::Other(s) => s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Home,
    Away,
    Football,
}

impl Side {
    fn parse(s: &str) -> Option<Side> {
        match s.trim().to_ascii_lowercase().as_str() {
            "home" => Some(Side::Home),
            "away" => Some(Side::Away),
            "football" | "ball" => Some(Side::Football),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Home => "home",
            Side::Away => "away",
            Side::Football => "football",
        }
    }
}

/// One player (or the ball) at one 10 Hz time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingFrame {
    pub game_id: u64,
    pub play_id: u64,
    /// `None` for the ball.
    pub player_id: Option<u64>,
    pub frame_id: u32,
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub a: f64,
    pub dis: f64,
    pub o: f64,
    pub dir: f64,
    pub event: Option<Event>,
    pub display_name: String,
    pub position: Option<String>,
    pub side: Side,
    pub play_direction: PlayDirection,
}

impl TrackingFrame {
    pub fn is_ball(&self) -> bool {
        self.player_id.is_none() || self.side == Side::Football
    }

    fn distance_to(&self, other: &TrackingFrame) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Column names of the tracking, plays and games files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingSchema {
    pub game_id: String,
    pub play_id: String,
    pub player_id: String,
    pub frame_id: String,
    pub x: String,
    pub y: String,
    pub s: String,
    pub a: String,
    pub dis: String,
    pub o: String,
    pub dir: String,
    pub event: String,
    pub play_direction: String,
    pub display_name: String,
    pub position: String,
    pub team: String,
    pub down: String,
    pub yards_to_go: String,
    pub possession_team: String,
    pub absolute_yardline: String,
    pub quarter: String,
    pub game_clock: String,
    pub home_score: String,
    pub visitor_score: String,
    pub pass_result: String,
    pub home_team: String,
    pub visitor_team: String,
    pub week: String,
}

impl Default for TrackingSchema {
    fn default() -> Self {
        let s = |v: &str| v.to_string();
        TrackingSchema {
            game_id: s("gameId"),
            play_id: s("playId"),
            player_id: s("nflId"),
            frame_id: s("frameId"),
            x: s("x"),
            y: s("y"),
            s: s("s"),
            a: s("a"),
            dis: s("dis"),
            o: s("o"),
            dir: s("dir"),
            event: s("event"),
            play_direction: s("playDirection"),
            display_name: s("displayName"),
            position: s("position"),
            team: s("team"),
            down: s("down"),
            yards_to_go: s("yardsToGo"),
            possession_team: s("possessionTeam"),
            absolute_yardline: s("absoluteYardlineNumber"),
            quarter: s("quarter"),
            game_clock: s("gameClock"),
            home_score: s("preSnapHomeScore"),
            visitor_score: s("preSnapVisitorScore"),
            pass_result: s("passResult"),
            home_team: s("homeTeamAbbr"),
            visitor_team: s("visitorTeamAbbr"),
            week: s("week"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    pub file: PathBuf,
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub accepted: usize,
    pub rejects: Vec<Reject>,
}

impl LoadReport {
    pub fn reject_count(&self) -> usize {
        self.rejects.len()
    }
}

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
        Columns { path, index }
    }

    fn required(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
                path: self.path.to_path_buf(),
            })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "NaN" | "None")
}

fn parse_f64(record: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<f64, String> {
    let cell = record.get(idx).unwrap_or("");
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("unparseable {name} `{cell}`"))
}

fn parse_u64(record: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<u64, String> {
    let cell = record.get(idx).unwrap_or("").trim();
    // ids occasionally come through as floats ("2539.0")
    cell.parse::<u64>()
        .ok()
        .or_else(|| {
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 0.0)
                .map(|v| v as u64)
        })
        .ok_or_else(|| format!("unparseable {name} `{cell}`"))
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

/// Reads tracking files. Rows failing validation are rejected and reported
/// with their line number; a missing required column is a hard error.
pub fn load_tracking(
    files: &[PathBuf],
    schema: &TrackingSchema,
) -> Result<(Vec<TrackingFrame>, LoadReport)> {
    let mut frames = Vec::new();
    let mut report = LoadReport::default();
    for path in files {
        load_tracking_file(path, schema, &mut frames, &mut report)?;
    }
    report.accepted = frames.len();
    Ok((frames, report))
}

fn load_tracking_file(
    path: &Path,
    schema: &TrackingSchema,
    frames: &mut Vec<TrackingFrame>,
    report: &mut LoadReport,
) -> Result<()> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(path, &headers);
    let game = cols.required(&schema.game_id)?;
    let play = cols.required(&schema.play_id)?;
    let player = cols.required(&schema.player_id)?;
    let frame = cols.required(&schema.frame_id)?;
    let x = cols.required(&schema.x)?;
    let y = cols.required(&schema.y)?;
    let s = cols.required(&schema.s)?;
    let a = cols.required(&schema.a)?;
    let dis = cols.required(&schema.dis)?;
    let o = cols.required(&schema.o)?;
    let dir = cols.required(&schema.dir)?;
    let event = cols.required(&schema.event)?;
    let direction = cols.required(&schema.play_direction)?;
    let name = cols.optional(&schema.display_name);
    let position = cols.optional(&schema.position);
    let team = cols.optional(&schema.team);

    let mut last_frame: HashMap<(u64, u64, Option<u64>), u32> = HashMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                report.rejects.push(Reject {
                    file: path.to_path_buf(),
                    line,
                    reason: format!("malformed row: {e}"),
                });
                continue;
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parsed = (|| -> std::result::Result<TrackingFrame, String> {
            let player_cell = record.get(player).unwrap_or("");
            let player_id = if is_missing(player_cell) {
                None
            } else {
                Some(parse_u64(&record, player, "player id")?)
            };
            let side = match team.and_then(|t| record.get(t)).and_then(Side::parse) {
                Some(side) => side,
                None if player_id.is_none() => Side::Football,
                None => return Err("missing team side".into()),
            };
            let ball = player_id.is_none() || side == Side::Football;
            // the ball carries no speed/orientation in some releases
            let angle = |idx: usize, name: &str| -> std::result::Result<f64, String> {
                if ball && is_missing(record.get(idx).unwrap_or("")) {
                    Ok(0.0)
                } else {
                    parse_f64(&record, idx, name)
                }
            };
            let f = TrackingFrame {
                game_id: parse_u64(&record, game, "game id")?,
                play_id: parse_u64(&record, play, "play id")?,
                player_id,
                frame_id: parse_u64(&record, frame, "frame id")? as u32,
                x: parse_f64(&record, x, "x")?,
                y: parse_f64(&record, y, "y")?,
                s: angle(s, "s")?,
                a: angle(a, "a")?,
                dis: angle(dis, "dis")?,
                o: angle(o, "o")?.rem_euclid(360.0),
                dir: angle(dir, "dir")?.rem_euclid(360.0),
                event: Event::parse(record.get(event).unwrap_or("")),
                display_name: name
                    .and_then(|i| record.get(i))
                    .unwrap_or("")
                    .to_string(),
                position: position
                    .and_then(|i| record.get(i))
                    .filter(|p| !is_missing(p))
                    .map(|p| p.trim().to_string()),
                side,
                play_direction: record
                    .get(direction)
                    .unwrap_or("")
                    .parse::<PlayDirection>()?,
            };
            validate_frame(&f)?;
            Ok(f)
        })();
        match parsed {
            Ok(f) => {
                let key = (f.game_id, f.play_id, f.player_id);
                if let Some(&prev) = last_frame.get(&key) {
                    if f.frame_id <= prev {
                        report.rejects.push(Reject {
                            file: path.to_path_buf(),
                            line,
                            reason: format!("frame id {} not increasing (previous {prev})", f.frame_id),
                        });
                        continue;
                    }
                }
                last_frame.insert(key, f.frame_id);
                frames.push(f);
            }
            Err(reason) => report.rejects.push(Reject {
                file: path.to_path_buf(),
                line,
                reason,
            }),
        }
    }
    Ok(())
}

fn validate_frame(f: &TrackingFrame) -> std::result::Result<(), String> {
    if !(0.0..=FIELD_LENGTH).contains(&f.x) {
        return Err(format!("x={} outside [0, {FIELD_LENGTH}]", f.x));
    }
    if !(0.0..=FIELD_WIDTH).contains(&f.y) {
        return Err(format!("y={} outside [0, {FIELD_WIDTH}]", f.y));
    }
    if f.s < 0.0 || f.a < 0.0 || f.dis < 0.0 {
        return Err("negative speed, acceleration or distance".into());
    }
    if f.frame_id == 0 {
        return Err("frame id must be positive".into());
    }
    Ok(())
}

/// Down-and-distance context of a play plus pass-through game context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayContext {
    pub game_id: u64,
    pub play_id: u64,
    pub week: u32,
    pub down: u8,
    pub yards_to_go: f64,
    /// Taken from the tracking rows when the plays file does not carry it.
    pub play_direction: Option<PlayDirection>,
    /// Line of scrimmage in raw `x` coordinates.
    pub absolute_yardline: f64,
    pub possession_team: String,
    pub defensive_team: String,
    pub quarter: Option<u8>,
    pub game_clock: Option<String>,
    /// Offense score minus defense score before the snap.
    pub score_differential: Option<f64>,
    pub pass_result: Option<String>,
}

impl PlayContext {
    pub fn key(&self) -> PlayKey {
        PlayKey {
            game_id: self.game_id,
            play_id: self.play_id,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlayKey {
    pub game_id: u64,
    pub play_id: u64,
}

impl fmt::Display for PlayKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.game_id, self.play_id)
    }
}

#[derive(Clone, Debug)]
struct GameInfo {
    home: String,
    visitor: String,
    week: u32,
}

fn load_games(path: &Path, schema: &TrackingSchema) -> Result<HashMap<u64, GameInfo>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(path, &headers);
    let game = cols.required(&schema.game_id)?;
    let home = cols.required(&schema.home_team)?;
    let visitor = cols.required(&schema.visitor_team)?;
    let week = cols.required(&schema.week)?;
    let mut games = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let id = parse_u64(&record, game, "game id").map_err(parse_err)?;
        let week = parse_u64(&record, week, "week").map_err(parse_err)? as u32;
        games.insert(
            id,
            GameInfo {
                home: record.get(home).unwrap_or("").trim().to_string(),
                visitor: record.get(visitor).unwrap_or("").trim().to_string(),
                week,
            },
        );
    }
    Ok(games)
}

/// Reads the plays file joined with the games file. Rows with an unusable
/// down, distance or yard line are rejected with their line number.
pub fn load_plays(
    plays_path: &Path,
    games_path: &Path,
    schema: &TrackingSchema,
) -> Result<(Vec<PlayContext>, LoadReport)> {
    let games = load_games(games_path, schema)?;
    let mut reader = open_csv(plays_path)?;
    let headers = reader.headers().map_err(|e| Error::csv(plays_path, e))?.clone();
    let cols = Columns::new(plays_path, &headers);
    let game = cols.required(&schema.game_id)?;
    let play = cols.required(&schema.play_id)?;
    let down = cols.required(&schema.down)?;
    let ytg = cols.required(&schema.yards_to_go)?;
    let possession = cols.required(&schema.possession_team)?;
    let yardline = cols.required(&schema.absolute_yardline)?;
    let quarter = cols.optional(&schema.quarter);
    let clock = cols.optional(&schema.game_clock);
    let home_score = cols.optional(&schema.home_score);
    let visitor_score = cols.optional(&schema.visitor_score);
    let pass_result = cols.optional(&schema.pass_result);

    let mut plays = Vec::new();
    let mut report = LoadReport::default();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                report.rejects.push(Reject {
                    file: plays_path.to_path_buf(),
                    line: e.position().map(|p| p.line()).unwrap_or(0),
                    reason: format!("malformed row: {e}"),
                });
                continue;
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parsed = (|| -> std::result::Result<PlayContext, String> {
            let game_id = parse_u64(&record, game, "game id")?;
            let info = games
                .get(&game_id)
                .ok_or_else(|| format!("game {game_id} missing from games file"))?;
            let down = parse_u64(&record, down, "down")?;
            if !(1..=4).contains(&down) {
                return Err(format!("down {down} outside 1..=4"));
            }
            let yards_to_go = parse_f64(&record, ytg, "yards to go")?;
            if yards_to_go <= 0.0 {
                return Err(format!("yards to go {yards_to_go} not positive"));
            }
            let absolute_yardline = parse_f64(&record, yardline, "absolute yardline")?;
            if !(absolute_yardline > 0.0 && absolute_yardline < FIELD_LENGTH) {
                return Err(format!("absolute yardline {absolute_yardline} outside (0, 120)"));
            }
            let possession_team = record.get(possession).unwrap_or("").trim().to_string();
            let offense_home = possession_team == info.home;
            let defensive_team = if offense_home {
                info.visitor.clone()
            } else {
                info.home.clone()
            };
            let score = |idx: Option<usize>| idx.and_then(|i| parse_f64(&record, i, "score").ok());
            let score_differential = match (score(home_score), score(visitor_score)) {
                (Some(h), Some(v)) => Some(if offense_home { h - v } else { v - h }),
                _ => None,
            };
            Ok(PlayContext {
                game_id,
                play_id: parse_u64(&record, play, "play id")?,
                week: info.week,
                down: down as u8,
                yards_to_go,
                play_direction: None,
                absolute_yardline,
                possession_team,
                defensive_team,
                quarter: quarter.and_then(|i| parse_u64(&record, i, "quarter").ok()).map(|q| q as u8),
                game_clock: clock
                    .and_then(|i| record.get(i))
                    .filter(|c| !is_missing(c))
                    .map(|c| c.trim().to_string()),
                score_differential,
                pass_result: pass_result
                    .and_then(|i| record.get(i))
                    .filter(|c| !is_missing(c))
                    .map(|c| c.trim().to_string()),
            })
        })();
        match parsed {
            Ok(p) => plays.push(p),
            Err(reason) => report.rejects.push(Reject {
                file: plays_path.to_path_buf(),
                line,
                reason,
            }),
        }
    }
    report.accepted = plays.len();
    Ok((plays, report))
}

/// One completed pass at the moment of catch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatchSnapshot {
    pub context: PlayContext,
    pub play_direction: PlayDirection,
    pub catch_frame: u32,
    pub throw_frame: u32,
    pub receiver: TrackingFrame,
    pub quarterback_at_throw: TrackingFrame,
    /// Offensive players other than the receiver and quarterback, nearest first.
    pub offense_ordered: Vec<TrackingFrame>,
    /// Defenders nearest first; ties broken by ascending player id.
    pub defense_ordered: Vec<TrackingFrame>,
    /// Catch spot minus ending spot in `x_adj`; not clamped.
    pub observed_yac: f64,
}

/// Counts of excluded plays by reason.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Exclusions(pub BTreeMap<String, usize>);

impl Exclusions {
    fn add(&mut self, reason: &str) {
        *self.0.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn get(&self, reason: &str) -> usize {
        self.0.get(reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

fn nearest_first(frames: &mut [TrackingFrame], anchor: &TrackingFrame) {
    frames.sort_by(|a, b| {
        a.distance_to(anchor)
            .total_cmp(&b.distance_to(anchor))
            .then(a.player_id.cmp(&b.player_id))
    });
}

/// Selects completed catches thrown by a quarterback outside the target
/// endzone. Every excluded play is tallied by reason.
pub fn select_eligible_plays(
    plays: &[PlayContext],
    frames: &[TrackingFrame],
) -> (Vec<CatchSnapshot>, Exclusions) {
    let mut by_play: BTreeMap<PlayKey, Vec<&TrackingFrame>> = BTreeMap::new();
    for f in frames {
        by_play
            .entry(PlayKey {
                game_id: f.game_id,
                play_id: f.play_id,
            })
            .or_default()
            .push(f);
    }
    let mut contexts: Vec<&PlayContext> = plays.iter().collect();
    contexts.sort_by_key(|c| c.key());

    let mut snapshots = Vec::new();
    let mut excluded = Exclusions::default();
    let known: std::collections::HashSet<PlayKey> = contexts.iter().map(|c| c.key()).collect();
    for key in by_play.keys() {
        if !known.contains(key) {
            excluded.add("no_play_context");
        }
    }
    for ctx in contexts {
        let Some(play_frames) = by_play.get(&ctx.key()) else {
            excluded.add("no_tracking");
            continue;
        };
        match snapshot_for_play(ctx, play_frames) {
            Ok(s) => snapshots.push(s),
            Err(reason) => excluded.add(reason),
        }
    }
    (snapshots, excluded)
}

fn snapshot_for_play(
    ctx: &PlayContext,
    frames: &[&TrackingFrame],
) -> std::result::Result<CatchSnapshot, &'static str> {
    let first_event = |event: &Event| {
        frames
            .iter()
            .filter(|f| f.event.as_ref() == Some(event))
            .map(|f| f.frame_id)
            .min()
    };
    let catch_frame = first_event(&Event::PassOutcomeCaught).ok_or("not_completed")?;
    let throw_frame = frames
        .iter()
        .filter(|f| {
            matches!(f.event, Some(Event::PassForward) | Some(Event::PassShovel))
                && f.frame_id <= catch_frame
        })
        .map(|f| f.frame_id)
        .min()
        .ok_or("no_throw_event")?;

    let at = |frame_id: u32| frames.iter().filter(move |f| f.frame_id == frame_id);
    let ball_at_throw = at(throw_frame).find(|f| f.is_ball()).cloned();
    let ball_at_catch = at(catch_frame).find(|f| f.is_ball()).cloned().ok_or("missing_ball")?;

    let mut quarterbacks: Vec<TrackingFrame> = at(throw_frame)
        .filter(|f| !f.is_ball() && f.position.as_deref() == Some("QB"))
        .map(|f| (*f).clone())
        .collect();
    if quarterbacks.is_empty() {
        return Err("no_quarterback");
    }
    match &ball_at_throw {
        Some(ball) => nearest_first(&mut quarterbacks, ball),
        None => quarterbacks.sort_by_key(|f| f.player_id),
    }
    let quarterback = quarterbacks.swap_remove(0);
    let offense = quarterback.side;

    let catch_players: Vec<TrackingFrame> = at(catch_frame)
        .filter(|f| !f.is_ball())
        .map(|f| (*f).clone())
        .collect();
    let mut receivers: Vec<TrackingFrame> = catch_players
        .iter()
        .filter(|f| f.side == offense && f.player_id != quarterback.player_id)
        .cloned()
        .collect();
    if receivers.is_empty() {
        return Err("no_receiver");
    }
    nearest_first(&mut receivers, ball_at_catch);
    let receiver = receivers.remove(0);
    let direction = ctx.play_direction.unwrap_or(receiver.play_direction);

    let (catch_x_adj, _) = adjusted_coordinates(&receiver, direction);
    if catch_x_adj <= 0.0 {
        return Err("caught_in_endzone");
    }
    let mut defense: Vec<TrackingFrame> = catch_players
        .iter()
        .filter(|f| f.side != offense)
        .cloned()
        .collect();
    if defense.is_empty() {
        return Err("no_defender");
    }
    nearest_first(&mut defense, &receiver);
    let mut teammates: Vec<TrackingFrame> = catch_players
        .iter()
        .filter(|f| f.side == offense && f.player_id != quarterback.player_id && f.player_id != receiver.player_id)
        .cloned()
        .collect();
    nearest_first(&mut teammates, &receiver);

    let ending = frames
        .iter()
        .filter(|f| f.player_id == receiver.player_id && f.frame_id >= catch_frame)
        .max_by_key(|f| f.frame_id)
        .ok_or("missing_feature_input")?;
    let (end_x_adj, _) = adjusted_coordinates(ending, direction);

    let mut context = ctx.clone();
    context.play_direction = Some(direction);
    Ok(CatchSnapshot {
        context,
        play_direction: direction,
        catch_frame,
        throw_frame,
        receiver,
        quarterback_at_throw: quarterback,
        offense_ordered: teammates,
        defense_ordered: defense,
        observed_yac: catch_x_adj - end_x_adj,
    })
}

/// `(x_adj, y_adj)` of a frame: yards from the target goal line and yards
/// from the field centre, positive on the offense's left.
pub fn adjusted_coordinates(frame: &TrackingFrame, direction: PlayDirection) -> (f64, f64) {
    adjust_xy(frame.x, frame.y, direction)
}

pub fn adjust_xy(x: f64, y: f64, direction: PlayDirection) -> (f64, f64) {
    match direction {
        PlayDirection::Left => (x - 10.0, FIELD_CENTER_Y - y),
        PlayDirection::Right => (110.0 - x, y - FIELD_CENTER_Y),
    }
}

/// Inverse of [`adjust_xy`].
pub fn raw_xy(x_adj: f64, y_adj: f64, direction: PlayDirection) -> (f64, f64) {
    match direction {
        PlayDirection::Left => (x_adj + 10.0, FIELD_CENTER_Y - y_adj),
        PlayDirection::Right => (110.0 - x_adj, y_adj + FIELD_CENTER_Y),
    }
}

/// Minimal absolute angular difference in degrees, in `[0, 180]`.
pub fn angular_features(angle: f64, reference: f64) -> f64 {
    let d = (angle - reference).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Configurable pieces of the coordinate convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Convention {
    /// `y_adj > 0` on the offense's left when true, on its right otherwise.
    pub y_left_positive: bool,
    /// Added to raw `o` / `dir` before use, for releases whose angle origin
    /// differs from compass-from-`+y`.
    pub angle_offset_deg: f64,
}

impl Default for Convention {
    fn default() -> Self {
        Convention {
            y_left_positive: true,
            angle_offset_deg: 0.0,
        }
    }
}

/// A player in adjusted coordinates with standard-frame angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub player_id: Option<u64>,
    pub x_adj: f64,
    pub y_adj: f64,
    pub s: f64,
    pub dir: f64,
    pub o: f64,
}

impl PlayerState {
    pub fn from_frame(frame: &TrackingFrame, direction: PlayDirection, conv: &Convention) -> Self {
        let (x_adj, mut y_adj) = adjusted_coordinates(frame, direction);
        let mut dir = standard_angle(frame.dir + conv.angle_offset_deg, direction);
        let mut o = standard_angle(frame.o + conv.angle_offset_deg, direction);
        if !conv.y_left_positive {
            y_adj = -y_adj;
            dir = (180.0 - dir).rem_euclid(360.0);
            o = (180.0 - o).rem_euclid(360.0);
        }
        PlayerState {
            player_id: frame.player_id,
            x_adj,
            y_adj,
            s: frame.s,
            dir,
            o,
        }
    }

    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            s: self.s,
            dir: self.dir,
            o: self.o,
        }
    }

    /// Same player moved to `(x_adj, y_adj)` with trajectory `v`.
    pub fn relocated(&self, x_adj: f64, y_adj: f64, v: Trajectory) -> Self {
        PlayerState {
            player_id: self.player_id,
            x_adj,
            y_adj,
            s: v.s,
            dir: v.dir,
            o: v.o,
        }
    }

    pub fn distance_to(&self, other: &PlayerState) -> f64 {
        (self.x_adj - other.x_adj).hypot(self.y_adj - other.y_adj)
    }

    /// Compass bearing (standard frame) from this player towards `target`.
    pub fn bearing_to(&self, target: &PlayerState) -> f64 {
        // +x_adj points away from the endzone, i.e. along compass 270
        let east = -(target.x_adj - self.x_adj);
        let north = target.y_adj - self.y_adj;
        east.atan2(north).to_degrees().rem_euclid(360.0)
    }
}

/// Raw compass angle rotated into the standard (rightward) frame.
pub fn standard_angle(angle: f64, direction: PlayDirection) -> f64 {
    match direction {
        PlayDirection::Right => angle.rem_euclid(360.0),
        PlayDirection::Left => (angle + 180.0).rem_euclid(360.0),
    }
}

/// Speed, direction and orientation of one player, kept together.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub s: f64,
    pub dir: f64,
    pub o: f64,
}

/// One eligible play reduced to the player states the models consume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayRecord {
    pub game_id: u64,
    pub play_id: u64,
    pub week: u32,
    pub down: u8,
    pub yards_to_go: f64,
    /// Line of scrimmage in `x_adj`.
    pub los_x_adj: f64,
    pub offense_team: String,
    pub defense_team: String,
    pub receiver: PlayerState,
    /// Quarterback at the moment of the throw.
    pub quarterback: PlayerState,
    /// Nearest first.
    pub defenders: Vec<PlayerState>,
    /// Offensive players other than receiver and quarterback, nearest first.
    pub teammates: Vec<PlayerState>,
    pub yac: f64,
}

impl PlayRecord {
    pub fn from_snapshot(snapshot: &CatchSnapshot, conv: &Convention) -> Self {
        let dir = snapshot.play_direction;
        let state = |f: &TrackingFrame| PlayerState::from_frame(f, dir, conv);
        let (los_x_adj, _) = adjust_xy(snapshot.context.absolute_yardline, FIELD_CENTER_Y, dir);
        PlayRecord {
            game_id: snapshot.context.game_id,
            play_id: snapshot.context.play_id,
            week: snapshot.context.week,
            down: snapshot.context.down,
            yards_to_go: snapshot.context.yards_to_go,
            los_x_adj,
            offense_team: snapshot.context.possession_team.clone(),
            defense_team: snapshot.context.defensive_team.clone(),
            receiver: state(&snapshot.receiver),
            quarterback: state(&snapshot.quarterback_at_throw),
            defenders: snapshot.defense_ordered.iter().map(state).collect(),
            teammates: snapshot.offense_ordered.iter().map(state).collect(),
            yac: snapshot.observed_yac,
        }
    }

    pub fn key(&self) -> PlayKey {
        PlayKey {
            game_id: self.game_id,
            play_id: self.play_id,
        }
    }

    pub fn catch_x_adj(&self) -> f64 {
        self.receiver.x_adj
    }

    pub fn down_context(&self) -> DownContext {
        DownContext {
            down: self.down,
            yards_to_go: self.yards_to_go,
            los_x_adj: self.los_x_adj,
        }
    }

    pub fn def1(&self) -> Option<&PlayerState> {
        self.defenders.first()
    }

    pub fn role(&self, role: Role) -> Option<&PlayerState> {
        match role {
            Role::Rec => Some(&self.receiver),
            Role::Qb => Some(&self.quarterback),
            Role::Off(k) => self.teammates.get(k as usize - 1),
            Role::Def(k) => self.defenders.get(k as usize - 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Rec,
    Qb,
    /// k-th nearest offensive teammate of the receiver (1-based).
    Off(u8),
    /// k-th nearest defender (1-based).
    Def(u8),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Rec => write!(f, "rec"),
            Role::Qb => write!(f, "qb"),
            Role::Off(k) => write!(f, "off{k}"),
            Role::Def(k) => write!(f, "def{k}"),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let rank = |tail: &str| -> std::result::Result<u8, String> {
            match tail.parse::<u8>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(format!("bad role `{s}`")),
            }
        };
        match s.as_str() {
            "rec" => Ok(Role::Rec),
            "qb" => Ok(Role::Qb),
            _ if s.starts_with("off") => rank(&s[3..]).map(Role::Off),
            _ if s.starts_with("def") => rank(&s[3..]).map(Role::Def),
            _ => Err(format!("unknown role `{s}`")),
        }
    }
}

/// Ordered list of roles whose features make up a model's input vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FeatureSet {
    roles: Vec<Role>,
}

impl FeatureSet {
    pub fn new(roles: Vec<Role>) -> Result<Self> {
        for (i, r) in roles.iter().enumerate() {
            if roles[..i].contains(r) {
                return Err(Error::InvalidConfig(format!("role {r} listed twice")));
            }
        }
        if roles.is_empty() {
            return Err(Error::InvalidConfig("empty feature set".into()));
        }
        Ok(FeatureSet { roles })
    }

    /// Receiver, quarterback and nearest defender: 20 features.
    pub fn yac() -> Self {
        FeatureSet {
            roles: vec![Role::Rec, Role::Qb, Role::Def(1)],
        }
    }

    /// Receiver and quarterback only: 10 features.
    pub fn ghost() -> Self {
        FeatureSet {
            roles: vec![Role::Rec, Role::Qb],
        }
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn contains(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    pub fn label(&self) -> String {
        self.roles
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn len(&self) -> usize {
        self.roles.iter().map(|r| role_feature_names(*r).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.roles
            .iter()
            .flat_map(|r| role_feature_names(*r).iter().map(move |n| format!("{r}_{n}")))
            .collect()
    }
}

impl TryFrom<Vec<String>> for FeatureSet {
    type Error = String;

    fn try_from(v: Vec<String>) -> std::result::Result<Self, Self::Error> {
        let roles = v
            .iter()
            .map(|s| s.parse::<Role>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        FeatureSet::new(roles).map_err(|e| e.to_string())
    }
}

impl From<FeatureSet> for Vec<String> {
    fn from(set: FeatureSet) -> Self {
        set.roles.iter().map(|r| r.to_string()).collect()
    }
}

fn role_feature_names(role: Role) -> &'static [&'static str] {
    match role {
        Role::Rec => &REC_FEATURES,
        Role::Qb => &QB_FEATURES,
        Role::Off(_) | Role::Def(_) => &PLAYER_FEATURES,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Drops every feature belonging to `role`.
    pub fn without_role(&self, role: Role) -> FeatureVector {
        let prefix = format!("{role}_");
        let (names, values) = self
            .names
            .iter()
            .zip(&self.values)
            .filter(|(n, _)| !n.starts_with(&prefix))
            .map(|(n, v)| (n.clone(), *v))
            .unzip();
        FeatureVector { names, values }
    }
}

fn push_receiver(rec: &PlayerState, first_down_x_adj: f64, out: &mut Vec<f64>) {
    out.extend_from_slice(&[
        rec.x_adj,
        rec.y_adj,
        angular_features(rec.dir, ENDZONE_BEARING),
        angular_features(rec.o, ENDZONE_BEARING),
        rec.x_adj - first_down_x_adj,
        rec.s,
    ]);
}

fn push_quarterback(qb: &PlayerState, rec: &PlayerState, out: &mut Vec<f64>) {
    out.extend_from_slice(&[
        qb.s,
        qb.x_adj - rec.x_adj,
        (qb.y_adj - rec.y_adj).abs(),
        qb.distance_to(rec),
    ]);
}

/// The ten per-player features of an offensive or defensive player.
pub fn push_player(p: &PlayerState, rec: &PlayerState, out: &mut Vec<f64>) {
    let bearing = p.bearing_to(rec);
    out.extend_from_slice(&[
        p.x_adj,
        p.y_adj,
        angular_features(p.dir, ENDZONE_BEARING),
        angular_features(p.o, ENDZONE_BEARING),
        p.s,
        p.x_adj - rec.x_adj,
        (p.y_adj - rec.y_adj).abs(),
        p.distance_to(rec),
        angular_features(p.dir, bearing),
        angular_features(p.o, bearing),
    ]);
}

/// Writes the values of `set` into `out` (cleared first). When `def1` is
/// given it stands in for the observed nearest defender.
pub fn feature_values_into(
    record: &PlayRecord,
    set: &FeatureSet,
    def1: Option<&PlayerState>,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    let rec = &record.receiver;
    // goal-to-go: the first-down line is the goal line
    let first_down_x_adj = (record.los_x_adj - record.yards_to_go).max(0.0);
    for &role in set.roles() {
        match role {
            Role::Rec => push_receiver(rec, first_down_x_adj, out),
            Role::Qb => push_quarterback(&record.quarterback, rec, out),
            Role::Def(1) if def1.is_some() => push_player(def1.unwrap(), rec, out),
            other => {
                let p = record.role(other).ok_or(Error::MissingRole(other))?;
                push_player(p, rec, out);
            }
        }
    }
    Ok(())
}

/// Feature vector of `record` in the fixed order given by `set`.
pub fn build_feature_vector(record: &PlayRecord, set: &FeatureSet) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(set.len());
    feature_values_into(record, set, None, &mut values)?;
    Ok(FeatureVector {
        names: set.names(),
        values,
    })
}

/// Roles whose player states are stored in the feature table.
pub const TABLE_ROLES: [Role; 5] = [Role::Rec, Role::Qb, Role::Def(1), Role::Def(2), Role::Off(1)];
const STATE_FIELDS: [&str; 6] = ["id", "x_adj", "y_adj", "s", "dir_std", "o_std"];
const CONTEXT_COLUMNS: [&str; 10] = [
    "game_id",
    "play_id",
    "week",
    "offense_team",
    "defense_team",
    "down",
    "yards_to_go",
    "los_x_adj",
    "catch_x_adj",
    "yac",
];

/// Column order of the feature table: play context, the player states of
/// [`TABLE_ROLES`] (`state_<role>_<field>`), then the 20 YAC-model features.
pub fn feature_table_header() -> Vec<String> {
    let mut cols: Vec<String> = CONTEXT_COLUMNS.iter().map(|s| s.to_string()).collect();
    for role in TABLE_ROLES {
        for field in STATE_FIELDS {
            cols.push(format!("state_{role}_{field}"));
        }
    }
    cols.extend(FeatureSet::yac().names());
    cols
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the feature table. Rows are emitted in the order given; values use
/// shortest round-trip formatting so re-reading is lossless.
pub fn write_feature_table(path: &Path, records: &[PlayRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(feature_table_header()).map_err(|e| Error::csv(path, e))?;
    let yac_set = FeatureSet::yac();
    for r in records {
        let mut row: Vec<String> = vec![
            r.game_id.to_string(),
            r.play_id.to_string(),
            r.week.to_string(),
            r.offense_team.clone(),
            r.defense_team.clone(),
            r.down.to_string(),
            r.yards_to_go.to_string(),
            r.los_x_adj.to_string(),
            r.catch_x_adj().to_string(),
            r.yac.to_string(),
        ];
        for role in TABLE_ROLES {
            match r.role(role) {
                Some(p) => {
                    row.push(p.player_id.map(|i| i.to_string()).unwrap_or_default());
                    for v in [p.x_adj, p.y_adj, p.s, p.dir, p.o] {
                        row.push(v.to_string());
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), STATE_FIELDS.len())),
            }
        }
        match build_feature_vector(r, &yac_set) {
            Ok(fv) => row.extend(fv.values.iter().map(|v| fmt_opt(Some(*v)))),
            Err(_) => row.extend(std::iter::repeat_n(String::new(), yac_set.len())),
        }
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a feature table written by [`write_feature_table`].
pub fn read_feature_table(path: &Path) -> Result<Vec<PlayRecord>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols = Columns::new(path, &headers);
    let idx = |name: &str| cols.required(name);
    let context: Vec<usize> = CONTEXT_COLUMNS.iter().map(|c| idx(c)).collect::<Result<_>>()?;
    let mut state_cols = Vec::new();
    for role in TABLE_ROLES {
        let c: Vec<usize> = STATE_FIELDS
            .iter()
            .map(|f| idx(&format!("state_{role}_{f}")))
            .collect::<Result<_>>()?;
        state_cols.push((role, c));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let f = |i: usize, name: &str| parse_f64(&row, i, name).map_err(err);
        let u = |i: usize, name: &str| parse_u64(&row, i, name).map_err(err);
        let mut states: HashMap<Role, PlayerState> = HashMap::new();
        for (role, c) in &state_cols {
            if is_missing(row.get(c[1]).unwrap_or("")) {
                continue;
            }
            let id_cell = row.get(c[0]).unwrap_or("");
            states.insert(
                *role,
                PlayerState {
                    player_id: if is_missing(id_cell) { None } else { Some(u(c[0], "player id")?) },
                    x_adj: f(c[1], "x_adj")?,
                    y_adj: f(c[2], "y_adj")?,
                    s: f(c[3], "s")?,
                    dir: f(c[4], "dir")?,
                    o: f(c[5], "o")?,
                },
            );
        }
        let take = |states: &mut HashMap<Role, PlayerState>, role: Role| {
            states.remove(&role).ok_or_else(|| err(format!("missing state for {role}")))
        };
        let receiver = take(&mut states, Role::Rec)?;
        let quarterback = take(&mut states, Role::Qb)?;
        let mut defenders = vec![take(&mut states, Role::Def(1))?];
        defenders.extend(states.remove(&Role::Def(2)));
        let teammates: Vec<PlayerState> = states.remove(&Role::Off(1)).into_iter().collect();
        records.push(PlayRecord {
            game_id: u(context[0], "game id")?,
            play_id: u(context[1], "play id")?,
            week: u(context[2], "week")? as u32,
            offense_team: row.get(context[3]).unwrap_or("").to_string(),
            defense_team: row.get(context[4]).unwrap_or("").to_string(),
            down: u(context[5], "down")? as u8,
            yards_to_go: f(context[6], "yards_to_go")?,
            los_x_adj: f(context[7], "los_x_adj")?,
            receiver,
            quarterback,
            defenders,
            teammates,
            yac: f(context[9], "yac")?,
        });
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub player_id: u64,
    pub display_name: String,
    pub position: String,
}

/// One entry per player id seen in the frames; first occurrence wins.
pub fn rosters_from_frames(frames: &[TrackingFrame]) -> BTreeMap<u64, RosterEntry> {
    let mut out = BTreeMap::new();
    for f in frames {
        if let Some(id) = f.player_id {
            out.entry(id).or_insert_with(|| RosterEntry {
                player_id: id,
                display_name: f.display_name.clone(),
                position: f.position.clone().unwrap_or_default(),
            });
        }
    }
    out
}

pub fn write_rosters(path: &Path, rosters: &BTreeMap<u64, RosterEntry>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rosters.values() {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_rosters(path: &Path) -> Result<BTreeMap<u64, RosterEntry>> {
    let mut reader = open_csv(path)?;
    let mut out = BTreeMap::new();
    for row in reader.deserialize() {
        let r: RosterEntry = row.map_err(|e| Error::csv(path, e))?;
        out.insert(r.player_id, r);
    }
    Ok(out)
}
