//! Synthetic plays with known conditional densities.
//!
//! Every play is a completed pass with a quarterback, the receiver, one
//! offensive teammate and two defenders. The nearest defender is placed in
//! front of the receiver at a distance that grows with receiver speed and
//! with the defender's (hidden) skill offset; yards after catch then follow
//! a truncated normal whose mean grows with receiver speed and defender
//! distance, so closer coverage means fewer yards by construction.
//!
//! Output uses the tracking, plays and games file layouts that
//! [`crate::tracking`] reads, so the whole pipeline runs unchanged on it.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tracking::{
    raw_xy, select_eligible_plays, Convention, Event, PlayContext, PlayDirection, PlayRecord, Side,
    TrackingFrame, FIELD_CENTER_Y,
};

const PLAY_STREAM: u64 = 1;
const SKILL_STREAM: u64 = 2;
const FIELD_MARGIN: f64 = 0.5;
const POSITIONS: [&str; 6] = ["CB", "CB", "FS", "SS", "OLB", "ILB"];
const SNAP_FRAME: u32 = 1;
const THROW_FRAME: u32 = 10;
const CATCH_FRAME: u32 = 20;
const END_FRAME: u32 = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_plays: usize,
    pub weeks: u32,
    pub n_teams: usize,
    pub defenders_per_team: usize,
    pub seed: u64,
    /// Catch spot range in `x_adj`.
    pub catch_x_adj: (f64, f64),
    pub receiver_speed: (f64, f64),
    /// Uniform range of each defender's distance offset.
    pub skill: (f64, f64),
    /// Nearest-defender distance law: `x_adj` offset in front of the
    /// receiver is `offset_base + offset_speed * rec_s + skill`, plus
    /// independent normal noise with sd `position_sd` on both axes.
    pub offset_base: f64,
    pub offset_speed: f64,
    pub position_sd: f64,
    /// YAC law: `N(yac_base + yac_speed * rec_s + yac_distance * dist, yac_sd^2)`
    /// truncated to `[-10, catch_x_adj]`.
    pub yac_base: f64,
    pub yac_speed: f64,
    pub yac_distance: f64,
    pub yac_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_plays: 200,
            weeks: 5,
            n_teams: 8,
            defenders_per_team: 6,
            seed: 0,
            catch_x_adj: (15.0, 95.0),
            receiver_speed: (2.0, 9.0),
            skill: (-1.0, 1.5),
            offset_base: 1.0,
            offset_speed: 0.3,
            position_sd: 2.5,
            yac_base: 0.5,
            yac_speed: 0.35,
            yac_distance: 0.8,
            yac_sd: 1.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let range_ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        let bad = |m: &str| Err(Error::InvalidConfig(format!("synth: {m}")));
        if self.weeks == 0 {
            return bad("weeks must be positive");
        }
        if self.n_teams < 2 || !self.n_teams.is_multiple_of(2) {
            return bad("n_teams must be even and at least 2");
        }
        if self.defenders_per_team < 2 || self.defenders_per_team > 99 {
            return bad("defenders_per_team must be in 2..=99");
        }
        if !range_ok(self.catch_x_adj) || self.catch_x_adj.0 <= 0.0 || self.catch_x_adj.1 > 95.0 {
            return bad("catch_x_adj must be a range inside (0, 95]");
        }
        if !range_ok(self.receiver_speed) || self.receiver_speed.0 < 0.0 {
            return bad("receiver_speed must be a nonnegative range");
        }
        if !range_ok(self.skill) {
            return bad("skill must be a range");
        }
        if !(self.position_sd > 0.0 && self.yac_sd > 0.0) {
            return bad("standard deviations must be positive");
        }
        Ok(())
    }

    pub fn team_name(team: usize) -> String {
        format!("T{}", team + 1)
    }

    pub fn defender_id(team: usize, k: usize) -> u64 {
        1000 + 100 * (team as u64 + 1) + k as u64
    }

    /// Distance offset of defender `k` of `team`.
    pub fn defender_skill(&self, team: usize, k: usize) -> f64 {
        let mut r = rng::stream(self.seed, &[SKILL_STREAM, team as u64, k as u64]);
        r.random_range(self.skill.0..self.skill.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthGame {
    pub game_id: u64,
    pub week: u32,
    pub home: String,
    pub visitor: String,
}

/// Generative parameters behind one play.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub game_id: u64,
    pub play_id: u64,
    pub week: u32,
    pub def1_id: u64,
    pub skill: f64,
    pub catch_x_adj: f64,
    pub rec_s: f64,
    pub dist_to_rec: f64,
    pub yac_mean: f64,
    pub yac_sd: f64,
    pub yac_lower: f64,
    pub yac_upper: f64,
    pub yac: f64,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

impl SynthTruth {
    /// True conditional density of YAC at `y` (truncated normal).
    pub fn yac_density(&self, y: f64) -> f64 {
        if y < self.yac_lower || y > self.yac_upper {
            return 0.0;
        }
        let z = (y - self.yac_mean) / self.yac_sd;
        let mass = normal_cdf((self.yac_upper - self.yac_mean) / self.yac_sd)
            - normal_cdf((self.yac_lower - self.yac_mean) / self.yac_sd);
        (-0.5 * z * z).exp() / (self.yac_sd * (2.0 * PI).sqrt()) / mass
    }

    /// Mean of the untruncated law; the truncation moves it negligibly for
    /// the default ranges.
    pub fn nominal_mean(&self) -> f64 {
        self.yac_mean
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthData {
    pub games: Vec<SynthGame>,
    pub plays: Vec<PlayContext>,
    /// Sorted by play, then player, then frame.
    pub frames: Vec<TrackingFrame>,
    pub truth: Vec<SynthTruth>,
}

struct Actor<'a> {
    id: Option<u64>,
    name: String,
    position: Option<&'a str>,
    side: Side,
    /// `(x_adj, y_adj, s, dir_std, o_std)` at snap, throw, catch, end.
    states: [(f64, f64, f64, f64, f64); 4],
}

fn clamp_field(x_adj: f64, y_adj: f64) -> (f64, f64) {
    (
        x_adj.clamp(-10.0 + FIELD_MARGIN, 110.0 - FIELD_MARGIN),
        y_adj.clamp(-FIELD_CENTER_Y + FIELD_MARGIN, FIELD_CENTER_Y - FIELD_MARGIN),
    )
}

fn raw_angle(std_angle: f64, direction: PlayDirection) -> f64 {
    match direction {
        PlayDirection::Right => std_angle.rem_euclid(360.0),
        PlayDirection::Left => (std_angle - 180.0).rem_euclid(360.0),
    }
}

fn bearing(from: (f64, f64), to: (f64, f64)) -> f64 {
    (-(to.0 - from.0)).atan2(to.1 - from.1).to_degrees().rem_euclid(360.0)
}

fn schedule(config: &SynthConfig) -> Vec<SynthGame> {
    let mut games = Vec::new();
    let half = config.n_teams / 2;
    for week in 1..=config.weeks {
        for g in 0..half {
            // rotate pairings week to week
            let home = (g + week as usize) % config.n_teams;
            let visitor = (home + half) % config.n_teams;
            games.push(SynthGame {
                game_id: 2_000_000_000 + week as u64 * 100 + g as u64,
                week,
                home: SynthConfig::team_name(home),
                visitor: SynthConfig::team_name(visitor),
            });
        }
    }
    games
}

fn team_index(name: &str) -> usize {
    name[1..].parse::<usize>().expect("synthetic team names are T<n>") - 1
}

fn generate_play(
    config: &SynthConfig,
    games: &[SynthGame],
    i: usize,
) -> (PlayContext, Vec<TrackingFrame>, SynthTruth) {
    let mut r = rng::stream(config.seed, &[PLAY_STREAM, i as u64]);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let week = 1 + (i as u32 % config.weeks);
    let week_games: Vec<&SynthGame> = games.iter().filter(|g| g.week == week).collect();
    let game = week_games[r.random_range(0..week_games.len())];
    let home_offense = r.random_bool(0.5);
    let (offense, defense) = if home_offense {
        (&game.home, &game.visitor)
    } else {
        (&game.visitor, &game.home)
    };
    let (off_side, def_side) = if home_offense {
        (Side::Home, Side::Away)
    } else {
        (Side::Away, Side::Home)
    };
    let direction = if r.random_bool(0.5) {
        PlayDirection::Left
    } else {
        PlayDirection::Right
    };

    let catch_x = r.random_range(config.catch_x_adj.0..config.catch_x_adj.1);
    let air = r.random_range(0.0..15.0);
    let los = (catch_x + air).min(99.0);
    let yards_to_go = (r.random_range(1..=10u32) as f64).min(los.floor()).max(1.0);
    let down = r.random_range(1..=4u8);
    let rec_s = r.random_range(config.receiver_speed.0..config.receiver_speed.1);
    let rec_y = r.random_range(-20.0..20.0);
    let rec_dir = 90.0 + 25.0 * unit.sample(&mut r);
    let rec_o = rec_dir + 20.0 * unit.sample(&mut r);

    let def_team = team_index(defense);
    let picks = rand::seq::index::sample(&mut r, config.defenders_per_team, 2);
    let (k1, k2) = (picks.index(0), picks.index(1));
    let skill = config.defender_skill(def_team, k1);
    let offset = config.offset_base + config.offset_speed * rec_s + skill;
    let (d1x, d1y) = clamp_field(
        catch_x - offset + config.position_sd * unit.sample(&mut r),
        rec_y + config.position_sd * unit.sample(&mut r),
    );
    let dist = (d1x - catch_x).hypot(d1y - rec_y);
    let d1_s = r.random_range(1.0..8.0);
    let d1_dir = bearing((d1x, d1y), (catch_x, rec_y)) + 30.0 * unit.sample(&mut r);
    let d1_o = d1_dir + 20.0 * unit.sample(&mut r);

    let gap = dist + 2.0 + r.random_range(0.0..8.0);
    let d2x = if catch_x + gap <= 110.0 - FIELD_MARGIN {
        catch_x + gap
    } else {
        catch_x - gap
    };
    let (d2x, d2y) = clamp_field(d2x, rec_y + unit.sample(&mut r));
    let d2_s = r.random_range(1.0..8.0);
    let d2_dir = bearing((d2x, d2y), (catch_x, rec_y));

    let (te_x, te_y) = clamp_field(
        catch_x + r.random_range(-10.0..10.0),
        rec_y + r.random_range(-10.0..10.0),
    );
    let (qb_x, qb_y) = clamp_field(los + r.random_range(5.0..9.0), 2.0 * unit.sample(&mut r));

    let yac_mean = config.yac_base + config.yac_speed * rec_s + config.yac_distance * dist;
    let law = Normal::new(yac_mean, config.yac_sd).expect("positive sd");
    let (lower, upper) = (-10.0, catch_x);
    let yac = loop {
        let v = law.sample(&mut r);
        if (lower..=upper).contains(&v) {
            break v;
        }
    };
    let end_x = catch_x - yac;

    let off_team = team_index(offense);
    let off_id = |k: u64| 1000 + 100 * (off_team as u64 + 1) + 50 + k;
    let still = |x: f64, y: f64, s: f64, d: f64, o: f64| [(x, y, s, d, o); 4];
    let mut rec_states = still(catch_x, rec_y, rec_s, rec_dir, rec_o);
    rec_states[0] = (los, rec_y, 0.0, 90.0, 90.0);
    rec_states[1] = ((los + catch_x) / 2.0, rec_y, rec_s, rec_dir, rec_o);
    rec_states[3] = (end_x, rec_y, 0.5, rec_dir, rec_o);
    let mut qb_states = still(qb_x, qb_y, 1.0, 90.0, 90.0);
    qb_states[0] = (los + 1.0, 0.0, 0.0, 90.0, 90.0);
    let ball = [
        (los, 0.0, 0.0, 0.0, 0.0),
        (qb_x, qb_y, 0.0, 0.0, 0.0),
        (catch_x, rec_y, 0.0, 0.0, 0.0),
        (end_x, rec_y, 0.0, 0.0, 0.0),
    ];
    let def_name = |k: usize| format!("{defense} defender {k}");
    let actors = vec![
        Actor {
            id: Some(off_id(0)),
            name: format!("{offense} quarterback"),
            position: Some("QB"),
            side: off_side,
            states: qb_states,
        },
        Actor {
            id: Some(off_id(1)),
            name: format!("{offense} receiver"),
            position: Some("WR"),
            side: off_side,
            states: rec_states,
        },
        Actor {
            id: Some(off_id(2)),
            name: format!("{offense} tight end"),
            position: Some("TE"),
            side: off_side,
            states: still(te_x, te_y, 3.0, 90.0, 90.0),
        },
        Actor {
            id: Some(SynthConfig::defender_id(def_team, k1)),
            name: def_name(k1),
            position: Some(POSITIONS[k1 % POSITIONS.len()]),
            side: def_side,
            states: still(d1x, d1y, d1_s, d1_dir, d1_o),
        },
        Actor {
            id: Some(SynthConfig::defender_id(def_team, k2)),
            name: def_name(k2),
            position: Some(POSITIONS[k2 % POSITIONS.len()]),
            side: def_side,
            states: still(d2x, d2y, d2_s, d2_dir, d2_dir),
        },
        Actor {
            id: None,
            name: "Football".into(),
            position: None,
            side: Side::Football,
            states: ball,
        },
    ];

    let play_id = i as u64 + 1;
    let events = [
        (SNAP_FRAME, Event::BallSnap),
        (THROW_FRAME, Event::PassForward),
        (CATCH_FRAME, Event::PassOutcomeCaught),
        (END_FRAME, Event::Tackle),
    ];
    let mut frames = Vec::with_capacity(actors.len() * 4);
    for actor in &actors {
        for ((frame_id, event), (x_adj, y_adj, s, dir, o)) in events.iter().zip(actor.states) {
            let (x, y) = raw_xy(x_adj, y_adj, direction);
            frames.push(TrackingFrame {
                game_id: game.game_id,
                play_id,
                player_id: actor.id,
                frame_id: *frame_id,
                x,
                y,
                s,
                a: 0.0,
                dis: s / 10.0,
                o: raw_angle(o, direction),
                dir: raw_angle(dir, direction),
                event: Some(event.clone()),
                display_name: actor.name.clone(),
                position: actor.position.map(str::to_string),
                side: actor.side,
                play_direction: direction,
            });
        }
    }

    let absolute_yardline = raw_xy(los, 0.0, direction).0;
    let context = PlayContext {
        game_id: game.game_id,
        play_id,
        week,
        down,
        yards_to_go,
        play_direction: None,
        absolute_yardline,
        possession_team: offense.clone(),
        defensive_team: defense.clone(),
        quarter: Some(1 + (i % 4) as u8),
        game_clock: Some("10:00".into()),
        score_differential: Some(0.0),
        pass_result: Some("C".into()),
    };
    let truth = SynthTruth {
        game_id: game.game_id,
        play_id,
        week,
        def1_id: SynthConfig::defender_id(def_team, k1),
        skill,
        catch_x_adj: catch_x,
        rec_s,
        dist_to_rec: dist,
        yac_mean,
        yac_sd: config.yac_sd,
        yac_lower: lower,
        yac_upper: upper,
        yac,
    };
    (context, frames, truth)
}

/// Generates `config.n_plays` plays; each play draws from its own stream.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let games = schedule(config);
    let per_play: Vec<_> = (0..config.n_plays)
        .into_par_iter()
        .map(|i| generate_play(config, &games, i))
        .collect();
    let mut plays = Vec::with_capacity(per_play.len());
    let mut frames = Vec::new();
    let mut truth = Vec::with_capacity(per_play.len());
    for (p, f, t) in per_play {
        plays.push(p);
        frames.extend(f);
        truth.push(t);
    }
    Ok(SynthData {
        games,
        plays,
        frames,
        truth,
    })
}

impl SynthData {
    /// Play records as the tracking stage would build them.
    pub fn records(&self) -> Vec<PlayRecord> {
        let (snapshots, _) = select_eligible_plays(&self.plays, &self.frames);
        snapshots
            .iter()
            .map(|s| PlayRecord::from_snapshot(s, &Convention::default()))
            .collect()
    }

    /// Writes `games.csv`, `plays.csv`, `tracking_week<w>.csv` and
    /// `truth.csv` into `dir`; returns the tracking file paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let games_path = dir.join("games.csv");
        let mut w = csv::Writer::from_path(&games_path).map_err(|e| Error::csv(&games_path, e))?;
        w.write_record(["gameId", "homeTeamAbbr", "visitorTeamAbbr", "week"])
            .map_err(|e| Error::csv(&games_path, e))?;
        for g in &self.games {
            w.write_record([g.game_id.to_string(), g.home.clone(), g.visitor.clone(), g.week.to_string()])
                .map_err(|e| Error::csv(&games_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&games_path, e))?;

        let plays_path = dir.join("plays.csv");
        let mut w = csv::Writer::from_path(&plays_path).map_err(|e| Error::csv(&plays_path, e))?;
        w.write_record([
            "gameId",
            "playId",
            "quarter",
            "down",
            "yardsToGo",
            "possessionTeam",
            "gameClock",
            "absoluteYardlineNumber",
            "preSnapHomeScore",
            "preSnapVisitorScore",
            "passResult",
        ])
        .map_err(|e| Error::csv(&plays_path, e))?;
        for p in &self.plays {
            w.write_record([
                p.game_id.to_string(),
                p.play_id.to_string(),
                p.quarter.map(|q| q.to_string()).unwrap_or_default(),
                p.down.to_string(),
                p.yards_to_go.to_string(),
                p.possession_team.clone(),
                p.game_clock.clone().unwrap_or_default(),
                p.absolute_yardline.to_string(),
                "0".into(),
                "0".into(),
                p.pass_result.clone().unwrap_or_default(),
            ])
            .map_err(|e| Error::csv(&plays_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&plays_path, e))?;

        let week_of: std::collections::HashMap<u64, u32> =
            self.games.iter().map(|g| (g.game_id, g.week)).collect();
        let mut weeks: Vec<u32> = self.games.iter().map(|g| g.week).collect();
        weeks.sort_unstable();
        weeks.dedup();
        let mut paths = Vec::new();
        for week in weeks {
            let path = dir.join(format!("tracking_week{week}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
            w.write_record([
                "x", "y", "s", "a", "dis", "o", "dir", "event", "nflId", "displayName", "position",
                "frameId", "team", "gameId", "playId", "playDirection",
            ])
            .map_err(|e| Error::csv(&path, e))?;
            for f in self.frames.iter().filter(|f| week_of[&f.game_id] == week) {
                w.write_record([
                    f.x.to_string(),
                    f.y.to_string(),
                    f.s.to_string(),
                    f.a.to_string(),
                    f.dis.to_string(),
                    f.o.to_string(),
                    f.dir.to_string(),
                    f.event.as_ref().map(|e| e.as_str().to_string()).unwrap_or_default(),
                    f.player_id.map(|i| i.to_string()).unwrap_or_default(),
                    f.display_name.clone(),
                    f.position.clone().unwrap_or_default(),
                    f.frame_id.to_string(),
                    f.side.as_str().to_string(),
                    f.game_id.to_string(),
                    f.play_id.to_string(),
                    f.play_direction.as_str().to_string(),
                ])
                .map_err(|e| Error::csv(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }

        let truth_path = dir.join("truth.csv");
        let mut w = csv::Writer::from_path(&truth_path).map_err(|e| Error::csv(&truth_path, e))?;
        for t in &self.truth {
            w.serialize(t).map_err(|e| Error::csv(&truth_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&truth_path, e))?;
        Ok(paths)
    }
}
