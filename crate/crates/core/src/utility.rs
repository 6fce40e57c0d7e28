//! Play-value utility: ending yard line to expected points.
//!
//! [`next_state`] turns a catch context and an ending spot into the state of
//! the next play; a [`PlayUtility`] values that state. Two utilities ship: a
//! loader for externally computed expected-points tables and a smooth
//! parametric fallback for desk-scale runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOUCHDOWN_POINTS: f64 = 7.0;
pub const SAFETY_POINTS: f64 = 2.0;
pub const MAX_POINTS: f64 = 7.0;

/// Down and distance at the snap, with the line of scrimmage in `x_adj`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DownContext {
    pub down: u8,
    pub yards_to_go: f64,
    pub los_x_adj: f64,
}

impl DownContext {
    /// First-down line in `x_adj`; the goal line in goal-to-go situations.
    pub fn first_down_x_adj(&self) -> f64 {
        (self.los_x_adj - self.yards_to_go).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Possession {
    /// The team that completed the pass.
    Offense,
    Opponent,
}

/// State of the next play. `yardline` is measured from the endzone the
/// possessing team attacks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub down: u8,
    pub yards_to_go: f64,
    pub yardline: f64,
    pub possession: Possession,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NextState {
    Touchdown,
    /// Receiver downed in his own endzone.
    Safety,
    Play(GameState),
}

/// State after the receiver is downed at `ending_x_adj`.
pub fn next_state(ctx: &DownContext, ending_x_adj: f64) -> NextState {
    if ending_x_adj <= 0.0 {
        return NextState::Touchdown;
    }
    if ending_x_adj >= 100.0 {
        return NextState::Safety;
    }
    let gained = ctx.los_x_adj - ending_x_adj;
    if gained >= ctx.yards_to_go {
        NextState::Play(GameState {
            down: 1,
            yards_to_go: ending_x_adj.min(10.0),
            yardline: ending_x_adj,
            possession: Possession::Offense,
        })
    } else if ctx.down < 4 {
        NextState::Play(GameState {
            down: ctx.down + 1,
            yards_to_go: ctx.yards_to_go - gained,
            yardline: ending_x_adj,
            possession: Possession::Offense,
        })
    } else {
        // turnover on downs: opponent takes over at the spot
        let yardline = 100.0 - ending_x_adj;
        NextState::Play(GameState {
            down: 1,
            yards_to_go: yardline.min(10.0),
            yardline,
            possession: Possession::Opponent,
        })
    }
}

/// Anything that can value a next-play state in points for the offense.
pub trait PlayUtility: Sync {
    /// Expected points of `state` for the team in possession.
    fn expected_points(&self, down: u8, yards_to_go: f64, yardline: f64) -> f64;

    /// Points for the catching team, flipping sign on opponent possession.
    fn state_value(&self, state: &GameState) -> f64 {
        let ep = self.expected_points(state.down, state.yards_to_go, state.yardline);
        match state.possession {
            Possession::Offense => ep,
            Possession::Opponent => -ep,
        }
    }

    /// `g`: value of the receiver ending the play at `ending_x_adj`.
    fn g(&self, ending_x_adj: f64, ctx: &DownContext) -> f64 {
        match next_state(ctx, ending_x_adj) {
            NextState::Touchdown => TOUCHDOWN_POINTS,
            NextState::Safety => -SAFETY_POINTS,
            NextState::Play(state) => self.state_value(&state),
        }
    }
}

/// Smooth fallback expected-points surface.
///
/// `ep = lower + (upper - lower) / (1 + exp((yardline - midpoint) / scale))
///       + down_offset[down] - distance_slope * (min(ytg, 30) - 10)`,
/// clamped to `[-7, 7]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParametricEp {
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
    pub scale: f64,
    pub down_offset: [f64; 4],
    pub distance_slope: f64,
}

impl Default for ParametricEp {
    fn default() -> Self {
        ParametricEp {
            lower: -2.0,
            upper: 6.5,
            midpoint: 45.0,
            scale: 22.0,
            down_offset: [0.0, -0.45, -1.0, -1.7],
            distance_slope: 0.07,
        }
    }
}

impl PlayUtility for ParametricEp {
    fn expected_points(&self, down: u8, yards_to_go: f64, yardline: f64) -> f64 {
        let base = self.lower
            + (self.upper - self.lower) / (1.0 + ((yardline - self.midpoint) / self.scale).exp());
        let down_idx = (down.clamp(1, 4) - 1) as usize;
        let distance = yards_to_go.clamp(1.0, 30.0) - 10.0;
        (base + self.down_offset[down_idx] - self.distance_slope * distance)
            .clamp(-MAX_POINTS, MAX_POINTS)
    }
}

impl ParametricEp {
    /// Tabulates the surface in the expected-points file layout: one-yard
    /// distance buckets 1..=19, a 20+ bucket, yard lines 1..=99.
    pub fn to_table(&self) -> UtilityTable {
        let mut rows = Vec::new();
        for down in 1..=4u8 {
            for ytg in 1..=20u32 {
                let (lo, hi) = if ytg == 20 { (20.0, 99.0) } else { (ytg as f64, ytg as f64) };
                for yl in 1..=99u32 {
                    rows.push(EpRow {
                        down,
                        ytg_min: lo,
                        ytg_max: hi,
                        yardline: yl,
                        ep: self.expected_points(down, lo, yl as f64),
                    });
                }
            }
        }
        UtilityTable::from_rows(rows).expect("parametric table is valid by construction")
    }
}

/// One row of an expected-points file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpRow {
    pub down: u8,
    pub ytg_min: f64,
    pub ytg_max: f64,
    pub yardline: u32,
    pub ep: f64,
}

#[derive(Debug)]
struct Bucket {
    ytg_min: f64,
    ytg_max: f64,
    /// Indexed by yard line 1..=99 (index 0 unused).
    ep: Vec<f64>,
}

/// Expected points by (down, distance bucket, yard line).
///
/// Yard lines are tabulated at integers 1..=99 and interpolated linearly in
/// between. A distance outside every bucket falls back to the nearest
/// bucket; fallbacks are counted and logged once.
#[derive(Debug)]
pub struct UtilityTable {
    downs: [Vec<Bucket>; 4],
    fallbacks: AtomicUsize,
}

impl UtilityTable {
    pub fn from_rows(rows: Vec<EpRow>) -> Result<Self> {
        let mut grouped: BTreeMap<(u8, u64, u64), BTreeMap<u32, f64>> = BTreeMap::new();
        for r in &rows {
            if !(1..=4).contains(&r.down) {
                return Err(Error::UtilityTable(format!("down {} outside 1..=4", r.down)));
            }
            if !(r.ep.is_finite() && r.ep.abs() <= MAX_POINTS) {
                return Err(Error::UtilityTable(format!("ep {} outside [-7, 7]", r.ep)));
            }
            if !(r.ytg_min >= 1.0 && r.ytg_max >= r.ytg_min) {
                return Err(Error::UtilityTable(format!(
                    "bad distance bucket [{}, {}]",
                    r.ytg_min, r.ytg_max
                )));
            }
            if !(1..=99).contains(&r.yardline) {
                return Err(Error::UtilityTable(format!("yardline {} outside 1..=99", r.yardline)));
            }
            grouped
                .entry((r.down, r.ytg_min.to_bits(), r.ytg_max.to_bits()))
                .or_default()
                .insert(r.yardline, r.ep);
        }
        let mut downs: [Vec<Bucket>; 4] = Default::default();
        for ((down, lo, hi), lines) in grouped {
            if lines.len() != 99 {
                return Err(Error::UtilityTable(format!(
                    "down {down} bucket [{}, {}] covers {} of 99 yard lines",
                    f64::from_bits(lo),
                    f64::from_bits(hi),
                    lines.len()
                )));
            }
            let mut ep = vec![0.0; 100];
            for (yl, v) in lines {
                ep[yl as usize] = v;
            }
            downs[down as usize - 1].push(Bucket {
                ytg_min: f64::from_bits(lo),
                ytg_max: f64::from_bits(hi),
                ep,
            });
        }
        for (i, buckets) in downs.iter_mut().enumerate() {
            if buckets.is_empty() {
                return Err(Error::UtilityTable(format!("down {} has no rows", i + 1)));
            }
            buckets.sort_by(|a, b| a.ytg_min.total_cmp(&b.ytg_min));
        }
        Ok(UtilityTable {
            downs,
            fallbacks: AtomicUsize::new(0),
        })
    }

    /// Loads a comma-separated file with header `down,ytg_min,ytg_max,yardline,ep`.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<EpRow>, _>>()
            .map_err(|e| Error::csv(path, e))?;
        Self::from_rows(rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        for (d, buckets) in self.downs.iter().enumerate() {
            for b in buckets {
                for yl in 1..=99u32 {
                    w.serialize(EpRow {
                        down: d as u8 + 1,
                        ytg_min: b.ytg_min,
                        ytg_max: b.ytg_max,
                        yardline: yl,
                        ep: b.ep[yl as usize],
                    })
                    .map_err(|e| Error::csv(path, e))?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    fn bucket(&self, down: u8, yards_to_go: f64) -> &Bucket {
        let buckets = &self.downs[(down.clamp(1, 4) - 1) as usize];
        if let Some(b) = buckets
            .iter()
            .find(|b| yards_to_go >= b.ytg_min && yards_to_go <= b.ytg_max)
        {
            return b;
        }
        let gap = |b: &Bucket| {
            if yards_to_go < b.ytg_min {
                b.ytg_min - yards_to_go
            } else {
                yards_to_go - b.ytg_max
            }
        };
        let nearest = buckets
            .iter()
            .min_by(|a, b| gap(a).total_cmp(&gap(b)))
            .expect("validated non-empty");
        // fractional distances between integer buckets are routine
        if gap(nearest) >= 1.0 && self.fallbacks.fetch_add(1, Ordering::Relaxed) == 0 {
            log::warn!(
                "distance {yards_to_go} on down {down} outside table buckets; using nearest bucket"
            );
        }
        nearest
    }
}

impl PlayUtility for UtilityTable {
    fn expected_points(&self, down: u8, yards_to_go: f64, yardline: f64) -> f64 {
        let b = self.bucket(down, yards_to_go);
        let yl = yardline.clamp(1.0, 99.0);
        let lo = yl.floor() as usize;
        let hi = (lo + 1).min(99);
        let t = yl - lo as f64;
        b.ep[lo] * (1.0 - t) + b.ep[hi] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(down: u8, ytg: f64, los: f64) -> DownContext {
        DownContext {
            down,
            yards_to_go: ytg,
            los_x_adj: los,
        }
    }

    #[test]
    fn third_and_six_short_goes_to_fourth() {
        // caught past the line, tackled one yard short of the marker
        match next_state(&ctx(3, 6.0, 66.0), 61.0) {
            NextState::Play(s) => {
                assert_eq!(s.down, 4);
                assert_eq!(s.yards_to_go, 1.0);
                assert_eq!(s.possession, Possession::Offense);
                assert_eq!(s.yardline, 61.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundaries() {
        assert_eq!(next_state(&ctx(2, 5.0, 30.0), 0.0), NextState::Touchdown);
        assert_eq!(next_state(&ctx(2, 5.0, 30.0), -2.0), NextState::Touchdown);
        match next_state(&ctx(2, 10.0, 50.0), 40.0) {
            NextState::Play(s) => {
                assert_eq!((s.down, s.yards_to_go), (1, 10.0));
            }
            other => panic!("{other:?}"),
        }
        match next_state(&ctx(1, 10.0, 12.0), 6.0) {
            NextState::Play(s) => assert_eq!((s.down, s.yards_to_go), (2, 4.0)),
            other => panic!("{other:?}"),
        }
        match next_state(&ctx(4, 3.0, 40.0), 39.0) {
            NextState::Play(s) => {
                assert_eq!(s.possession, Possession::Opponent);
                assert_eq!(s.yardline, 61.0);
                assert_eq!(s.down, 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(next_state(&ctx(1, 10.0, 95.0), 101.0), NextState::Safety);
    }

    #[test]
    fn touchdown_is_seven() {
        let ep = ParametricEp::default();
        assert_eq!(ep.g(0.0, &ctx(1, 10.0, 20.0)), 7.0);
        assert_eq!(ep.to_table().g(-1.5, &ctx(3, 2.0, 5.0)), 7.0);
    }

    #[test]
    fn fallback_formula_at_midfield() {
        let ep = ParametricEp::default();
        // 1st-and-10 at the 50 after a first down from 3rd-and-5 at the 55
        let got = ep.g(50.0, &ctx(3, 5.0, 55.0));
        let expected = -2.0 + 8.5 / (1.0 + ((50.0f64 - 45.0) / 22.0).exp());
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((got - 1.7691).abs() < 1e-3);
    }

    #[test]
    fn possession_antisymmetry() {
        let table = ParametricEp::default().to_table();
        let state = GameState {
            down: 1,
            yards_to_go: 10.0,
            yardline: 61.0,
            possession: Possession::Offense,
        };
        let flipped = GameState {
            possession: Possession::Opponent,
            ..state
        };
        let v = table.state_value(&state);
        assert_eq!(table.state_value(&flipped), -v);
    }

    #[test]
    fn table_matches_formula_at_integers_and_round_trips() {
        let param = ParametricEp::default();
        let table = param.to_table();
        for (down, ytg, yl) in [(1u8, 10.0, 50.0), (3, 6.0, 62.0), (4, 1.0, 3.0), (2, 20.0, 99.0)] {
            let a = param.expected_points(down, ytg, yl);
            let b = table.expected_points(down, ytg, yl);
            assert!((a - b).abs() < 1e-12);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ep.csv");
        table.save(&path).unwrap();
        let loaded = UtilityTable::load(&path).unwrap();
        assert_eq!(loaded.expected_points(2, 7.0, 33.5), table.expected_points(2, 7.0, 33.5));
    }

    #[test]
    fn load_validates_coverage_and_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ep.csv");
        std::fs::write(&path, "down,ytg_min,ytg_max,yardline,ep\n1,1,99,50,1.0\n").unwrap();
        assert!(matches!(UtilityTable::load(&path), Err(Error::UtilityTable(_))));
        let mut rows = ParametricEp::default().to_table();
        rows.downs[0][0].ep[10] = 9.0;
        rows.save(&path).unwrap();
        assert!(matches!(UtilityTable::load(&path), Err(Error::UtilityTable(_))));
    }

    #[test]
    fn out_of_bucket_distance_uses_nearest() {
        let rows: Vec<EpRow> = (1..=4u8)
            .flat_map(|down| {
                (1..=99u32).map(move |yl| EpRow {
                    down,
                    ytg_min: 1.0,
                    ytg_max: 10.0,
                    yardline: yl,
                    ep: 0.5,
                })
            })
            .collect();
        let table = UtilityTable::from_rows(rows).unwrap();
        assert_eq!(table.expected_points(1, 25.0, 40.0), 0.5);
        assert_eq!(table.fallback_count(), 1);
    }

    #[test]
    fn utility_range() {
        let table = ParametricEp::default().to_table();
        for down in 1..=4u8 {
            for los in [1.0, 20.0, 50.0, 80.0, 99.0] {
                for ending in -5..=112 {
                    let v = table.g(ending as f64, &ctx(down, 7.0, los));
                    assert!((-7.0..=7.0).contains(&v));
                }
            }
        }
    }
}
