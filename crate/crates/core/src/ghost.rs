//! Ghost-defender counterfactuals.
//!
//! For one catch the nearest defender is replaced by a distribution of
//! ghosts: a location `l` drawn from the 2D density of where a nearest
//! defender would be given everyone else, and a `(s, dir, o)` trajectory
//! resampled from training plays whose defender stood at a similar distance
//! from the receiver. The difference between the observed EPV and the ghost
//! EPVs, integrated over both, is the defender's expected contribution.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epv::EpvEvaluator;
use crate::error::{Error, Result};
use crate::rfcde::{Forest, Grid};
use crate::rng;
use crate::tracking::{
    build_feature_vector, FeatureSet, PlayKey, PlayRecord, PlayerState, Trajectory, FIELD_CENTER_Y,
    X_ADJ_MAX, X_ADJ_MIN,
};
use crate::utility::PlayUtility;

/// Denominator offset of the trajectory weights, in yards.
pub const WEIGHT_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMode {
    /// Resample trajectories from the training pool by distance similarity.
    Resample,
    /// Keep the observed defender's own trajectory at every location.
    Observed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GhostConfig {
    /// Trajectory samples per location.
    pub n_samples: usize,
    pub spacing: f64,
    /// Lattice half extent around the receiver along `x_adj`.
    pub half_width_x: f64,
    /// Lattice half extent around the receiver along `y_adj`.
    pub half_width_y: f64,
    pub mode: TrajectoryMode,
}

impl Default for GhostConfig {
    fn default() -> Self {
        GhostConfig {
            n_samples: 100,
            spacing: 1.0,
            half_width_x: 15.0,
            half_width_y: 15.0,
            mode: TrajectoryMode::Resample,
        }
    }
}

impl GhostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
        }
        if !(self.spacing > 0.0 && self.half_width_x >= 0.0 && self.half_width_y >= 0.0) {
            return Err(Error::InvalidConfig(
                "ghost grid spacing must be positive and half widths nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Candidate ghost locations and their probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhostGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Indexed like [`Grid::Lattice`]: `a * ys.len() + b`. Empty until filled.
    pub h: Vec<f64>,
}

impl GhostGrid {
    /// Lattice centred on `center`, clipped to the field.
    pub fn around(center: &PlayerState, config: &GhostConfig) -> Result<Self> {
        config.validate()?;
        let axis = |c: f64, half: f64, lo: f64, hi: f64| -> Vec<f64> {
            let k = (half / config.spacing + 1e-9).floor() as i64;
            (-k..=k)
                .map(|i| c + i as f64 * config.spacing)
                .filter(|v| (lo..=hi).contains(v))
                .collect()
        };
        let xs = axis(center.x_adj, config.half_width_x, X_ADJ_MIN, X_ADJ_MAX);
        let ys = axis(center.y_adj, config.half_width_y, -FIELD_CENTER_Y, FIELD_CENTER_Y);
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::InvalidConfig("ghost grid is empty after clipping".into()));
        }
        Ok(GhostGrid {
            xs,
            ys,
            h: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lattice(&self) -> Grid {
        Grid::Lattice {
            xs: self.xs.clone(),
            ys: self.ys.clone(),
        }
    }

    pub fn location(&self, i: usize) -> (f64, f64) {
        (self.xs[i / self.ys.len()], self.ys[i % self.ys.len()])
    }

    pub fn locations(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|i| self.location(i)).collect()
    }
}

/// Fills `grid.h` with the normalised location density of the ghost model.
pub fn ghost_location_density(forest2d: &Forest, features: &[f64], grid: &GhostGrid) -> Result<GhostGrid> {
    let d = forest2d.condition(features, None)?.on_grid(&grid.lattice())?.normalized()?;
    Ok(GhostGrid {
        xs: grid.xs.clone(),
        ys: grid.ys.clone(),
        h: d.values,
    })
}

/// Trajectories of the nearest defenders in the training plays, with each
/// defender's distance to the receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPool {
    pub trajectories: Vec<Trajectory>,
    pub distances: Vec<f64>,
}

impl TrajectoryPool {
    pub fn from_records(records: &[PlayRecord]) -> Self {
        let (trajectories, distances) = records
            .iter()
            .filter_map(|r| r.def1().map(|d| (d.trajectory(), d.distance_to(&r.receiver))))
            .unzip();
        TrajectoryPool {
            trajectories,
            distances,
        }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// `w_i = 1 / (|d_i - d_l| + eps)`, normalised to sum to one.
pub fn trajectory_weights(d_l: f64, distances: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = distances
        .iter()
        .map(|d| 1.0 / ((d - d_l).abs() + WEIGHT_EPSILON))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Draws `b` pool indices with replacement according to `weights`.
pub fn sample_trajectories(weights: &[f64], b: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::InsufficientData(format!("trajectory weights: {e}")))?;
    Ok((0..b).map(|_| dist.sample(rng)).collect())
}

/// The nearest defender of `record` moved to `location` with trajectory `v`.
pub fn ghost_state(record: &PlayRecord, location: (f64, f64), v: Trajectory) -> Result<PlayerState> {
    let def1 = record.def1().ok_or(Error::MissingRole(crate::tracking::Role::Def(1)))?;
    Ok(def1.relocated(location.0, location.1, v))
}

/// Everything needed to evaluate ghosts for a season.
pub struct GhostModels<'a> {
    pub yac: &'a Forest,
    pub yac_features: &'a FeatureSet,
    pub ghost: &'a Forest,
    pub ghost_features: &'a FeatureSet,
    pub utility: &'a dyn PlayUtility,
    pub pool: &'a TrajectoryPool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhostEvaluation {
    pub key: PlayKey,
    pub def1_id: Option<u64>,
    pub receiver: (f64, f64),
    pub epv_catch: f64,
    pub locations: Vec<(f64, f64)>,
    /// Location probabilities after exclusions, summing to one.
    pub h: Vec<f64>,
    /// `ghost_epv[l][b]`; one sample per location in observed mode.
    pub ghost_epv: Vec<Vec<f64>>,
    /// Pool indices behind `ghost_epv[l][b]`; empty in observed mode.
    pub samples: Vec<Vec<usize>>,
    pub mean_ghost_epv: Vec<f64>,
    /// `epv_catch - mean_ghost_epv[l]`.
    pub delta_bar: Vec<f64>,
    pub expected_delta: f64,
    /// Share of the pooled ghost-EPV distribution below the observed EPV,
    /// ties counted half.
    pub percentile: f64,
    pub excluded_locations: usize,
}

/// Evaluates `record` on the ghost lattice around its receiver.
pub fn expected_delta(
    models: &GhostModels,
    record: &PlayRecord,
    config: &GhostConfig,
    seed: u64,
) -> Result<GhostEvaluation> {
    let grid = GhostGrid::around(&record.receiver, config)?;
    let x = build_feature_vector(record, models.ghost_features)?;
    let grid = ghost_location_density(models.ghost, &x.values, &grid)?;
    evaluate_locations(models, record, &grid.locations(), &grid.h, config, seed)
}

/// [`expected_delta`] with every ghost keeping the observed trajectory.
pub fn observed_trajectory_delta(
    models: &GhostModels,
    record: &PlayRecord,
    config: &GhostConfig,
    seed: u64,
) -> Result<GhostEvaluation> {
    let config = GhostConfig {
        mode: TrajectoryMode::Observed,
        ..config.clone()
    };
    expected_delta(models, record, &config, seed)
}

/// Ghost evaluation over explicit locations with probabilities `h`. The
/// random stream of location `l` is derived from `(seed, game, play, l)`.
pub fn evaluate_locations(
    models: &GhostModels,
    record: &PlayRecord,
    locations: &[(f64, f64)],
    h: &[f64],
    config: &GhostConfig,
    seed: u64,
) -> Result<GhostEvaluation> {
    config.validate()?;
    if locations.len() != h.len() || locations.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: locations.len(),
            got: h.len(),
        });
    }
    let def1 = *record
        .def1()
        .ok_or(Error::MissingRole(crate::tracking::Role::Def(1)))?;
    if config.mode == TrajectoryMode::Resample && models.pool.is_empty() {
        return Err(Error::InsufficientData("empty trajectory pool".into()));
    }
    let evaluator = EpvEvaluator::new(models.yac, models.yac_features, record, models.utility, None)?;
    let epv_catch = evaluator.epv(None)?;
    let rec = record.receiver;

    let per_location: Vec<Result<(Vec<f64>, Vec<usize>)>> = locations
        .par_iter()
        .enumerate()
        .map(|(l, &(x, y))| -> Result<(Vec<f64>, Vec<usize>)> {
            match config.mode {
                TrajectoryMode::Observed => {
                    let ghost = def1.relocated(x, y, def1.trajectory());
                    let v = evaluator.epv(Some(&ghost))?;
                    Ok((vec![v], Vec::new()))
                }
                TrajectoryMode::Resample => {
                    let mut rng = rng::stream(seed, &[record.game_id, record.play_id, l as u64]);
                    let d_l = (x - rec.x_adj).hypot(y - rec.y_adj);
                    let w = trajectory_weights(d_l, &models.pool.distances);
                    let idx = sample_trajectories(&w, config.n_samples, &mut rng)?;
                    let epvs = idx
                        .iter()
                        .map(|&i| {
                            let ghost = def1.relocated(x, y, models.pool.trajectories[i]);
                            evaluator.epv(Some(&ghost))
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    Ok((epvs, idx))
                }
            }
        })
        .collect();

    let mut kept_locations = Vec::new();
    let mut kept_h = Vec::new();
    let mut ghost_epv = Vec::new();
    let mut samples = Vec::new();
    let mut excluded = 0;
    for ((loc, hv), res) in locations.iter().zip(h).zip(per_location) {
        match res {
            Ok((epvs, idx)) => {
                kept_locations.push(*loc);
                kept_h.push(*hv);
                ghost_epv.push(epvs);
                samples.push(idx);
            }
            Err(e) => {
                log::debug!("play {} location {loc:?} excluded: {e}", record.key());
                excluded += 1;
            }
        }
    }
    if excluded > 0 {
        log::warn!("play {}: {excluded} ghost locations excluded", record.key());
    }
    let total: f64 = kept_h.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NoSupport(format!(
            "no ghost location with positive probability for play {}",
            record.key()
        )));
    }
    let h: Vec<f64> = kept_h.iter().map(|v| v / total).collect();
    let mean_ghost_epv: Vec<f64> = ghost_epv
        .iter()
        .map(|e| e.iter().sum::<f64>() / e.len() as f64)
        .collect();
    let delta_bar: Vec<f64> = mean_ghost_epv.iter().map(|m| epv_catch - m).collect();
    let expected_delta = h.iter().zip(&delta_bar).map(|(p, d)| p * d).sum();
    let percentile = pooled_percentile(epv_catch, &h, &ghost_epv);
    if config.mode == TrajectoryMode::Observed {
        samples.clear();
    }

    Ok(GhostEvaluation {
        key: record.key(),
        def1_id: def1.player_id,
        receiver: (rec.x_adj, rec.y_adj),
        epv_catch,
        locations: kept_locations,
        h,
        ghost_epv,
        samples,
        mean_ghost_epv,
        delta_bar,
        expected_delta,
        percentile,
        excluded_locations: excluded,
    })
}

/// Weighted empirical CDF of the pooled ghost EPVs (location `l`'s samples
/// each carry `h[l] / B_l`) at `observed`, with ties counted half.
pub fn pooled_percentile(observed: f64, h: &[f64], ghost_epv: &[Vec<f64>]) -> f64 {
    let mut below = 0.0;
    let mut total = 0.0;
    for (p, epvs) in h.iter().zip(ghost_epv) {
        let w = p / epvs.len() as f64;
        for &v in epvs {
            total += w;
            if v < observed {
                below += w;
            } else if v == observed {
                below += 0.5 * w;
            }
        }
    }
    if total > 0.0 {
        (below / total).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// Per-location surface: `x_adj,y_adj,h,mean_ghost_epv,delta_bar`.
pub fn write_ghost_grid(path: &Path, e: &GhostEvaluation) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|err| Error::csv(path, err))?;
    w.write_record(["x_adj", "y_adj", "h", "mean_ghost_epv", "delta_bar"])
        .map_err(|err| Error::csv(path, err))?;
    for (i, (x, y)) in e.locations.iter().enumerate() {
        w.write_record([
            x.to_string(),
            y.to_string(),
            e.h[i].to_string(),
            e.mean_ghost_epv[i].to_string(),
            e.delta_bar[i].to_string(),
        ])
        .map_err(|err| Error::csv(path, err))?;
    }
    w.flush().map_err(|err| Error::io(path, err))
}

/// Pooled ghost EPVs: `x_adj,y_adj,sample,pool_index,ghost_epv,weight`.
pub fn write_ghost_samples(path: &Path, e: &GhostEvaluation) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|err| Error::csv(path, err))?;
    w.write_record(["x_adj", "y_adj", "sample", "pool_index", "ghost_epv", "weight"])
        .map_err(|err| Error::csv(path, err))?;
    for (l, (x, y)) in e.locations.iter().enumerate() {
        let weight = e.h[l] / e.ghost_epv[l].len() as f64;
        for (b, v) in e.ghost_epv[l].iter().enumerate() {
            let pool = e
                .samples
                .get(l)
                .and_then(|s| s.get(b))
                .map(|i| i.to_string())
                .unwrap_or_default();
            w.write_record([
                x.to_string(),
                y.to_string(),
                b.to_string(),
                pool,
                v.to_string(),
                weight.to_string(),
            ])
            .map_err(|err| Error::csv(path, err))?;
        }
    }
    w.flush().map_err(|err| Error::io(path, err))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhostSummary {
    pub game_id: u64,
    pub play_id: u64,
    pub def1_id: Option<u64>,
    pub epv_catch: f64,
    pub expected_delta: f64,
    pub percentile: f64,
    pub locations: usize,
    pub excluded_locations: usize,
}

impl From<&GhostEvaluation> for GhostSummary {
    fn from(e: &GhostEvaluation) -> Self {
        GhostSummary {
            game_id: e.key.game_id,
            play_id: e.key.play_id,
            def1_id: e.def1_id,
            epv_catch: e.epv_catch,
            expected_delta: e.expected_delta,
            percentile: e.percentile,
            locations: e.locations.len(),
            excluded_locations: e.excluded_locations,
        }
    }
}

pub fn write_summary(path: &Path, rows: &[GhostSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|err| Error::csv(path, err))?;
    if rows.is_empty() {
        w.write_record([
            "game_id",
            "play_id",
            "def1_id",
            "epv_catch",
            "expected_delta",
            "percentile",
            "locations",
            "excluded_locations",
        ])
        .map_err(|err| Error::csv(path, err))?;
    }
    for r in rows {
        w.serialize(r).map_err(|err| Error::csv(path, err))?;
    }
    w.flush().map_err(|err| Error::io(path, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_formula() {
        let w = trajectory_weights(3.0, &[2.0, 3.0, 5.0]);
        let raw = [1.0 / (1.0 + 1e-6), 1.0 / 1e-6, 1.0 / (2.0 + 1e-6)];
        let total: f64 = raw.iter().sum();
        for (a, b) in w.iter().zip(raw) {
            assert!((a - b / total).abs() < 1e-15);
        }
        assert!(w[1] > 0.99);
        let u = trajectory_weights(4.0, &[4.0; 5]);
        assert!(u.iter().all(|v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn degenerate_weights_pick_one_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_trajectories(&[0.0, 1.0, 0.0], 1, &mut rng).unwrap(), vec![1]);
        let a = sample_trajectories(&[0.2, 0.3, 0.5], 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_trajectories(&[0.2, 0.3, 0.5], 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lattice_around_receiver_is_clipped() {
        let rec = PlayerState {
            player_id: None,
            x_adj: 2.0,
            y_adj: 25.0,
            s: 0.0,
            dir: 0.0,
            o: 0.0,
        };
        let g = GhostGrid::around(&rec, &GhostConfig::default()).unwrap();
        assert_eq!(g.xs.first(), Some(&-10.0));
        assert_eq!(g.xs.last(), Some(&17.0));
        assert_eq!(g.ys.last(), Some(&26.0));
        assert_eq!(g.ys.first(), Some(&10.0));
        assert_eq!(g.location(1), (-10.0, 11.0));
        let small = GhostConfig {
            half_width_x: 10.0,
            half_width_y: 4.0,
            ..Default::default()
        };
        let mid = PlayerState { x_adj: 50.0, y_adj: 0.0, ..rec };
        assert_eq!(GhostGrid::around(&mid, &small).unwrap().len(), 21 * 9);
    }

    #[test]
    fn percentile_midpoint_ties() {
        assert_eq!(pooled_percentile(1.0, &[0.5, 0.5], &[vec![1.0], vec![1.0, 1.0]]), 0.5);
        assert_eq!(pooled_percentile(2.0, &[0.25, 0.75], &[vec![1.0], vec![3.0]]), 0.25);
    }
}
