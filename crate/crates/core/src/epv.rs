//! Expected play value at the moment of catch.
//!
//! The yards-after-catch density is evaluated on a one-yard grid running from
//! a 10-yard loss to two yards past the goal line, normalised to a discrete
//! distribution and integrated against the play-value utility.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rfcde::{ConditionalDensity, DensityGrid, Forest, Grid};
use crate::tracking::{feature_values_into, FeatureSet, PlayRecord, PlayerState};
use crate::utility::{DownContext, PlayUtility, TOUCHDOWN_POINTS};

pub const YAC_MIN: f64 = -10.0;
/// Grid points past the goal line.
pub const YAC_PADDING: f64 = 2.0;

/// Integer yards-after-catch values for one catch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YacGrid {
    pub catch_x_adj: f64,
    pub yac: Vec<f64>,
    /// `true` where the receiver would end in the endzone (`yac >= catch_x_adj`).
    pub touchdown: Vec<bool>,
}

impl YacGrid {
    pub fn len(&self) -> usize {
        self.yac.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yac.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid::Line(self.yac.clone())
    }

    pub fn upper(&self) -> f64 {
        *self.yac.last().expect("grid is never empty")
    }

    pub fn ending_x_adj(&self, i: usize) -> f64 {
        self.catch_x_adj - self.yac[i]
    }
}

pub fn build_yac_grid(catch_x_adj: f64) -> Result<YacGrid> {
    if !(catch_x_adj > 0.0 && catch_x_adj.is_finite()) {
        return Err(Error::CatchInEndzone(catch_x_adj));
    }
    let hi = catch_x_adj.floor() as i64 + YAC_PADDING as i64;
    let yac: Vec<f64> = (YAC_MIN as i64..=hi).map(|v| v as f64).collect();
    let touchdown = yac.iter().map(|&y| y >= catch_x_adj).collect();
    Ok(YacGrid {
        catch_x_adj,
        yac,
        touchdown,
    })
}

/// Clamps an observed yards-after-catch value into the grid range of its
/// catch. Returns the value and whether it moved.
pub fn clamp_yac(yac: f64, catch_x_adj: f64) -> (f64, bool) {
    let hi = catch_x_adj.floor() + YAC_PADDING;
    let c = yac.clamp(YAC_MIN, hi);
    (c, c != yac)
}

/// `g` at every grid point; touchdown points take the touchdown value.
pub fn utility_values(grid: &YacGrid, ctx: &DownContext, utility: &dyn PlayUtility) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            if grid.touchdown[i] {
                TOUCHDOWN_POINTS
            } else {
                utility.g(grid.ending_x_adj(i), ctx)
            }
        })
        .collect()
}

/// Normalises `density` to sum to one and returns `sum_i p_i g_i`.
pub fn expected_value(density: &[f64], g: &[f64]) -> Result<f64> {
    if density.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            got: density.len(),
        });
    }
    let total: f64 = density.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NoSupport(format!("YAC density has total mass {total}")));
    }
    Ok(density.iter().zip(g).map(|(p, v)| (p / total) * v).sum())
}

/// Expected play value of a YAC density defined on `grid`.
pub fn epv_at_catch(
    density: &DensityGrid,
    grid: &YacGrid,
    ctx: &DownContext,
    utility: &dyn PlayUtility,
) -> Result<f64> {
    match &density.grid {
        Grid::Line(points) if points == &grid.yac => {}
        _ => {
            return Err(Error::InvalidConfig(
                "density is not defined on the YAC grid".into(),
            ))
        }
    }
    expected_value(&density.values, &utility_values(grid, ctx, utility))
}

/// Evaluates EPV for `record` with an optional stand-in for the nearest
/// defender, reusing the caller's grid, utility values and feature buffer.
pub struct EpvEvaluator<'a> {
    pub forest: &'a Forest,
    pub features: &'a FeatureSet,
    pub bandwidth: Option<&'a [f64]>,
    record: &'a PlayRecord,
    grid: YacGrid,
    line: Grid,
    g: Vec<f64>,
}

impl<'a> EpvEvaluator<'a> {
    pub fn new(
        forest: &'a Forest,
        features: &'a FeatureSet,
        record: &'a PlayRecord,
        utility: &dyn PlayUtility,
        bandwidth: Option<&'a [f64]>,
    ) -> Result<Self> {
        let grid = build_yac_grid(record.catch_x_adj())?;
        let g = utility_values(&grid, &record.down_context(), utility);
        Ok(EpvEvaluator {
            forest,
            features,
            bandwidth,
            record,
            line: grid.grid(),
            grid,
            g,
        })
    }

    pub fn grid(&self) -> &YacGrid {
        &self.grid
    }

    pub fn utility_values(&self) -> &[f64] {
        &self.g
    }

    pub fn conditional(&self, def1: Option<&PlayerState>) -> Result<ConditionalDensity<'a>> {
        let mut x = Vec::with_capacity(self.features.len());
        feature_values_into(self.record, self.features, def1, &mut x)?;
        self.forest.condition(&x, self.bandwidth)
    }

    pub fn density(&self, def1: Option<&PlayerState>) -> Result<DensityGrid> {
        self.conditional(def1)?.on_grid(&self.line)
    }

    /// EPV with `def1` standing in for the observed nearest defender.
    pub fn epv(&self, def1: Option<&PlayerState>) -> Result<f64> {
        expected_value(&self.density(def1)?.values, &self.g)
    }
}

/// Observed EPV of one play.
pub fn play_epv(
    forest: &Forest,
    features: &FeatureSet,
    record: &PlayRecord,
    utility: &dyn PlayUtility,
) -> Result<f64> {
    EpvEvaluator::new(forest, features, record, utility, None)?.epv(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpvRecord {
    pub game_id: u64,
    pub play_id: u64,
    pub catch_x_adj: f64,
    pub epv_catch: f64,
}

pub fn write_epv_records(path: &Path, rows: &[EpvRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::ParametricEp;

    struct Fixed(Vec<f64>);

    impl PlayUtility for Fixed {
        fn expected_points(&self, _down: u8, _ytg: f64, yardline: f64) -> f64 {
            self.0[yardline as usize]
        }
    }

    #[test]
    fn grid_examples() {
        let g = build_yac_grid(30.0).unwrap();
        assert_eq!(g.yac.first(), Some(&-10.0));
        assert_eq!(g.upper(), 32.0);
        assert_eq!(g.len(), 43);
        let td: Vec<f64> = g.yac.iter().zip(&g.touchdown).filter(|(_, t)| **t).map(|(y, _)| *y).collect();
        assert_eq!(td, vec![30.0, 31.0, 32.0]);
        let g1 = build_yac_grid(1.0).unwrap();
        assert_eq!((g1.yac[0], g1.upper()), (-10.0, 3.0));
        let g2 = build_yac_grid(71.87).unwrap();
        assert_eq!((g2.yac[0], g2.upper(), g2.len()), (-10.0, 73.0, 84));
        assert!(matches!(build_yac_grid(0.0), Err(Error::CatchInEndzone(_))));
        assert!(matches!(build_yac_grid(-3.0), Err(Error::CatchInEndzone(_))));
    }

    #[test]
    fn point_mass_at_goal_line_is_touchdown() {
        let grid = build_yac_grid(30.0).unwrap();
        let mut values = vec![0.0; grid.len()];
        let i = grid.yac.iter().position(|&y| y == 30.0).unwrap();
        values[i] = 2.5;
        let density = DensityGrid {
            grid: grid.grid(),
            values,
            bandwidth: vec![1.0],
        };
        let ctx = DownContext {
            down: 1,
            yards_to_go: 10.0,
            los_x_adj: 40.0,
        };
        let epv = epv_at_catch(&density, &grid, &ctx, &ParametricEp::default()).unwrap();
        assert_eq!(epv, 7.0);
    }

    #[test]
    fn uniform_three_points() {
        assert_eq!(expected_value(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert!(matches!(
            expected_value(&[0.0, 0.0], &[1.0, 2.0]),
            Err(Error::NoSupport(_))
        ));
    }

    #[test]
    fn utility_values_use_ending_spot() {
        let table: Vec<f64> = (0..100).map(|v| v as f64 / 100.0).collect();
        let grid = build_yac_grid(5.5).unwrap();
        let ctx = DownContext {
            down: 1,
            yards_to_go: 10.0,
            los_x_adj: 20.0,
        };
        let g = utility_values(&grid, &ctx, &Fixed(table));
        // yac = 0 ends at 5.5: first down, yardline 5.5 -> floor index 5
        let i = grid.yac.iter().position(|&y| y == 0.0).unwrap();
        assert_eq!(g[i], 0.05);
        assert_eq!(*g.last().unwrap(), 7.0);
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_yac(-14.0, 30.0), (-10.0, true));
        assert_eq!(clamp_yac(40.0, 30.5), (32.0, true));
        assert_eq!(clamp_yac(3.0, 30.0), (3.0, false));
    }
}
