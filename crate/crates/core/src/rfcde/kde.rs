//! Weighted Gaussian kernel density estimates driven by forest weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, Forest, Responses};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel `phi(u / h) / h`.
#[inline]
pub fn gaussian_kernel(u: f64, h: f64) -> f64 {
    let z = u / h;
    INV_SQRT_2PI * (-0.5 * z * z).exp() / h
}

/// Weighted rule-of-thumb bandwidth `1.06 * sd_w * n_eff^(-1/5)` with
/// `n_eff = (sum w)^2 / sum w^2`. Returns NaN for an empty or zero-weight
/// sample and 0 when the weighted sample has no spread.
pub fn plug_in_bandwidth(weights: &[f64], value: impl Fn(usize) -> f64) -> f64 {
    let sw: f64 = weights.iter().sum();
    if weights.is_empty() || sw <= 0.0 {
        return f64::NAN;
    }
    let sw2: f64 = weights.iter().map(|w| w * w).sum();
    let mean = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * value(i))
        .sum::<f64>()
        / sw;
    let var = weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let d = value(i) - mean;
            w * d * d
        })
        .sum::<f64>()
        / sw;
    let n_eff = sw * sw / sw2;
    1.06 * var.sqrt() * n_eff.powf(-0.2)
}

/// Evaluation grid: points on a line, or the Cartesian lattice `xs x ys`
/// (point `a * ys.len() + b` is `(xs[a], ys[b])`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Line(Vec<f64>),
    Lattice { xs: Vec<f64>, ys: Vec<f64> },
}

impl Grid {
    /// `n` evenly spaced points from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Self {
        if n == 1 {
            return Grid::Line(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        Grid::Line((0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Line(_) => 1,
            Grid::Lattice { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Line(p) => p.len(),
            Grid::Lattice { xs, ys } => xs.len() * ys.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of point `i`; the second entry is 0 on a line.
    pub fn point(&self, i: usize) -> [f64; 2] {
        match self {
            Grid::Line(p) => [p[i], 0.0],
            Grid::Lattice { xs, ys } => [xs[i / ys.len()], ys[i % ys.len()]],
        }
    }
}

/// Trapezoid quadrature weights for `grid` (outer product on a lattice).
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    fn trapezoid(p: &[f64]) -> Vec<f64> {
        let n = p.len();
        if n < 2 {
            return vec![0.0; n];
        }
        (0..n)
            .map(|i| {
                let lo = if i == 0 { p[0] } else { p[i - 1] };
                let hi = if i == n - 1 { p[n - 1] } else { p[i + 1] };
                if i == 0 {
                    (p[1] - p[0]) / 2.0
                } else if i == n - 1 {
                    (p[n - 1] - p[n - 2]) / 2.0
                } else {
                    (hi - lo) / 2.0
                }
            })
            .collect()
    }
    match grid {
        Grid::Line(p) => trapezoid(p),
        Grid::Lattice { xs, ys } => {
            let wx = trapezoid(xs);
            let wy = trapezoid(ys);
            wx.iter()
                .flat_map(|a| wy.iter().map(move |b| a * b))
                .collect()
        }
    }
}

/// Density values on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub bandwidth: Vec<f64>,
}

impl DensityGrid {
    /// Rescales values to sum to one over the grid points.
    pub fn normalized(mut self) -> Result<Self> {
        let total: f64 = self.values.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NoSupport(format!(
                "density has total mass {total} on the grid"
            )));
        }
        for v in &mut self.values {
            *v /= total;
        }
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// `sum_i p_i g_i / sum_i p_i`, truncated to the grid dimension.
pub fn density_mean(d: &DensityGrid) -> Vec<f64> {
    let total: f64 = d.values.iter().sum();
    let mut acc = [0.0; 2];
    for (i, v) in d.values.iter().enumerate() {
        let p = d.grid.point(i);
        acc[0] += v * p[0];
        acc[1] += v * p[1];
    }
    acc[..d.grid.dim()].iter().map(|a| a / total).collect()
}

/// Grid point of highest density (first one on ties).
pub fn density_mode(d: &DensityGrid) -> Vec<f64> {
    let mut best = 0;
    for (i, v) in d.values.iter().enumerate() {
        if *v > d.values[best] {
            best = i;
        }
    }
    d.grid.point(best)[..d.grid.dim()].to_vec()
}

/// A forest's conditional density for one query: nonzero weights of the
/// training rows and a per-dimension kernel bandwidth.
#[derive(Clone, Debug)]
pub struct ConditionalDensity<'a> {
    forest: &'a Forest,
    rows: Vec<u32>,
    weights: Vec<f64>,
    bandwidth: Vec<f64>,
}

impl<'a> ConditionalDensity<'a> {
    pub(super) fn new(
        forest: &'a Forest,
        rows: Vec<u32>,
        weights: Vec<f64>,
        bandwidth: Option<&[f64]>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::NoSupport("query has no weighted training rows".into()));
        }
        let dim = forest.response_dim();
        let bandwidth = match bandwidth {
            Some(h) => {
                if h.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: h.len(),
                    });
                }
                if h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidConfig(format!("bandwidth {h:?} must be positive")));
                }
                h.to_vec()
            }
            None => (0..dim)
                .map(|d| {
                    let y = forest.responses();
                    let h = plug_in_bandwidth(&weights, |k| y.row(rows[k] as usize)[d]);
                    if h.is_finite() && h > 0.0 {
                        h
                    } else {
                        forest.fallback_bandwidth()[d]
                    }
                })
                .collect(),
        };
        Ok(ConditionalDensity {
            forest,
            rows,
            weights,
            bandwidth,
        })
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    /// Training rows with nonzero weight and their weights.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows.iter().map(|&r| r as usize).zip(self.weights.iter().copied())
    }

    /// Density at a single response value.
    pub fn density_at(&self, point: &[f64]) -> Result<f64> {
        let dim = self.forest.response_dim();
        if point.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: point.len(),
            });
        }
        let y = self.forest.responses();
        Ok(self
            .support()
            .map(|(r, w)| {
                let yr = y.row(r);
                w * (0..dim)
                    .map(|d| gaussian_kernel(point[d] - yr[d], self.bandwidth[d]))
                    .product::<f64>()
            })
            .sum())
    }

    /// Unnormalised density on every grid point.
    pub fn on_grid(&self, grid: &Grid) -> Result<DensityGrid> {
        let dim = self.forest.response_dim();
        if grid.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: grid.dim(),
            });
        }
        let y = self.forest.responses();
        let mut values = vec![0.0; grid.len()];
        match grid {
            Grid::Line(points) => {
                let h = self.bandwidth[0];
                for (r, w) in self.support() {
                    let yr = y.row(r)[0];
                    for (v, g) in values.iter_mut().zip(points) {
                        *v += w * gaussian_kernel(g - yr, h);
                    }
                }
            }
            Grid::Lattice { xs, ys } => {
                let mut kx = vec![0.0; xs.len()];
                let mut ky = vec![0.0; ys.len()];
                for (r, w) in self.support() {
                    let yr = y.row(r);
                    for (k, x) in kx.iter_mut().zip(xs) {
                        *k = w * gaussian_kernel(x - yr[0], self.bandwidth[0]);
                    }
                    for (k, v) in ky.iter_mut().zip(ys) {
                        *k = gaussian_kernel(v - yr[1], self.bandwidth[1]);
                    }
                    for (a, ka) in kx.iter().enumerate() {
                        let row = &mut values[a * ys.len()..(a + 1) * ys.len()];
                        for (v, kb) in row.iter_mut().zip(&ky) {
                            *v += ka * kb;
                        }
                    }
                }
            }
        }
        Ok(DensityGrid {
            grid: grid.clone(),
            values,
            bandwidth: self.bandwidth.clone(),
        })
    }
}

/// Unnormalised conditional density of the response at `x` on `grid`.
pub fn predict_density(
    forest: &Forest,
    x: &[f64],
    grid: &Grid,
    bandwidth: Option<&[f64]>,
) -> Result<DensityGrid> {
    forest.condition(x, bandwidth)?.on_grid(grid)
}

/// Empirical CDE loss `mean_i [ int f_i^2 - 2 f_i(y_i) ]` with the integral
/// taken by trapezoid rule on `grid`. `eval(i)` returns the density of case
/// `i` on the grid and at its observed response.
pub fn empirical_cde_loss<F>(m: usize, grid: &Grid, eval: F) -> Result<f64>
where
    F: Fn(usize) -> Result<(Vec<f64>, f64)> + Sync,
{
    if m == 0 {
        return Err(Error::InsufficientData("no test cases for CDE loss".into()));
    }
    let q = quadrature_weights(grid);
    let terms: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (f, at_y) = eval(i)?;
            if f.len() != q.len() {
                return Err(Error::DimensionMismatch {
                    expected: q.len(),
                    got: f.len(),
                });
            }
            let sq: f64 = f.iter().zip(&q).map(|(v, w)| w * v * v).sum();
            Ok(sq - 2.0 * at_y)
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum::<f64>() / m as f64)
}

/// CDE loss of `forest` on held-out rows.
pub fn cde_loss(
    forest: &Forest,
    x: &FeatureMatrix,
    y: &Responses,
    grid: &Grid,
    bandwidth: Option<&[f64]>,
) -> Result<f64> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    empirical_cde_loss(x.rows(), grid, |i| {
        let c = forest.condition(x.row(i), bandwidth)?;
        Ok((c.on_grid(grid)?.values, c.density_at(y.row(i))?))
    })
}

#[cfg(test)]
mod tests {
    use super::super::{train, ForestConfig, Node, Tree};
    use super::*;

    fn one_leaf_forest(responses: Responses) -> Forest {
        let n = responses.len() as u32;
        let tree = Tree::from_nodes(
            vec![Node::Leaf {
                rows: (0..n).collect(),
            }],
            1,
            n as usize,
        )
        .unwrap();
        Forest::from_trees(ForestConfig::default(), 1, responses, vec![tree]).unwrap()
    }

    #[test]
    fn kernel_matches_closed_form() {
        let v = gaussian_kernel(0.5, 2.0);
        let oracle = (-(0.25f64 * 0.25) / 2.0).exp() / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((v - oracle).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_kde_oracle() {
        let ys = vec![-1.0, 0.5, 2.0, 2.5];
        let forest = one_leaf_forest(Responses::univariate(ys.clone()));
        let h = 0.7;
        let grid = Grid::linspace(-3.0, 4.0, 29);
        let d = predict_density(&forest, &[0.0], &grid, Some(&[h])).unwrap();
        let Grid::Line(points) = &grid else { unreachable!() };
        for (g, v) in points.iter().zip(&d.values) {
            let oracle: f64 = ys
                .iter()
                .map(|y| 0.25 * (-(g - y).powi(2) / (2.0 * h * h)).exp() / (h * (2.0 * std::f64::consts::PI).sqrt()))
                .sum();
            assert!((v - oracle).abs() <= 1e-12 * oracle.max(1e-300));
        }
    }

    #[test]
    fn two_dimensional_kde_oracle() {
        let ys = [(0.0, 0.0), (1.0, -1.0), (2.0, 3.0)];
        let forest = one_leaf_forest(Responses::bivariate(&ys));
        let h = [0.8, 1.3];
        let grid = Grid::Lattice {
            xs: vec![-1.0, 0.0, 0.5, 2.0],
            ys: vec![-2.0, 0.0, 1.0],
        };
        let d = predict_density(&forest, &[0.0], &grid, Some(&h)).unwrap();
        for i in 0..grid.len() {
            let [gx, gy] = grid.point(i);
            let oracle: f64 = ys
                .iter()
                .map(|(a, b)| {
                    let kx = (-(gx - a).powi(2) / (2.0 * h[0] * h[0])).exp() / (h[0] * (2.0 * std::f64::consts::PI).sqrt());
                    let ky = (-(gy - b).powi(2) / (2.0 * h[1] * h[1])).exp() / (h[1] * (2.0 * std::f64::consts::PI).sqrt());
                    kx * ky / 3.0
                })
                .sum();
            assert!((d.values[i] - oracle).abs() <= 1e-12 * oracle);
        }
        assert_eq!(grid.point(5), [0.0, 1.0]);
    }

    #[test]
    fn plug_in_bandwidth_oracle() {
        let w = [0.5, 0.25, 0.25];
        let v = [1.0, 2.0, 4.0];
        let h = plug_in_bandwidth(&w, |i| v[i]);
        // mean 2, var 0.5*1 + 0 + 0.25*4 = 1.5, n_eff = 1 / 0.375
        let oracle = 1.06 * 1.5f64.sqrt() * (1.0f64 / 0.375).powf(-0.2);
        assert!((h - oracle).abs() < 1e-14);
        assert_eq!(plug_in_bandwidth(&[1.0, 1.0], |_| 3.0), 0.0);
        assert!(plug_in_bandwidth(&[], |_| 0.0).is_nan());
    }

    #[test]
    fn degenerate_leaf_falls_back_to_global_bandwidth() {
        let split = Node::Split {
            feature: 0,
            threshold: 0.5,
            left: 1,
            right: 2,
        };
        let tree = Tree::from_nodes(
            vec![split, Node::Leaf { rows: vec![0, 1] }, Node::Leaf { rows: vec![2, 3] }],
            1,
            4,
        )
        .unwrap();
        let forest = Forest::from_trees(
            ForestConfig::default(),
            1,
            Responses::univariate(vec![1.0, 1.0, 5.0, 7.0]),
            vec![tree],
        )
        .unwrap();
        let c = forest.condition(&[0.0], None).unwrap();
        assert_eq!(c.bandwidth(), forest.fallback_bandwidth());
        assert!(c.bandwidth()[0] > 0.0);
    }

    #[test]
    fn normalization_mean_and_mode() {
        let grid = Grid::Line(vec![0.0, 1.0, 2.0, 3.0]);
        let d = DensityGrid {
            grid,
            values: vec![1.0, 3.0, 2.0, 2.0],
            bandwidth: vec![1.0],
        }
        .normalized()
        .unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-15);
        assert!((density_mean(&d)[0] - (3.0 + 4.0 + 6.0) / 8.0).abs() < 1e-15);
        assert_eq!(density_mode(&d), vec![1.0]);
        let zero = DensityGrid {
            grid: Grid::Line(vec![0.0]),
            values: vec![0.0],
            bandwidth: vec![1.0],
        };
        assert!(matches!(zero.normalized(), Err(Error::NoSupport(_))));
    }

    #[test]
    fn trapezoid_weights() {
        let q = quadrature_weights(&Grid::Line(vec![0.0, 1.0, 3.0]));
        assert_eq!(q, vec![0.5, 1.5, 1.0]);
        let q2 = quadrature_weights(&Grid::Lattice {
            xs: vec![0.0, 2.0],
            ys: vec![0.0, 1.0, 2.0],
        });
        assert_eq!(q2, vec![0.5, 1.0, 0.5, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn cde_loss_hand_example() {
        // uniform density 0.5 on [0, 2]: int f^2 = 0.5, f(y) = 0.5 -> -0.5
        let grid = Grid::linspace(0.0, 2.0, 5);
        let loss = empirical_cde_loss(3, &grid, |_| Ok((vec![0.5; 5], 0.5))).unwrap();
        assert!((loss + 0.5).abs() < 1e-15);
    }

    #[test]
    fn trained_forest_density_integrates_to_about_one() {
        let n = 300;
        let x: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let y: Vec<f64> = (0..n).map(|i| (i % 17) as f64 / 4.0).collect();
        let forest = train(
            &FeatureMatrix::from_rows(&x).unwrap(),
            &Responses::univariate(y),
            &ForestConfig {
                n_trees: 20,
                ..Default::default()
            },
        )
        .unwrap();
        let grid = Grid::linspace(-15.0, 20.0, 3501);
        let d = predict_density(&forest, &[0.3], &grid, None).unwrap();
        let q = quadrature_weights(&grid);
        let integral: f64 = d.values.iter().zip(&q).map(|(v, w)| v * w).sum();
        assert!((integral - 1.0).abs() < 1e-6);
    }
}
