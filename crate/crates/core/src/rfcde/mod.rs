//! Random forests for conditional density estimation.
//!
//! Trees are grown on bootstrap samples. At each node a random subset of
//! features is searched for the split that minimises the conditional density
//! loss of a node-wise orthogonal-series estimate: responses are rescaled to
//! `[0, 1]` (per dimension), projected on a cosine basis (a tensor basis for
//! 2D responses) and the split maximising
//! `|S_left|^2 / n_left + |S_right|^2 / n_right` is kept, where `S` is the sum
//! of basis vectors over a child.
//!
//! Prediction follows the usual forest-weight construction: a training row's
//! weight for a query is its share of the query's leaf, averaged over trees.
//! Those weights drive a Gaussian kernel density estimate of the response.

mod basis;
mod io;
mod kde;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use io::{decode, encode, load_forest, save_forest, to_json, FOREST_MAGIC, FOREST_VERSION};
pub use kde::{
    cde_loss, density_mean, density_mode, empirical_cde_loss, gaussian_kernel, plug_in_bandwidth,
    predict_density, quadrature_weights, ConditionalDensity, DensityGrid, Grid,
};

/// Row-major dense feature matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Training responses, `n` rows of dimension 1 or 2, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Responses {
    dim: usize,
    values: Vec<f64>,
}

impl Responses {
    pub fn univariate(values: Vec<f64>) -> Self {
        Responses { dim: 1, values }
    }

    pub fn bivariate(pairs: &[(f64, f64)]) -> Self {
        Responses {
            dim: 2,
            values: pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(p))`.
    pub features_per_split: Option<usize>,
    pub min_leaf_size: usize,
    pub max_depth: Option<usize>,
    /// Basis functions per response dimension.
    pub n_basis: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            features_per_split: None,
            min_leaf_size: 5,
            max_depth: None,
            n_basis: 15,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    fn features_per_split_for(&self, p: usize) -> Result<usize> {
        let m = self
            .features_per_split
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize);
        if m == 0 || m > p {
            return Err(Error::InvalidConfig(format!(
                "features_per_split {m} must be in 1..={p}"
            )));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Distinct training rows falling in the leaf, ascending.
    Leaf { rows: Vec<u32> },
}

/// A fitted tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Builds a tree from explicit nodes, checking child links, thresholds
    /// and leaf contents.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize, n_rows: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ModelFormat("tree without nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let ok = (*feature as usize) < n_features
                        && threshold.is_finite()
                        && (*left as usize) > i
                        && (*right as usize) > i
                        && (*left as usize) < nodes.len()
                        && (*right as usize) < nodes.len();
                    if !ok {
                        return Err(Error::ModelFormat(format!("bad split node {i}")));
                    }
                }
                Node::Leaf { rows } => {
                    if rows.is_empty()
                        || rows.windows(2).any(|w| w[0] >= w[1])
                        || rows.iter().any(|&r| r as usize >= n_rows)
                    {
                        return Err(Error::ModelFormat(format!("bad leaf node {i}")));
                    }
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Rows of the leaf that `x` falls into.
    pub fn leaf_rows(&self, x: &[f64]) -> &[u32] {
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { rows } => return rows,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[u32]> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { rows } => Some(rows.as_slice()),
            Node::Split { .. } => None,
        })
    }
}

/// A trained forest together with the training responses its weights index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    config: ForestConfig,
    features_per_split: usize,
    n_features: usize,
    responses: Responses,
    /// Per-dimension `(min, max)` used to rescale responses for the basis.
    bounds: Vec<(f64, f64)>,
    /// Plug-in bandwidth of the full training sample; used when a query's
    /// weighted sample is degenerate.
    fallback_bandwidth: Vec<f64>,
    trees: Vec<Tree>,
}

/// Per-training-row forest weights for one query.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub w: Vec<f64>,
}

impl WeightVector {
    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }
}

struct Trainer<'a> {
    x: &'a FeatureMatrix,
    basis: Vec<f64>,
    basis_len: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    mtry: usize,
}

impl Trainer<'_> {
    fn basis_row(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.basis[i * self.basis_len..(i + 1) * self.basis_len]
    }

    fn grow(&self, rng: &mut impl Rng, sample: Vec<u32>) -> Tree {
        let mut nodes = vec![Node::Leaf { rows: Vec::new() }];
        let mut stack = vec![(0usize, sample, 0usize)];
        while let Some((id, rows, depth)) = stack.pop() {
            match self.best_split(rng, &rows, depth) {
                Some((feature, threshold)) => {
                    let (left, right): (Vec<u32>, Vec<u32>) = rows
                        .iter()
                        .partition(|&&r| self.x.get(r as usize, feature) <= threshold);
                    let l = nodes.len();
                    nodes.push(Node::Leaf { rows: Vec::new() });
                    nodes.push(Node::Leaf { rows: Vec::new() });
                    nodes[id] = Node::Split {
                        feature: feature as u32,
                        threshold,
                        left: l as u32,
                        right: l as u32 + 1,
                    };
                    stack.push((l + 1, right, depth + 1));
                    stack.push((l, left, depth + 1));
                }
                None => {
                    let mut rows = rows;
                    rows.sort_unstable();
                    rows.dedup();
                    nodes[id] = Node::Leaf { rows };
                }
            }
        }
        Tree { nodes }
    }

    fn best_split(&self, rng: &mut impl Rng, rows: &[u32], depth: usize) -> Option<(usize, f64)> {
        let n = rows.len();
        if self.max_depth.is_some_and(|m| depth >= m) || n < 2 * self.min_leaf {
            return None;
        }
        let k = self.basis_len;
        let mut total = vec![0.0; k];
        for &r in rows {
            for (t, b) in total.iter_mut().zip(self.basis_row(r)) {
                *t += b;
            }
        }
        let parent = total.iter().map(|t| t * t).sum::<f64>() / n as f64;

        let features = index::sample(rng, self.x.cols(), self.mtry);
        let mut order = rows.to_vec();
        let mut left = vec![0.0; k];
        let mut best: Option<(f64, usize, f64)> = None;
        for feature in features.iter() {
            let xv = |r: u32| self.x.get(r as usize, feature);
            order.sort_by(|&a, &b| xv(a).total_cmp(&xv(b)).then(a.cmp(&b)));
            left.fill(0.0);
            for pos in 0..n - 1 {
                for (l, b) in left.iter_mut().zip(self.basis_row(order[pos])) {
                    *l += b;
                }
                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < self.min_leaf {
                    continue;
                }
                if n_right < self.min_leaf {
                    break;
                }
                let (lo, hi) = (xv(order[pos]), xv(order[pos + 1]));
                if lo == hi {
                    continue;
                }
                let mut sl = 0.0;
                let mut sr = 0.0;
                for (l, t) in left.iter().zip(&total) {
                    sl += l * l;
                    let r = t - l;
                    sr += r * r;
                }
                let score = sl / n_left as f64 + sr / n_right as f64;
                if best.is_none_or(|b| score > b.0) {
                    best = Some((score, feature, split_point(lo, hi)));
                }
            }
        }
        let (score, feature, threshold) = best?;
        (score - parent > 1e-12 * parent.abs().max(1.0)).then_some((feature, threshold))
    }
}

/// A threshold `t` with `lo <= t < hi`.
fn split_point(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

/// Fits a forest. Deterministic given `config.seed`: tree `t` draws from
/// its own stream derived from `(seed, t)`, independent of thread count.
pub fn train(x: &FeatureMatrix, y: &Responses, config: &ForestConfig) -> Result<Forest> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if !(1..=2).contains(&y.dim()) {
        return Err(Error::InvalidConfig(format!(
            "response dimension {} not supported",
            y.dim()
        )));
    }
    if config.n_trees == 0 || config.n_basis == 0 || config.min_leaf_size == 0 {
        return Err(Error::InvalidConfig(
            "n_trees, n_basis and min_leaf_size must be positive".into(),
        ));
    }
    if n < 2 * config.min_leaf_size {
        return Err(Error::InsufficientData(format!(
            "{n} rows < 2 * min_leaf_size ({})",
            config.min_leaf_size
        )));
    }
    if x.cols() == 0 {
        return Err(Error::InvalidConfig("feature matrix has no columns".into()));
    }
    if x.data.iter().chain(&y.values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite training value".into()));
    }
    let mtry = config.features_per_split_for(x.cols())?;

    let dim = y.dim();
    let bounds: Vec<(f64, f64)> = (0..dim)
        .map(|d| {
            let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                let v = y.row(i)[d];
                (lo.min(v), hi.max(v))
            });
            if hi > lo {
                (lo, hi)
            } else {
                (lo, lo + 1.0)
            }
        })
        .collect();
    let basis_len = basis::basis_len(config.n_basis, dim);
    let mut basis_values = vec![0.0; n * basis_len];
    let mut u = vec![0.0; dim];
    for i in 0..n {
        for d in 0..dim {
            let (lo, hi) = bounds[d];
            u[d] = (y.row(i)[d] - lo) / (hi - lo);
        }
        basis::evaluate(&u, config.n_basis, &mut basis_values[i * basis_len..(i + 1) * basis_len]);
    }

    let trainer = Trainer {
        x,
        basis: basis_values,
        basis_len,
        min_leaf: config.min_leaf_size,
        max_depth: config.max_depth,
        mtry,
    };
    let trees: Vec<Tree> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(config.seed, &[t as u64]);
            let sample: Vec<u32> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            trainer.grow(&mut rng, sample)
        })
        .collect();

    let uniform = vec![1.0 / n as f64; n];
    let fallback_bandwidth = (0..dim)
        .map(|d| {
            let h = plug_in_bandwidth(&uniform, |i| y.row(i)[d]);
            if h.is_finite() && h > 0.0 {
                h
            } else {
                1.0
            }
        })
        .collect();

    Ok(Forest {
        config: config.clone(),
        features_per_split: mtry,
        n_features: x.cols(),
        responses: y.clone(),
        bounds,
        fallback_bandwidth,
        trees,
    })
}

impl Forest {
    /// Assembles a forest from explicit trees; bounds and the fallback
    /// bandwidth are recomputed from the responses.
    pub fn from_trees(
        config: ForestConfig,
        n_features: usize,
        responses: Responses,
        trees: Vec<Tree>,
    ) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidConfig("forest without trees".into()));
        }
        let n = responses.len();
        for t in &trees {
            Tree::from_nodes(t.nodes.clone(), n_features, n)?;
        }
        let dim = responses.dim();
        let bounds = (0..dim)
            .map(|d| {
                let vals = (0..n).map(|i| responses.row(i)[d]);
                let lo = vals.clone().fold(f64::INFINITY, f64::min);
                let hi = vals.fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    (lo, hi)
                } else {
                    (lo, lo + 1.0)
                }
            })
            .collect();
        let uniform = vec![1.0 / n as f64; n];
        let fallback_bandwidth = (0..dim)
            .map(|d| {
                let h = plug_in_bandwidth(&uniform, |i| responses.row(i)[d]);
                if h.is_finite() && h > 0.0 {
                    h
                } else {
                    1.0
                }
            })
            .collect();
        let mut config = config;
        config.n_trees = trees.len();
        Ok(Forest {
            features_per_split: config.features_per_split.unwrap_or(n_features).min(n_features).max(1),
            config,
            n_features,
            responses,
            bounds,
            fallback_bandwidth,
            trees,
        })
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn response_dim(&self) -> usize {
        self.responses.dim()
    }

    pub fn responses(&self) -> &Responses {
        &self.responses
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_train(&self) -> usize {
        self.responses.len()
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn accumulate(&self, x: &[f64], w: &mut [f64]) {
        for tree in &self.trees {
            let rows = tree.leaf_rows(x);
            let share = 1.0 / rows.len() as f64;
            for &r in rows {
                w[r as usize] += share;
            }
        }
        let scale = 1.0 / self.trees.len() as f64;
        for v in w.iter_mut() {
            *v *= scale;
        }
    }

    /// Forest weights of every training row for query `x`.
    pub fn leaf_weights(&self, x: &[f64]) -> Result<WeightVector> {
        self.check_query(x)?;
        let mut w = vec![0.0; self.n_train()];
        self.accumulate(x, &mut w);
        Ok(WeightVector { w })
    }

    /// Conditional density at `x`: the nonzero forest weights plus the
    /// kernel bandwidth (given, or the weighted plug-in rule).
    pub fn condition(&self, x: &[f64], bandwidth: Option<&[f64]>) -> Result<ConditionalDensity<'_>> {
        self.check_query(x)?;
        let mut dense = vec![0.0; self.n_train()];
        self.accumulate(x, &mut dense);
        let (rows, weights): (Vec<u32>, Vec<f64>) = dense
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (i as u32, w))
            .unzip();
        ConditionalDensity::new(self, rows, weights, bandwidth)
    }

    pub(crate) fn fallback_bandwidth(&self) -> &[f64] {
        &self.fallback_bandwidth
    }

    pub(crate) fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub(crate) fn features_per_split(&self) -> usize {
        self.features_per_split
    }

    pub(crate) fn from_raw_parts(
        config: ForestConfig,
        features_per_split: usize,
        n_features: usize,
        responses: Responses,
        bounds: Vec<(f64, f64)>,
        fallback_bandwidth: Vec<f64>,
        trees: Vec<Tree>,
    ) -> Self {
        Forest {
            config,
            features_per_split,
            n_features,
            responses,
            bounds,
            fallback_bandwidth,
            trees,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, p: usize, seed: u64) -> (FeatureMatrix, Responses) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>()).collect();
        let x = FeatureMatrix::new(n, p, data).unwrap();
        let y = (0..n)
            .map(|i| 3.0 * x.get(i, 0) + 0.3 * rng.random::<f64>())
            .collect();
        (x, Responses::univariate(y))
    }

    #[test]
    fn depth_zero_single_leaf() {
        let (x, y) = random_data(40, 3, 1);
        let config = ForestConfig {
            n_trees: 4,
            max_depth: Some(0),
            ..Default::default()
        };
        let forest = train(&x, &y, &config).unwrap();
        for tree in forest.trees() {
            assert_eq!(tree.nodes().len(), 1);
            assert_eq!(tree.depth(), 0);
        }
        let no_boot = ForestConfig {
            bootstrap: false,
            ..config
        };
        let forest = train(&x, &y, &no_boot).unwrap();
        let leaf: Vec<&[u32]> = forest.trees()[0].leaves().collect();
        assert_eq!(leaf[0], (0..40u32).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn uniform_weights_for_single_leaf() {
        let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let y = Responses::univariate(vec![0.0, 1.0, 2.0, 3.0]);
        let config = ForestConfig {
            n_trees: 1,
            max_depth: Some(0),
            bootstrap: false,
            min_leaf_size: 1,
            ..Default::default()
        };
        let forest = train(&x, &y, &config).unwrap();
        let w = forest.leaf_weights(&[1.5]).unwrap();
        assert_eq!(w.w, vec![0.25; 4]);
    }

    #[test]
    fn hand_built_weights() {
        // tree 1 leaves {0,1} | {2}; tree 2 leaves {0} | {1,2}
        let split = |thr: f64| Node::Split {
            feature: 0,
            threshold: thr,
            left: 1,
            right: 2,
        };
        let t1 = Tree::from_nodes(
            vec![split(0.5), Node::Leaf { rows: vec![0, 1] }, Node::Leaf { rows: vec![2] }],
            1,
            3,
        )
        .unwrap();
        let t2 = Tree::from_nodes(
            vec![split(0.2), Node::Leaf { rows: vec![0] }, Node::Leaf { rows: vec![1, 2] }],
            1,
            3,
        )
        .unwrap();
        let forest = Forest::from_trees(
            ForestConfig::default(),
            1,
            Responses::univariate(vec![0.0, 1.0, 2.0]),
            vec![t1, t2],
        )
        .unwrap();
        let w = forest.leaf_weights(&[0.3]).unwrap();
        assert_eq!(w.w, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn weights_sum_to_one_and_dimension_checked() {
        let (x, y) = random_data(200, 4, 2);
        let forest = train(
            &x,
            &y,
            &ForestConfig {
                n_trees: 30,
                ..Default::default()
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let q: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 1.4 - 0.2).collect();
            let w = forest.leaf_weights(&q).unwrap();
            assert!(w.w.iter().all(|&v| v >= 0.0));
            assert!((w.sum() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            forest.leaf_weights(&[0.0; 3]),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn every_bootstrap_row_in_exactly_one_leaf() {
        let (x, y) = random_data(120, 3, 3);
        let config = ForestConfig {
            n_trees: 5,
            seed: 11,
            ..Default::default()
        };
        let forest = train(&x, &y, &config).unwrap();
        for (t, tree) in forest.trees().iter().enumerate() {
            let mut rng = rng::stream(11, &[t as u64]);
            let mut sample: Vec<u32> = (0..120).map(|_| rng.random_range(0..120usize) as u32).collect();
            sample.sort_unstable();
            sample.dedup();
            let mut seen: Vec<u32> = tree.leaves().flatten().copied().collect();
            seen.sort_unstable();
            assert_eq!(seen, sample);
            for node in tree.nodes() {
                if let Node::Split { threshold, .. } = node {
                    assert!(threshold.is_finite());
                }
            }
        }
    }

    #[test]
    fn constant_features_give_stumps_and_small_n_errors() {
        let x = FeatureMatrix::new(30, 2, vec![1.0; 60]).unwrap();
        let y = Responses::univariate((0..30).map(|i| i as f64).collect());
        let forest = train(
            &x,
            &y,
            &ForestConfig {
                n_trees: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(forest.trees().iter().all(|t| t.depth() == 0));
        let small = FeatureMatrix::new(9, 2, vec![0.0; 18]).unwrap();
        let y9 = Responses::univariate(vec![0.0; 9]);
        assert!(matches!(
            train(&small, &y9, &ForestConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn deterministic_given_seed_across_thread_counts() {
        let (x, y) = random_data(150, 5, 4);
        let config = ForestConfig {
            n_trees: 16,
            seed: 77,
            ..Default::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| train(&x, &y, &config).unwrap());
        let b = four.install(|| train(&x, &y, &config).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn permuting_rows_permutes_weights() {
        let (x, y) = random_data(80, 3, 5);
        let config = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(3),
            seed: 3,
            ..Default::default()
        };
        let forest = train(&x, &y, &config).unwrap();
        // reverse order
        let perm: Vec<usize> = (0..80).rev().collect();
        let px: Vec<Vec<f64>> = perm.iter().map(|&i| x.row(i).to_vec()).collect();
        let py: Vec<f64> = perm.iter().map(|&i| y.row(i)[0]).collect();
        let permuted = train(
            &FeatureMatrix::from_rows(&px).unwrap(),
            &Responses::univariate(py),
            &config,
        )
        .unwrap();
        let q = [0.4, 0.6, 0.1];
        let w = forest.leaf_weights(&q).unwrap();
        let wp = permuted.leaf_weights(&q).unwrap();
        for (new_pos, &old) in perm.iter().enumerate() {
            assert_eq!(wp.w[new_pos], w.w[old]);
        }
    }

    #[test]
    fn split_point_is_strictly_between() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = split_point(lo, hi);
        assert!(lo <= t && t < hi);
        assert_eq!(split_point(0.0, 2.0), 1.0);
    }
}
