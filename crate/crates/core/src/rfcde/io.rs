//! Binary model files and JSON export.
//!
//! Layout (all integers and floats little-endian, floats as IEEE bit
//! patterns so a round trip is bit-identical):
//!
//! ```text
//! magic "GHRFCDE\0" | version u32
//! config: n_trees u64, features_per_split opt-u64, min_leaf_size u64,
//!         max_depth opt-u64, n_basis u64, bootstrap u8, seed u64
//! features_per_split u64 | n_features u64 | dim u64 | n u64
//! responses f64 x (n * dim) | bounds (f64, f64) x dim | bandwidth f64 x dim
//! tree count u64, then per tree: node count u64 and nodes
//!   split: 0u8, feature u32, threshold f64, left u32, right u32
//!   leaf:  1u8, len u32, rows u32 x len
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Forest, ForestConfig, Node, Responses, Tree};
use crate::error::{Error, Result};

pub const FOREST_MAGIC: &[u8; 8] = b"GHRFCDE\0";
pub const FOREST_VERSION: u32 = 1;

struct Encoder(Vec<u8>);

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn opt(&mut self, v: Option<usize>) {
        match v {
            Some(v) => {
                self.u8(1);
                self.usize(v);
            }
            None => {
                self.u8(0);
                self.u64(0);
            }
        }
    }
}

struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Decoder<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFormat("truncated model file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::ModelFormat("length overflow".into()))
    }
    fn len(&mut self, unit: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(unit) > self.buf.len() - self.pos {
            return Err(Error::ModelFormat("length exceeds file size".into()));
        }
        Ok(n)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn opt(&mut self) -> Result<Option<usize>> {
        let flag = self.u8()?;
        let v = self.usize()?;
        match flag {
            0 => Ok(None),
            1 => Ok(Some(v)),
            f => Err(Error::ModelFormat(format!("bad option flag {f}"))),
        }
    }
}

/// Serialises a forest to bytes.
pub fn encode(forest: &Forest) -> Vec<u8> {
    let mut e = Encoder(Vec::new());
    e.0.extend_from_slice(FOREST_MAGIC);
    e.u32(FOREST_VERSION);
    let c = forest.config();
    e.usize(c.n_trees);
    e.opt(c.features_per_split);
    e.usize(c.min_leaf_size);
    e.opt(c.max_depth);
    e.usize(c.n_basis);
    e.u8(c.bootstrap as u8);
    e.u64(c.seed);
    e.usize(forest.features_per_split());
    e.usize(forest.n_features());
    let y = forest.responses();
    e.usize(y.dim());
    e.usize(y.len());
    for v in &y.values {
        e.f64(*v);
    }
    for (lo, hi) in forest.bounds() {
        e.f64(*lo);
        e.f64(*hi);
    }
    for h in forest.fallback_bandwidth() {
        e.f64(*h);
    }
    e.usize(forest.trees().len());
    for tree in forest.trees() {
        e.usize(tree.nodes().len());
        for node in tree.nodes() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    e.u8(0);
                    e.u32(*feature);
                    e.f64(*threshold);
                    e.u32(*left);
                    e.u32(*right);
                }
                Node::Leaf { rows } => {
                    e.u8(1);
                    e.u32(rows.len() as u32);
                    for r in rows {
                        e.u32(*r);
                    }
                }
            }
        }
    }
    e.0
}

/// Parses bytes produced by [`encode`].
pub fn decode(buf: &[u8]) -> Result<Forest> {
    let mut d = Decoder { buf, pos: 0 };
    if d.take(8)? != FOREST_MAGIC {
        return Err(Error::ModelFormat("not a forest model file".into()));
    }
    let version = d.u32()?;
    if version != FOREST_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported model version {version}"
        )));
    }
    let config = ForestConfig {
        n_trees: d.usize()?,
        features_per_split: d.opt()?,
        min_leaf_size: d.usize()?,
        max_depth: d.opt()?,
        n_basis: d.usize()?,
        bootstrap: match d.u8()? {
            0 => false,
            1 => true,
            b => return Err(Error::ModelFormat(format!("bad bool {b}"))),
        },
        seed: d.u64()?,
    };
    let features_per_split = d.usize()?;
    let n_features = d.usize()?;
    let dim = d.usize()?;
    if !(1..=2).contains(&dim) {
        return Err(Error::ModelFormat(format!("bad response dimension {dim}")));
    }
    let n = d.len(8 * dim)?;
    let values = (0..n * dim).map(|_| d.f64()).collect::<Result<Vec<_>>>()?;
    let bounds = (0..dim)
        .map(|_| Ok((d.f64()?, d.f64()?)))
        .collect::<Result<Vec<_>>>()?;
    let bandwidth = (0..dim).map(|_| d.f64()).collect::<Result<Vec<_>>>()?;
    let n_trees = d.len(9)?;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let n_nodes = d.len(5)?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            nodes.push(match d.u8()? {
                0 => Node::Split {
                    feature: d.u32()?,
                    threshold: d.f64()?,
                    left: d.u32()?,
                    right: d.u32()?,
                },
                1 => {
                    let len = d.u32()? as usize;
                    let rows = (0..len).map(|_| d.u32()).collect::<Result<Vec<_>>>()?;
                    Node::Leaf { rows }
                }
                t => return Err(Error::ModelFormat(format!("bad node tag {t}"))),
            });
        }
        trees.push(Tree::from_nodes(nodes, n_features, n)?);
    }
    if d.pos != buf.len() {
        return Err(Error::ModelFormat("trailing bytes in model file".into()));
    }
    if trees.is_empty() {
        return Err(Error::ModelFormat("model has no trees".into()));
    }
    Ok(Forest::from_raw_parts(
        config,
        features_per_split,
        n_features,
        Responses { dim, values },
        bounds,
        bandwidth,
        trees,
    ))
}

pub fn save_forest(forest: &Forest, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode(forest))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_forest(path: &Path) -> Result<Forest> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    decode(&buf)
}

/// Human-readable JSON dump of the whole model.
pub fn to_json(forest: &Forest) -> Result<String> {
    Ok(serde_json::to_string_pretty(forest)?)
}

#[cfg(test)]
mod tests {
    use super::super::{train, FeatureMatrix};
    use super::*;

    fn small_forest(dim: usize) -> Forest {
        let n = 60;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), i as f64])
            .collect();
        let y = if dim == 1 {
            Responses::univariate((0..n).map(|i| (i as f64).sqrt()).collect())
        } else {
            Responses::bivariate(
                &(0..n)
                    .map(|i| ((i as f64).sqrt(), (i as f64 * 0.3).sin()))
                    .collect::<Vec<_>>(),
            )
        };
        train(
            &FeatureMatrix::from_rows(&x).unwrap(),
            &y,
            &ForestConfig {
                n_trees: 6,
                n_basis: 5,
                max_depth: Some(6),
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_bit_identical() {
        for dim in [1, 2] {
            let forest = small_forest(dim);
            let bytes = encode(&forest);
            let back = decode(&bytes).unwrap();
            assert_eq!(back, forest);
            assert_eq!(encode(&back), bytes);
            let q = [0.2, -0.4, 17.0];
            assert_eq!(
                forest.leaf_weights(&q).unwrap(),
                back.leaf_weights(&q).unwrap()
            );
        }
    }

    #[test]
    fn file_round_trip_and_json() {
        let forest = small_forest(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.rfcde");
        save_forest(&forest, &path).unwrap();
        assert_eq!(load_forest(&path).unwrap(), forest);
        let json = to_json(&forest).unwrap();
        let parsed: Forest = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, forest);
    }

    #[test]
    fn corrupt_files_rejected() {
        let bytes = encode(&small_forest(1));
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::ModelFormat(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::ModelFormat(_))));
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(decode(&v2), Err(Error::ModelFormat(_))));
        let mut extra = bytes;
        extra.push(0);
        assert!(matches!(decode(&extra), Err(Error::ModelFormat(_))));
    }
}
