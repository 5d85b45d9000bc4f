//! Hierarchical correlation block models.
//!
//! A model is a tree of blocks. Leaves are numbered depth-first, so every
//! block owns a contiguous range of variable indices. A leaf block of size
//! `n` carries one correlation shared by all its pairs; an internal block
//! carries the correlation between variables that sit in different children
//! (optionally overridden per pair of children). Correlations must strictly
//! increase from every block to its children.

mod benchmark;
mod matrix;

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

pub use benchmark::{
    benchmark_hierarchy, benchmark_hierarchy_with, two_block_hierarchy, BenchmarkParams,
};
pub use matrix::{
    correlation_to_distance, permute, CorrelationMatrix, DistanceMatrix, Permutation, PSD_TOLERANCE,
};

/// Declarative, serializable description of a block (the config file format).
///
/// A block is either a leaf (`size`) or an internal node (`children`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<BlockSpec>,
    /// Correlation within a leaf block, or between children of an internal one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Optional wider `[lo, hi]` range declared for this level; must contain
    /// every value the block actually uses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_range: Option<[f64; 2]>,
    /// Per-pair overrides of `rho` between children (by child position).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cross: Vec<CrossSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSpec {
    pub between: [usize; 2],
    pub rho: f64,
}

impl BlockSpec {
    pub fn leaf(size: usize, rho: f64) -> Self {
        Self {
            label: None,
            size: Some(size),
            children: Vec::new(),
            rho: Some(rho),
            rho_range: None,
            cross: Vec::new(),
        }
    }

    pub fn node(rho: f64, children: Vec<BlockSpec>) -> Self {
        Self {
            label: None,
            size: None,
            children,
            rho: Some(rho),
            rho_range: None,
            cross: Vec::new(),
        }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }
}

/// A validated block of the hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    label: String,
    leaves: Range<usize>,
    depth: usize,
    rho: Option<f64>,
    bounds: Option<(f64, f64)>,
    children: Vec<Block>,
    cross: Vec<(usize, usize, f64)>,
}

impl Block {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn leaves(&self) -> Range<usize> {
        self.leaves.clone()
    }

    pub fn size(&self) -> usize {
        self.leaves.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn children(&self) -> &[Block] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// `(rho_lo, rho_hi)` over the pairs this block is responsible for;
    /// `None` for a singleton leaf.
    pub fn rho_bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    /// Correlation between variables in children `a` and `b`.
    pub fn between(&self, a: usize, b: usize) -> f64 {
        let (a, b) = (a.min(b), a.max(b));
        self.cross
            .iter()
            .find(|(x, y, _)| *x == a && *y == b)
            .map(|c| c.2)
            .or(self.rho)
            .expect("validated block has a value for every pair of children")
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a Block>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

/// A validated hierarchical correlation block model over `N` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    root: Block,
    spec: BlockSpec,
    depth: usize,
}

impl Hierarchy {
    pub fn from_spec(spec: &BlockSpec) -> Result<Self> {
        let mut next_leaf = 0;
        let root = build_block(spec, "root".to_string(), 0, &mut next_leaf)?;
        check_nesting(&root)?;
        let depth = height(&root);
        Ok(Self {
            root,
            spec: spec.clone(),
            depth,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: BlockSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn spec(&self) -> &BlockSpec {
        &self.spec
    }

    pub fn root(&self) -> &Block {
        &self.root
    }

    pub fn n(&self) -> usize {
        self.root.size()
    }

    /// Number of nontrivial nested partitions `h` (0 for a single leaf block).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn blocks(&self) -> Vec<&Block> {
        let mut out = Vec::new();
        self.root.walk(&mut out);
        out
    }

    /// The ground-truth partition `P_k`, `0 <= k <= depth`. Leaf blocks that
    /// end above depth `k` are carried down unchanged.
    pub fn partition(&self, k: usize) -> Partition {
        let mut labels = vec![0; self.n()];
        let mut next = 0;
        assign_labels(&self.root, k, &mut labels, &mut next);
        Partition::from_labels(&labels)
    }

    /// All nontrivial levels `P_1 ..= P_h`.
    pub fn partitions(&self) -> Vec<Partition> {
        (1..=self.depth).map(|k| self.partition(k)).collect()
    }

    /// Deepest level `k` with `i` and `j` in the same cluster of `P_k`.
    pub fn pair_level(&self, i: usize, j: usize) -> usize {
        let mut block = &self.root;
        loop {
            if block.is_leaf() {
                return self.depth;
            }
            let ci = block.children.iter().find(|c| c.leaves.contains(&i));
            let cj = block.children.iter().find(|c| c.leaves.contains(&j));
            match (ci, cj) {
                (Some(a), Some(b)) if a.leaves == b.leaves => block = a,
                _ => return block.depth,
            }
        }
    }

    /// Correlation range `(rho_lo_k, rho_hi_k)` of the pairs whose deepest
    /// shared level is `k`, for `k = 0 ..= depth`; `None` when no pair sits there.
    pub fn level_bounds(&self) -> Vec<Option<(f64, f64)>> {
        let mut out = vec![None; self.depth + 1];
        for b in self.blocks() {
            let Some((lo, hi)) = b.bounds else { continue };
            let level = if b.is_leaf() { self.depth } else { b.depth };
            out[level] = Some(match out[level] {
                None => (lo, hi),
                Some((l, h)) => (f64::min(l, lo), f64::max(h, hi)),
            });
        }
        out
    }
}

fn height(b: &Block) -> usize {
    b.children.iter().map(|c| 1 + height(c)).max().unwrap_or(0)
}

fn assign_labels(b: &Block, k: usize, labels: &mut [usize], next: &mut usize) {
    if b.depth == k || b.is_leaf() {
        for i in b.leaves() {
            labels[i] = *next;
        }
        *next += 1;
        return;
    }
    for c in &b.children {
        assign_labels(c, k, labels, next);
    }
}

fn check_rho(value: f64, label: &str) -> Result<()> {
    if !(value > -1.0 && value < 1.0) {
        return Err(Error::InvalidHierarchy(format!(
            "block `{label}` has correlation {value} outside (-1, 1)"
        )));
    }
    Ok(())
}

fn build_block(
    spec: &BlockSpec,
    path: String,
    depth: usize,
    next_leaf: &mut usize,
) -> Result<Block> {
    let label = spec.label.clone().unwrap_or(path);
    if let Some(r) = spec.rho {
        check_rho(r, &label)?;
    }
    let start = *next_leaf;
    let (children, used) = match (spec.size, spec.children.is_empty()) {
        (Some(_), false) => {
            return Err(Error::InvalidHierarchy(format!(
                "block `{label}` has both a size and children"
            )))
        }
        (None, true) => {
            return Err(Error::InvalidHierarchy(format!(
                "block `{label}` has neither a size nor children"
            )))
        }
        (Some(0), true) => {
            return Err(Error::InvalidHierarchy(format!("block `{label}` is empty")));
        }
        (Some(size), true) => {
            if !spec.cross.is_empty() {
                return Err(Error::InvalidHierarchy(format!(
                    "leaf block `{label}` cannot have cross correlations"
                )));
            }
            *next_leaf += size;
            let used = if size >= 2 {
                vec![spec.rho.ok_or_else(|| {
                    Error::InvalidHierarchy(format!(
                        "leaf block `{label}` of size {size} needs `rho`"
                    ))
                })?]
            } else {
                Vec::new()
            };
            (Vec::new(), used)
        }
        (None, false) => {
            if spec.children.len() < 2 {
                return Err(Error::InvalidHierarchy(format!(
                    "block `{label}` must have at least two children"
                )));
            }
            let children = spec
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| build_block(c, format!("{label}.{i}"), depth + 1, next_leaf))
                .collect::<Result<Vec<_>>>()?;
            let m = children.len();
            let mut overridden = vec![false; m * m];
            for c in &spec.cross {
                let [a, b] = c.between;
                if a >= m || b >= m || a == b {
                    return Err(Error::InvalidHierarchy(format!(
                        "block `{label}` has an invalid cross pair [{a}, {b}]"
                    )));
                }
                check_rho(c.rho, &label)?;
                let (a, b) = (a.min(b), a.max(b));
                if std::mem::replace(&mut overridden[a * m + b], true) {
                    return Err(Error::InvalidHierarchy(format!(
                        "block `{label}` repeats cross pair [{a}, {b}]"
                    )));
                }
            }
            let mut used: Vec<f64> = spec.cross.iter().map(|c| c.rho).collect();
            let needs_default = (0..m).any(|a| (a + 1..m).any(|b| !overridden[a * m + b]));
            if needs_default {
                used.push(spec.rho.ok_or_else(|| {
                    Error::InvalidHierarchy(format!(
                        "block `{label}` needs `rho` for pairs of children without a cross value"
                    ))
                })?);
            }
            (children, used)
        }
    };

    let mut bounds = used.iter().fold(None, |acc: Option<(f64, f64)>, &v| {
        Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
    });
    if let Some([lo, hi]) = spec.rho_range {
        check_rho(lo, &label)?;
        check_rho(hi, &label)?;
        let contains = bounds.is_none_or(|(l, h)| lo <= l && h <= hi);
        if lo > hi || !contains {
            return Err(Error::InvalidHierarchy(format!(
                "block `{label}` declares rho_range [{lo}, {hi}] that does not contain its correlations"
            )));
        }
        if bounds.is_some() {
            bounds = Some((lo, hi));
        }
    }

    let cross = spec
        .cross
        .iter()
        .map(|c| {
            (
                c.between[0].min(c.between[1]),
                c.between[0].max(c.between[1]),
                c.rho,
            )
        })
        .collect();
    Ok(Block {
        label,
        leaves: start..*next_leaf,
        depth,
        rho: spec.rho,
        bounds,
        children,
        cross,
    })
}

fn check_nesting(b: &Block) -> Result<()> {
    for c in &b.children {
        if let (Some((_, parent_hi)), Some((child_lo, _))) = (b.bounds, c.bounds) {
            if parent_hi >= child_lo {
                return Err(Error::NestingViolation {
                    parent: b.label.clone(),
                    child: c.label.clone(),
                    parent_hi,
                    child_lo,
                });
            }
        }
        check_nesting(c)?;
    }
    Ok(())
}

/// Builds the model correlation matrix and validates it.
///
/// Entry `(i, j)` is the value of the deepest block holding both `i` and `j`.
pub fn build_correlation(h: &Hierarchy) -> Result<CorrelationMatrix> {
    let n = h.n();
    let mut m = DMatrix::zeros(n, n);
    fill(h.root(), &mut m);
    for i in 0..n {
        m[(i, i)] = 1.0;
    }
    CorrelationMatrix::new(m)
}

fn fill(b: &Block, m: &mut DMatrix<f64>) {
    if b.is_leaf() {
        if let Some(rho) = b.rho {
            for i in b.leaves() {
                for j in b.leaves() {
                    m[(i, j)] = rho;
                }
            }
        }
        return;
    }
    for (a, ca) in b.children.iter().enumerate() {
        for (c, cb) in b.children.iter().enumerate().skip(a + 1) {
            let rho = b.between(a, c);
            for i in ca.leaves() {
                for j in cb.leaves() {
                    m[(i, j)] = rho;
                    m[(j, i)] = rho;
                }
            }
        }
        fill(ca, m);
    }
}
