//! Agglomeration for linkages outside the Lance-Williams family: the
//! inter-cluster distance is recomputed from point distances after each merge.

use serde::{Deserialize, Serialize};

use super::dendrogram::{Dendrogram, Merge};
use super::lance_williams::{closest_pair, MergeUpdate};
use crate::model::DistanceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenericLinkage {
    Minimax,
    Hausdorff,
}

impl GenericLinkage {
    pub fn distance(self, d: &DistanceMatrix, a: &[usize], b: &[usize]) -> f64 {
        match self {
            GenericLinkage::Minimax => minimax(d, a, b),
            GenericLinkage::Hausdorff => hausdorff(d, a, b),
        }
    }
}

/// Smallest radius of a ball centered on a point of `a ∪ b` covering `a ∪ b`.
pub fn minimax(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> f64 {
    let union = || a.iter().chain(b);
    union()
        .map(|&c| union().map(|&x| d.get(x, c)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetrized Hausdorff distance between the two point sets.
pub fn hausdorff(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> f64 {
    let directed = |from: &[usize], to: &[usize]| {
        from.iter()
            .map(|&x| {
                to.iter()
                    .map(|&y| d.get(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

pub fn agglomerate_generic(d: &DistanceMatrix, linkage: GenericLinkage) -> Dendrogram {
    agglomerate_generic_observed(d, linkage, |_| {})
}

pub fn agglomerate_generic_observed<F>(
    d: &DistanceMatrix,
    linkage: GenericLinkage,
    mut observe: F,
) -> Dendrogram
where
    F: FnMut(&MergeUpdate),
{
    let n = d.dim();
    let mut dist: Vec<f64> = d.as_matrix().as_slice().to_vec();
    let mut node: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let (a, b, height) = closest_pair(&active, &dist, n, &node);
        let (i, j) = if node[a] < node[b] { (a, b) } else { (b, a) };
        let merged = n + step;
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        let d_ij = dist[i * n + j];
        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let value = linkage.distance(d, &members[i], &members[k]);
            observe(&MergeUpdate {
                step,
                left: node[i],
                right: node[j],
                merged,
                other: node[k],
                d_left: dist[i * n + k],
                d_right: dist[j * n + k],
                d_merge: d_ij,
                distance: value,
            });
            dist[i * n + k] = value;
            dist[k * n + i] = value;
        }
        merges.push(Merge {
            left: node[i],
            right: node[j],
            height,
            size: members[i].len(),
        });
        node[i] = merged;
        active.retain(|&s| s != j);
    }
    Dendrogram::from_trusted(n, merges)
}
