//! Stored-matrix agglomeration driven by the Lance-Williams recurrence
//!
//! `D(Ci ∪ Cj, Ck) = a_i D_ik + a_j D_jk + b D_ij + g |D_ik - D_jk|`
//!
//! O(N^3) time, O(N^2) memory. At every step the closest pair of active
//! clusters is merged; exact ties go to the lexicographically smallest
//! `(smaller node id, larger node id)`.

use serde::{Deserialize, Serialize};

use super::dendrogram::{Dendrogram, Merge};
use crate::model::DistanceMatrix;

/// Evaluated recurrence coefficients for one update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanceWilliamsParams {
    pub alpha_i: f64,
    pub alpha_j: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LanceWilliamsParams {
    pub fn update(&self, d_ik: f64, d_jk: f64, d_ij: f64) -> f64 {
        self.alpha_i * d_ik
            + self.alpha_j * d_jk
            + self.beta * d_ij
            + self.gamma * (d_ik - d_jk).abs()
    }
}

/// A member of the Lance-Williams family: coefficients as a function of the
/// sizes of the two merged clusters and of the third cluster.
pub trait LanceWilliams {
    fn coefficients(&self, size_i: usize, size_j: usize, size_k: usize) -> LanceWilliamsParams;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Single,
    Complete,
    /// UPGMA
    Average,
    /// WPGMA
    McQuitty,
    /// WPGMC
    Median,
    /// UPGMC
    Centroid,
    Ward,
}

impl Linkage {
    pub const ALL: [Linkage; 7] = [
        Linkage::Single,
        Linkage::Complete,
        Linkage::Average,
        Linkage::McQuitty,
        Linkage::Median,
        Linkage::Centroid,
        Linkage::Ward,
    ];

    /// Whether merge heights are guaranteed non-decreasing.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Linkage::Median | Linkage::Centroid)
    }

    /// Updated distances stay within `[min(D_ik, D_jk), max(D_ik, D_jk)]`.
    pub fn is_space_conserving(self) -> bool {
        matches!(
            self,
            Linkage::Single | Linkage::Complete | Linkage::Average | Linkage::McQuitty
        )
    }
}

impl LanceWilliams for Linkage {
    fn coefficients(&self, size_i: usize, size_j: usize, size_k: usize) -> LanceWilliamsParams {
        let (ni, nj, nk) = (size_i as f64, size_j as f64, size_k as f64);
        let (alpha_i, alpha_j, beta, gamma) = match self {
            Linkage::Single => (0.5, 0.5, 0.0, -0.5),
            Linkage::Complete => (0.5, 0.5, 0.0, 0.5),
            Linkage::Average => (ni / (ni + nj), nj / (ni + nj), 0.0, 0.0),
            Linkage::McQuitty => (0.5, 0.5, 0.0, 0.0),
            Linkage::Median => (0.5, 0.5, -0.25, 0.0),
            Linkage::Centroid => {
                let s = ni + nj;
                (ni / s, nj / s, -(ni * nj) / (s * s), 0.0)
            }
            Linkage::Ward => {
                let s = ni + nj + nk;
                ((ni + nk) / s, (nj + nk) / s, -nk / s, 0.0)
            }
        };
        LanceWilliamsParams {
            alpha_i,
            alpha_j,
            beta,
            gamma,
        }
    }
}

/// Reported for every inter-cluster distance recomputed after a merge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeUpdate {
    pub step: usize,
    /// Node ids of the merged clusters (`left < right`) and of the new one.
    pub left: usize,
    pub right: usize,
    pub merged: usize,
    pub other: usize,
    pub d_left: f64,
    pub d_right: f64,
    pub d_merge: f64,
    pub distance: f64,
}

/// Closest active pair under the tie-breaking rule, as slot indices.
pub(super) fn closest_pair(
    active: &[usize],
    dist: &[f64],
    n: usize,
    node: &[usize],
) -> (usize, usize, f64) {
    let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
    let mut slots = (active[0], active[1]);
    for (pos, &a) in active.iter().enumerate() {
        let row = &dist[a * n..(a + 1) * n];
        for &b in &active[pos + 1..] {
            let v = row[b];
            if v > best.0 {
                continue;
            }
            let (lo, hi) = if node[a] < node[b] {
                (node[a], node[b])
            } else {
                (node[b], node[a])
            };
            if v < best.0 || (lo, hi) < (best.1, best.2) {
                best = (v, lo, hi);
                slots = (a, b);
            }
        }
    }
    (slots.0, slots.1, best.0)
}

pub fn agglomerate_lw<L: LanceWilliams + ?Sized>(d: &DistanceMatrix, params: &L) -> Dendrogram {
    agglomerate_lw_observed(d, params, |_| {})
}

/// [`agglomerate_lw`], calling `observe` for every recomputed distance.
pub fn agglomerate_lw_observed<L, F>(d: &DistanceMatrix, params: &L, mut observe: F) -> Dendrogram
where
    L: LanceWilliams + ?Sized,
    F: FnMut(&MergeUpdate),
{
    let n = d.dim();
    // symmetric, so the column-major buffer is also row-major
    let mut dist: Vec<f64> = d.as_matrix().as_slice().to_vec();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let (a, b, height) = closest_pair(&active, &dist, n, &node);
        // slot `i` holds the smaller node id
        let (i, j) = if node[a] < node[b] { (a, b) } else { (b, a) };
        let merged = n + step;
        let d_ij = dist[i * n + j];
        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let (d_ik, d_jk) = (dist[i * n + k], dist[j * n + k]);
            let value = params
                .coefficients(size[i], size[j], size[k])
                .update(d_ik, d_jk, d_ij);
            observe(&MergeUpdate {
                step,
                left: node[i],
                right: node[j],
                merged,
                other: node[k],
                d_left: d_ik,
                d_right: d_jk,
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
            size: size[i] + size[j],
        });
        // the merged cluster lives on in slot `i`
        size[i] += size[j];
        node[i] = merged;
        active.retain(|&s| s != j);
    }
    Dendrogram::from_trusted(n, merges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn three_points() -> DistanceMatrix {
        DistanceMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[0., 1., 2., 1., 0., 3., 2., 3., 0.],
        ))
        .unwrap()
    }

    #[test]
    fn single_and_complete_on_three_points() {
        let single = agglomerate_lw(&three_points(), &Linkage::Single);
        assert_eq!(
            single.merges(),
            &[
                Merge {
                    left: 0,
                    right: 1,
                    height: 1.0,
                    size: 2
                },
                Merge {
                    left: 2,
                    right: 3,
                    height: 2.0,
                    size: 3
                },
            ]
        );
        let complete = agglomerate_lw(&three_points(), &Linkage::Complete);
        assert_eq!(complete.heights(), vec![1.0, 3.0]);
    }

    #[test]
    fn ties_go_to_smallest_pair() {
        let d = DistanceMatrix::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                0., 1., 1., 1., 1., 0., 1., 1., 1., 1., 0., 1., 1., 1., 1., 0.,
            ],
        ))
        .unwrap();
        let dend = agglomerate_lw(&d, &Linkage::Average);
        let pairs: Vec<_> = dend.merges().iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn trivial_sizes() {
        let one = DistanceMatrix::new(DMatrix::zeros(1, 1)).unwrap();
        assert!(agglomerate_lw(&one, &Linkage::Ward).merges().is_empty());
        let two = DistanceMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 0.4, 0.4, 0.])).unwrap();
        assert_eq!(agglomerate_lw(&two, &Linkage::Ward).heights(), vec![0.4]);
    }

    #[test]
    fn coefficient_table() {
        let w = Linkage::Ward.coefficients(2, 3, 5);
        assert_eq!(
            (w.alpha_i, w.alpha_j, w.beta, w.gamma),
            (0.7, 0.8, -0.5, 0.0)
        );
        let c = Linkage::Centroid.coefficients(1, 3, 9);
        assert_eq!((c.alpha_i, c.alpha_j, c.beta), (0.25, 0.75, -3.0 / 16.0));
        let a = Linkage::Average.coefficients(1, 3, 9);
        assert_eq!((a.alpha_i, a.alpha_j), (0.25, 0.75));
    }
}
