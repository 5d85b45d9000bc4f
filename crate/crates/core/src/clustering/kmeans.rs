//! k-means over a distance matrix with one-step farthest-point initialization.
//!
//! Points have no coordinates, so the update step moves each center to the
//! cluster medoid.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::DistanceMatrix;
use crate::partition::Partition;
use crate::sampler::rng_from_seed;

pub const KMEANS_MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub partition: Partition,
    /// Final center of each cluster, in cluster-label order.
    pub medoids: Vec<usize>,
    pub iterations: usize,
    /// `false` when the iteration cap was hit before assignments settled.
    pub converged: bool,
}

/// First center drawn from `seed`, then repeatedly the point farthest from
/// the centers chosen so far (ties to the lowest index).
pub fn farthest_point_centers(d: &DistanceMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = d.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let mut rng = rng_from_seed(seed);
    let first = rng.random_range(0..n);
    let mut centers = vec![first];
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut nearest: Vec<f64> = (0..n).map(|i| d.get(i, first)).collect();
    while centers.len() < k {
        let mut best: Option<usize> = None;
        for i in (0..n).filter(|&i| !chosen[i]) {
            if best.is_none_or(|b| nearest[i] > nearest[b]) {
                best = Some(i);
            }
        }
        let c = best.expect("k <= n leaves an unchosen point");
        chosen[c] = true;
        centers.push(c);
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(d.get(i, c));
        }
    }
    Ok(centers)
}

pub fn kmeans_fp(d: &DistanceMatrix, k: usize, seed: u64) -> Result<KMeansResult> {
    let n = d.dim();
    let mut centers = farthest_point_centers(d, k, seed)?;
    let mut assignment = vec![usize::MAX; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < KMEANS_MAX_ITERATIONS {
        iterations += 1;
        let next = assign(d, &centers);
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            *center = medoid(d, &members, *center);
        }
    }

    let partition = Partition::from_labels(&assignment);
    // cluster labels follow first occurrence; reorder the centers to match
    let mut medoids = vec![0; k];
    for (i, &c) in assignment.iter().enumerate() {
        medoids[partition.label(i)] = centers[c];
    }
    Ok(KMeansResult {
        partition,
        medoids,
        iterations,
        converged,
    })
}

/// Nearest center for every point (ties to the lower center position);
/// centers always keep themselves, so no cluster is ever empty.
fn assign(d: &DistanceMatrix, centers: &[usize]) -> Vec<usize> {
    let n = d.dim();
    let mut out: Vec<usize> = (0..n)
        .map(|i| {
            let mut best = 0;
            for (c, &p) in centers.iter().enumerate().skip(1) {
                if d.get(i, p) < d.get(i, centers[best]) {
                    best = c;
                }
            }
            best
        })
        .collect();
    for (c, &p) in centers.iter().enumerate() {
        out[p] = c;
    }
    out
}

/// Member minimizing the summed distance to the others; the current center
/// wins ties, otherwise the lowest index.
fn medoid(d: &DistanceMatrix, members: &[usize], current: usize) -> usize {
    let cost = |c: usize| members.iter().map(|&x| d.get(c, x)).sum::<f64>();
    let mut best = current;
    let mut best_cost = cost(current);
    for &m in members {
        let c = cost(m);
        if c < best_cost {
            best = m;
            best_cost = c;
        }
    }
    best
}
