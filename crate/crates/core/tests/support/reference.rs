//! Naive agglomeration that recomputes every cluster distance from the
//! linkage definition at each step.
//!
//! Median, centroid and McQuitty are defined through weighted point sets:
//! every cluster carries weights `w` over the points, with
//! `X(a, b) = sum_pq w_a[p] w_b[q] d[p][q]`. Centroid keeps uniform weights;
//! median and McQuitty give both halves of a merge equal weight.

use hcbm::clustering::{Linkage, Merge};
use hcbm::DistanceMatrix;

struct Cluster {
    node: usize,
    members: Vec<usize>,
    weights: Vec<f64>,
}

fn cross(d: &DistanceMatrix, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (p, &wa) in a.iter().enumerate().filter(|(_, w)| **w != 0.0) {
        for (q, &wb) in b.iter().enumerate() {
            s += wa * wb * d.get(p, q);
        }
    }
    s
}

fn pair_sum(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .flat_map(|&p| b.iter().map(move |&q| d.get(p, q)))
        .sum()
}

fn cluster_distance(d: &DistanceMatrix, linkage: Linkage, a: &Cluster, b: &Cluster) -> f64 {
    let pairs = || {
        a.members
            .iter()
            .flat_map(|&p| b.members.iter().map(move |&q| d.get(p, q)))
    };
    match linkage {
        Linkage::Single => pairs().fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs().fold(f64::NEG_INFINITY, f64::max),
        Linkage::Average => pairs().sum::<f64>() / (a.members.len() * b.members.len()) as f64,
        Linkage::McQuitty => cross(d, &a.weights, &b.weights),
        Linkage::Median | Linkage::Centroid => {
            cross(d, &a.weights, &b.weights)
                - 0.5 * cross(d, &a.weights, &a.weights)
                - 0.5 * cross(d, &b.weights, &b.weights)
        }
        Linkage::Ward => {
            let (na, nb) = (a.members.len() as f64, b.members.len() as f64);
            na * nb / (na + nb)
                * (2.0 / (na * nb) * pair_sum(d, &a.members, &b.members)
                    - pair_sum(d, &a.members, &a.members) / (na * na)
                    - pair_sum(d, &b.members, &b.members) / (nb * nb))
        }
    }
}

pub fn agglomerate_naive(d: &DistanceMatrix, linkage: Linkage) -> Vec<Merge> {
    let n = d.dim();
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| {
            let mut weights = vec![0.0; n];
            weights[i] = 1.0;
            Cluster {
                node: i,
                members: vec![i],
                weights,
            }
        })
        .collect();
    let mut merges = Vec::new();
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let v = cluster_distance(d, linkage, &clusters[x], &clusters[y]);
                let (lo, hi) = {
                    let (a, b) = (clusters[x].node, clusters[y].node);
                    (a.min(b), a.max(b))
                };
                let better = match best {
                    None => true,
                    Some((bv, blo, bhi, _, _)) => v < bv || (v == bv && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((v, lo, hi, x, y));
                }
            }
        }
        let (height, left, right, x, y) = best.expect("at least two clusters");
        let b = clusters.remove(y);
        let a = clusters.remove(x);
        let mut members = a.members.clone();
        members.extend(&b.members);
        let weights: Vec<f64> = match linkage {
            Linkage::Median | Linkage::McQuitty => a
                .weights
                .iter()
                .zip(&b.weights)
                .map(|(p, q)| 0.5 * (p + q))
                .collect(),
            _ => {
                let mut w = vec![0.0; n];
                for &m in &members {
                    w[m] = 1.0 / members.len() as f64;
                }
                w
            }
        };
        merges.push(Merge {
            left,
            right,
            height,
            size: members.len(),
        });
        clusters.push(Cluster {
            node: n + step,
            members,
            weights,
        });
    }
    merges
}
