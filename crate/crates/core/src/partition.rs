//! Flat partitions of `N` points and the scores used to compare them.

use crate::error::{Error, Result};

/// A hard assignment of `N` points to clusters.
///
/// Labels are stored in first-occurrence order (the first point is in cluster
/// 0, the next point not in cluster 0 opens cluster 1, and so on), so two
/// partitions are `==` exactly when they group the points identically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    clusters: usize,
}

impl Partition {
    /// Builds a partition from arbitrary labels; only equality between labels matters.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            labels,
            clusters: remap.len(),
        }
    }

    pub fn single_cluster(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            clusters: usize::from(n > 0),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            clusters: n,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn largest_cluster(&self) -> usize {
        self.cluster_sizes().into_iter().max().unwrap_or(0)
    }

    /// Point indices of each cluster, clusters in label order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

fn check_len(a: &Partition, b: &Partition) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Equality up to relabeling.
pub fn partition_equal(a: &Partition, b: &Partition) -> Result<bool> {
    check_len(a, b)?;
    Ok(a == b)
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index from the contingency table of the two partitions.
///
/// When the expected and maximal indices coincide (both partitions trivial in
/// the same way) the index is defined as 1.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    check_len(a, b)?;
    let n = a.len();
    let (ka, kb) = (a.num_clusters(), b.num_clusters());
    let mut table = vec![0usize; ka * kb];
    for i in 0..n {
        table[a.label(i) * kb + b.label(i)] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sum_a: f64 = a.cluster_sizes().into_iter().map(choose2).sum();
    let sum_b: f64 = b.cluster_sizes().into_iter().map(choose2).sum();
    let total = choose2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
