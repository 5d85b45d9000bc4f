//! Agglomerative clustering (Lance-Williams family, minimax and Hausdorff
//! linkage), dendrogram cutting and farthest-point k-means.

mod dendrogram;
mod generic;
mod kmeans;
mod lance_williams;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DistanceMatrix;
use crate::partition::Partition;

pub use dendrogram::{cut, Dendrogram, Merge};
pub use generic::{
    agglomerate_generic, agglomerate_generic_observed, hausdorff, minimax, GenericLinkage,
};
pub use kmeans::{farthest_point_centers, kmeans_fp, KMeansResult, KMEANS_MAX_ITERATIONS};
pub use lance_williams::{
    agglomerate_lw, agglomerate_lw_observed, LanceWilliams, LanceWilliamsParams, Linkage,
    MergeUpdate,
};

/// Which separability condition guarantees recovery for an algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmClass {
    SpaceConserving,
    Ward,
}

/// Every clustering method exposed to configs and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Single,
    Complete,
    Average,
    #[serde(rename = "mcquitty")]
    McQuitty,
    Median,
    Centroid,
    Ward,
    Minimax,
    Hausdorff,
    #[serde(rename = "kmeans")]
    KMeans,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::Single,
        Algorithm::Complete,
        Algorithm::Average,
        Algorithm::McQuitty,
        Algorithm::Median,
        Algorithm::Centroid,
        Algorithm::Ward,
        Algorithm::Minimax,
        Algorithm::Hausdorff,
        Algorithm::KMeans,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Single => "single",
            Algorithm::Complete => "complete",
            Algorithm::Average => "average",
            Algorithm::McQuitty => "mcquitty",
            Algorithm::Median => "median",
            Algorithm::Centroid => "centroid",
            Algorithm::Ward => "ward",
            Algorithm::Minimax => "minimax",
            Algorithm::Hausdorff => "hausdorff",
            Algorithm::KMeans => "kmeans",
        }
    }

    pub fn linkage(self) -> Option<Linkage> {
        Some(match self {
            Algorithm::Single => Linkage::Single,
            Algorithm::Complete => Linkage::Complete,
            Algorithm::Average => Linkage::Average,
            Algorithm::McQuitty => Linkage::McQuitty,
            Algorithm::Median => Linkage::Median,
            Algorithm::Centroid => Linkage::Centroid,
            Algorithm::Ward => Linkage::Ward,
            _ => return None,
        })
    }

    pub fn class(self) -> Option<AlgorithmClass> {
        match self {
            Algorithm::Ward => Some(AlgorithmClass::Ward),
            Algorithm::Median | Algorithm::Centroid => None,
            _ => Some(AlgorithmClass::SpaceConserving),
        }
    }

    pub fn is_hierarchical(self) -> bool {
        self != Algorithm::KMeans
    }

    /// Full dendrogram; `None` for k-means.
    pub fn dendrogram(self, d: &DistanceMatrix) -> Option<Dendrogram> {
        match self {
            Algorithm::Minimax => Some(agglomerate_generic(d, GenericLinkage::Minimax)),
            Algorithm::Hausdorff => Some(agglomerate_generic(d, GenericLinkage::Hausdorff)),
            Algorithm::KMeans => None,
            lw => lw.linkage().map(|l| agglomerate_lw(d, &l)),
        }
    }

    /// One flat partition per requested cluster count. Hierarchical methods
    /// build a single dendrogram and cut it; k-means runs once per count.
    pub fn partitions(
        self,
        d: &DistanceMatrix,
        counts: &[usize],
        seed: u64,
    ) -> Result<Vec<Partition>> {
        let n = d.dim();
        if let Some(&k) = counts.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::InvalidK { k, n });
        }
        match self.dendrogram(d) {
            Some(dend) => counts.iter().map(|&k| dend.cut(k)).collect(),
            None => counts
                .iter()
                .map(|&k| kmeans_fp(d, k, seed).map(|r| r.partition))
                .collect(),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown clustering algorithm `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.name()));
        }
        assert!("upgma".parse::<Algorithm>().is_err());
    }
}
