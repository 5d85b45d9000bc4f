use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// One agglomeration step. Leaves are nodes `0..N`, the node created by step
/// `s` is `N + s`; `left < right`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Checks that every node is merged at most once, only after it exists,
    /// and that sizes add up.
    pub fn from_merges(n: usize, merges: Vec<Merge>) -> Result<Self> {
        if n > 0 && merges.len() != n - 1 {
            return Err(Error::InvalidMatrix(format!(
                "a dendrogram over {n} leaves has {} merges, expected {}",
                merges.len(),
                n - 1
            )));
        }
        let mut sizes = vec![1usize; n];
        let mut used = vec![false; 2 * n];
        for (s, m) in merges.iter().enumerate() {
            let created = n + s;
            for node in [m.left, m.right] {
                if node >= created || used[node] {
                    return Err(Error::InvalidMatrix(format!(
                        "merge {s} uses node {node} which is unavailable"
                    )));
                }
                used[node] = true;
            }
            if m.left == m.right || sizes[m.left] + sizes[m.right] != m.size {
                return Err(Error::InvalidMatrix(format!("merge {s} is inconsistent")));
            }
            sizes.push(m.size);
        }
        Ok(Self { n, merges })
    }

    pub(crate) fn from_trusted(n: usize, merges: Vec<Merge>) -> Self {
        Self { n, merges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Heights never decrease along the merge order.
    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Leaves under every node, indexed by node id.
    pub fn node_members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = members[m.left].clone();
            joined.extend_from_slice(&members[m.right]);
            joined.sort_unstable();
            members.push(joined);
        }
        members
    }

    /// The flat partition left after undoing the last `k - 1` merges (in merge
    /// order, so the result is defined even when heights are not monotone).
    pub fn cut(&self, k: usize) -> Result<Partition> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidK { k, n: self.n });
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        // representative leaf of every node
        let mut rep: Vec<usize> = (0..self.n).collect();
        for m in &self.merges[..self.n - k] {
            let (a, b) = (
                find(&mut parent, rep[m.left]),
                find(&mut parent, rep[m.right]),
            );
            parent[b] = a;
            rep.push(a);
        }
        let labels: Vec<usize> = (0..self.n).map(|i| find(&mut parent, i)).collect();
        Ok(Partition::from_labels(&labels))
    }
}

pub fn cut(dend: &Dendrogram, k: usize) -> Result<Partition> {
    dend.cut(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_point_single() -> Dendrogram {
        Dendrogram::from_merges(
            3,
            vec![
                Merge {
                    left: 0,
                    right: 1,
                    height: 1.0,
                    size: 2,
                },
                Merge {
                    left: 2,
                    right: 3,
                    height: 2.0,
                    size: 3,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn cut_extremes_and_middle() {
        let d = three_point_single();
        assert_eq!(d.cut(1).unwrap(), Partition::single_cluster(3));
        assert_eq!(d.cut(3).unwrap(), Partition::singletons(3));
        assert_eq!(d.cut(2).unwrap().labels(), &[0, 0, 1]);
        assert!(matches!(d.cut(0), Err(Error::InvalidK { k: 0, n: 3 })));
        assert!(matches!(d.cut(4), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn cut_follows_merge_order_under_inversions() {
        let d = Dendrogram::from_merges(
            4,
            vec![
                Merge {
                    left: 0,
                    right: 1,
                    height: 1.0,
                    size: 2,
                },
                Merge {
                    left: 2,
                    right: 4,
                    height: 0.5,
                    size: 3,
                },
                Merge {
                    left: 3,
                    right: 5,
                    height: 2.0,
                    size: 4,
                },
            ],
        )
        .unwrap();
        assert!(!d.is_monotone());
        assert_eq!(d.cut(3).unwrap().labels(), &[0, 0, 1, 2]);
        assert_eq!(d.cut(2).unwrap().labels(), &[0, 0, 0, 1]);
    }

    #[test]
    fn rejects_inconsistent_merges() {
        let reuse = vec![
            Merge {
                left: 0,
                right: 1,
                height: 1.0,
                size: 2,
            },
            Merge {
                left: 0,
                right: 2,
                height: 2.0,
                size: 2,
            },
        ];
        assert!(Dendrogram::from_merges(3, reuse).is_err());
        let bad_size = vec![
            Merge {
                left: 0,
                right: 1,
                height: 1.0,
                size: 2,
            },
            Merge {
                left: 2,
                right: 3,
                height: 2.0,
                size: 4,
            },
        ];
        assert!(Dendrogram::from_merges(3, bad_size).is_err());
    }

    #[test]
    fn members_per_node() {
        let m = three_point_single().node_members();
        assert_eq!(m[3], vec![0, 1]);
        assert_eq!(m[4], vec![0, 1, 2]);
    }
}
