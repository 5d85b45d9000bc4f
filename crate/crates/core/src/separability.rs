//! Separability conditions under which a clustering algorithm provably
//! returns the ground-truth partition, the entrywise estimation error those
//! conditions tolerate, and the concentration bound for Spearman matrices.

use serde::Serialize;

use crate::clustering::AlgorithmClass;
use crate::error::{Error, Result};
use crate::model::{DistanceMatrix, Hierarchy};
use crate::partition::Partition;

/// A distance value and the pair attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub value: f64,
    pub i: usize,
    pub j: usize,
}

/// Extreme intra- and inter-cluster distances of a matrix against a partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntraInter {
    pub max_intra: Option<Witness>,
    pub min_intra: Option<Witness>,
    pub min_inter: Option<Witness>,
}

fn intra_inter(d: &DistanceMatrix, truth: &Partition) -> Result<IntraInter> {
    if d.dim() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: truth.len(),
        });
    }
    let mut out = IntraInter {
        max_intra: None,
        min_intra: None,
        min_inter: None,
    };
    let better = |slot: &mut Option<Witness>, value: f64, i, j, wins: fn(f64, f64) -> bool| {
        if slot.is_none_or(|w| wins(value, w.value)) {
            *slot = Some(Witness { value, i, j });
        }
    };
    for i in 0..d.dim() {
        for j in i + 1..d.dim() {
            let v = d.get(i, j);
            if truth.same_cluster(i, j) {
                better(&mut out.max_intra, v, i, j, |a, b| a > b);
                better(&mut out.min_intra, v, i, j, |a, b| a < b);
            } else {
                better(&mut out.min_inter, v, i, j, |a, b| a < b);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct S1Report {
    pub holds: bool,
    /// Largest within-cluster distance (`None` when all clusters are singletons).
    pub max_intra: Option<Witness>,
    /// Smallest between-cluster distance (`None` for a single cluster).
    pub min_inter: Option<Witness>,
}

/// Largest intra-cluster distance strictly below the smallest inter-cluster
/// distance. Empty sides make the condition hold vacuously.
pub fn check_s1(d: &DistanceMatrix, truth: &Partition) -> Result<S1Report> {
    let ii = intra_inter(d, truth)?;
    let holds = match (ii.max_intra, ii.min_inter) {
        (Some(a), Some(b)) => a.value < b.value,
        _ => true,
    };
    Ok(S1Report {
        holds,
        max_intra: ii.max_intra,
        min_inter: ii.min_inter,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WardReport {
    pub holds: bool,
    pub largest_cluster: usize,
    /// `n * (max_intra - min_intra)`
    pub spread: f64,
    /// `min_inter - min_intra`
    pub gap: f64,
}

/// Ward separability: `n (max intra - min intra) < min inter - min intra`
/// with `n` the size of the largest ground-truth cluster.
pub fn check_ward(d: &DistanceMatrix, truth: &Partition) -> Result<WardReport> {
    let ii = intra_inter(d, truth)?;
    let n = truth.largest_cluster();
    Ok(match (ii.max_intra, ii.min_intra, ii.min_inter) {
        (Some(hi), Some(lo), Some(inter)) => {
            let spread = n as f64 * (hi.value - lo.value);
            let gap = inter.value - lo.value;
            WardReport {
                holds: spread < gap,
                largest_cluster: n,
                spread,
                gap,
            }
        }
        _ => WardReport {
            holds: true,
            largest_cluster: n,
            spread: 0.0,
            gap: f64::INFINITY,
        },
    })
}

/// The condition for `class` at every nontrivial level of `h`; `levels[k-1]`
/// is the verdict for `P_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestedReport {
    pub holds: bool,
    pub levels: Vec<bool>,
}

/// Nested separability: the one-level condition of `class` applied to each
/// ground-truth partition `P_1 ..= P_h`. For space-conserving algorithms
/// this is the interleaving chain of empirical level extremes; for Ward it is
/// `n_k (d_hi_k - d_lo_h) < d_lo_{k-1} - d_lo_h` on empirical values.
pub fn check_nested(
    d: &DistanceMatrix,
    h: &Hierarchy,
    class: AlgorithmClass,
) -> Result<NestedReport> {
    if h.depth() == 0 {
        return Err(Error::InvalidHierarchy(
            "hierarchy has no nontrivial level".into(),
        ));
    }
    if d.dim() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            found: d.dim(),
        });
    }
    let levels = h
        .partitions()
        .iter()
        .map(|p| match class {
            AlgorithmClass::SpaceConserving => check_s1(d, p).map(|r| r.holds),
            AlgorithmClass::Ward => check_ward(d, p).map(|r| r.holds),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NestedReport {
        holds: levels.iter().all(|&b| b),
        levels,
    })
}

/// Per-level extremes of the model: `d_lo = (1 - rho_hi) / 2`,
/// `d_hi = (1 - rho_lo) / 2`, and the largest cluster of `P_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelGap {
    pub level: usize,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub largest_cluster: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelGaps {
    /// Non-empty levels only, shallowest first.
    pub levels: Vec<LevelGap>,
}

impl LevelGaps {
    /// Fails unless `rho_hi_k < rho_lo_{k+1}` across consecutive non-empty levels.
    pub fn from_hierarchy(h: &Hierarchy) -> Result<Self> {
        if h.depth() == 0 {
            return Err(Error::InvalidHierarchy(
                "hierarchy has no nontrivial level".into(),
            ));
        }
        let levels: Vec<LevelGap> = h
            .level_bounds()
            .into_iter()
            .enumerate()
            .filter_map(|(k, b)| b.map(|(lo, hi)| (k, lo, hi)))
            .map(|(k, rho_lo, rho_hi)| LevelGap {
                level: k,
                rho_lo,
                rho_hi,
                d_lo: (1.0 - rho_hi) / 2.0,
                d_hi: (1.0 - rho_lo) / 2.0,
                largest_cluster: h.partition(k).largest_cluster(),
            })
            .collect();
        for w in levels.windows(2) {
            if w[0].rho_hi >= w[1].rho_lo {
                return Err(Error::NestingViolation {
                    parent: format!("level {}", w[0].level),
                    child: format!("level {}", w[1].level),
                    parent_hi: w[0].rho_hi,
                    child_lo: w[1].rho_lo,
                });
            }
        }
        Ok(Self { levels })
    }
}

/// Largest entrywise correlation error `||Sigma - Sigma_hat||_inf` under which
/// recovery stays guaranteed. `value <= 0` means no error is tolerated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub value: f64,
    /// Level whose term attains the minimum.
    pub binding_level: usize,
}

impl ErrorBudget {
    pub fn is_positive(&self) -> bool {
        self.value > 0.0
    }
}

/// Space-conserving: `min_k (rho_lo_{k+1} - rho_hi_k) / 2`.
/// Ward: `min_k (rho_hi_h - rho_hi_{k-1} - n_k (rho_hi_h - rho_lo_k)) / (1 + 2 n_k)`,
/// `k = 1..h`, with `n_k` the largest cluster of `P_k`.
pub fn max_error_budget(h: &Hierarchy, class: AlgorithmClass) -> Result<ErrorBudget> {
    let gaps = LevelGaps::from_hierarchy(h)?;
    let levels = &gaps.levels;
    let mut best = ErrorBudget {
        value: f64::INFINITY,
        binding_level: 0,
    };
    let mut consider = |value: f64, level: usize| {
        if value < best.value {
            best = ErrorBudget {
                value,
                binding_level: level,
            };
        }
    };
    match class {
        AlgorithmClass::SpaceConserving => {
            for w in levels.windows(2) {
                consider((w[1].rho_lo - w[0].rho_hi) / 2.0, w[1].level);
            }
        }
        AlgorithmClass::Ward => {
            let rho_hi_h = levels.last().expect("depth >= 1 has pairs").rho_hi;
            // levels[p] is the first non-empty level at or below each cut
            for p in 1..levels.len() {
                let above = &levels[p - 1];
                let at = &levels[p];
                let n_k = h.partition(above.level + 1).largest_cluster() as f64;
                let value =
                    (rho_hi_h - above.rho_hi - n_k * (rho_hi_h - at.rho_lo)) / (1.0 + 2.0 * n_k);
                consider(value, above.level + 1);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentrationBound {
    /// `24 sqrt(ln N / T)`
    pub bound: f64,
    /// Whether `N >= 24 / ln T + 2`, the range where the bound is stated.
    pub valid: bool,
}

/// Entrywise deviation bound for empirical Spearman matrices, holding with
/// probability at least `1 - 1/T^2`. Natural logarithms throughout.
pub fn concentration_bound(n: usize, t: usize) -> ConcentrationBound {
    let (n, t) = (n as f64, t as f64);
    ConcentrationBound {
        bound: 24.0 * (n.ln() / t).sqrt(),
        valid: n >= 24.0 / t.ln() + 2.0,
    }
}

/// `1 - 2 N^2 exp(-T d^2 / 24)`: confidence of recovery at separation `d`.
/// Vacuous (even negative) for realistic `N`, `T`.
pub fn recovery_confidence(n: usize, t: usize, d: f64) -> f64 {
    let (n, t) = (n as f64, t as f64);
    1.0 - 2.0 * n * n * (-t * d * d / 24.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        benchmark_hierarchy, build_correlation, correlation_to_distance, BlockSpec,
    };
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn two_block_distance(intra: f64, inter: f64, sizes: &[usize]) -> (DistanceMatrix, Partition) {
        let labels: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| vec![c; s])
            .collect();
        let n = labels.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if labels[i] == labels[j] {
                intra
            } else {
                inter
            }
        });
        (
            DistanceMatrix::new(d).unwrap(),
            Partition::from_labels(&labels),
        )
    }

    #[test]
    fn s1_examples() {
        let (d, truth) = two_block_distance(0.15, 0.425, &[3, 3]);
        assert!(check_s1(&d, &truth).unwrap().holds);

        let mut m = d.as_matrix().clone();
        m[(1, 2)] = 0.5;
        m[(2, 1)] = 0.5;
        let r = check_s1(&DistanceMatrix::new(m).unwrap(), &truth).unwrap();
        assert!(!r.holds);
        let w = r.max_intra.unwrap();
        assert_eq!((w.i, w.j, w.value), (1, 2, 0.5));

        let (d, truth) = two_block_distance(0.0, 0.3, &[1, 1]);
        let r = check_s1(&d, &truth).unwrap();
        assert!(r.holds);
        assert!(r.max_intra.is_none());
    }

    #[test]
    fn ward_examples() {
        // uniform intra distances: left side is 0
        let (d, truth) = two_block_distance(0.15, 0.425, &[4, 2]);
        assert!(check_ward(&d, &truth).unwrap().holds);

        // spread 0.01 with n = 30 against a gap of 0.275: 0.30 < 0.275 fails
        let build = |spread: f64| {
            let (d, truth) = two_block_distance(0.15, 0.425, &[30, 30]);
            let mut m = d.as_matrix().clone();
            m[(0, 1)] = 0.15 + spread;
            m[(1, 0)] = 0.15 + spread;
            (DistanceMatrix::new(m).unwrap(), truth)
        };
        let (d, truth) = build(0.01);
        let r = check_ward(&d, &truth).unwrap();
        assert_eq!(r.largest_cluster, 30);
        assert_abs_diff_eq!(r.spread, 0.30, epsilon = 1e-12);
        assert_abs_diff_eq!(r.gap, 0.275, epsilon = 1e-12);
        assert!(!r.holds);
        // spread 0.005: 0.15 < 0.275
        let (d, truth) = build(0.005);
        assert!(check_ward(&d, &truth).unwrap().holds);
    }

    #[test]
    fn dimension_mismatch() {
        let (d, _) = two_block_distance(0.1, 0.4, &[2, 2]);
        assert!(check_s1(&d, &Partition::singletons(3)).is_err());
    }

    #[test]
    fn nested_on_noise_free_benchmark() {
        let h = benchmark_hierarchy();
        let d = correlation_to_distance(&build_correlation(&h).unwrap());
        let sc = check_nested(&d, &h, AlgorithmClass::SpaceConserving).unwrap();
        assert!(sc.holds);
        // Ward: P_1 has n = 115 and intra distances 0.15..0.275, so
        // 115 * 0.125 = 14.375 is far above the gap 0.35 - 0.15 = 0.2.
        let ward = check_nested(&d, &h, AlgorithmClass::Ward).unwrap();
        assert_eq!(ward.levels, vec![false, false]);
    }

    #[test]
    fn one_level_nested_reduces_to_flat_checks() {
        let spec = BlockSpec::node(0.15, vec![BlockSpec::leaf(4, 0.7), BlockSpec::leaf(3, 0.7)]);
        let h = Hierarchy::from_spec(&spec).unwrap();
        let d = correlation_to_distance(&build_correlation(&h).unwrap());
        let p = h.partition(1);
        assert_eq!(
            check_nested(&d, &h, AlgorithmClass::SpaceConserving)
                .unwrap()
                .holds,
            check_s1(&d, &p).unwrap().holds
        );
        assert_eq!(
            check_nested(&d, &h, AlgorithmClass::Ward).unwrap().holds,
            check_ward(&d, &p).unwrap().holds
        );
    }

    #[test]
    fn touching_levels_fail() {
        // a leaf at 0.4 next to a node whose children are joined at 0.4
        let spec = BlockSpec::node(
            0.1,
            vec![
                BlockSpec::node(0.4, vec![BlockSpec::leaf(2, 0.8), BlockSpec::leaf(2, 0.8)]),
                BlockSpec::leaf(3, 0.4),
            ],
        );
        let h = Hierarchy::from_spec(&spec).unwrap();
        let d = correlation_to_distance(&build_correlation(&h).unwrap());
        assert!(
            !check_nested(&d, &h, AlgorithmClass::SpaceConserving)
                .unwrap()
                .holds
        );
        assert!(matches!(
            max_error_budget(&h, AlgorithmClass::SpaceConserving),
            Err(Error::NestingViolation { .. })
        ));
    }

    #[test]
    fn one_level_budget() {
        let spec = BlockSpec::node(0.15, vec![BlockSpec::leaf(4, 0.7), BlockSpec::leaf(3, 0.7)]);
        let h = Hierarchy::from_spec(&spec).unwrap();
        let b = max_error_budget(&h, AlgorithmClass::SpaceConserving).unwrap();
        assert_abs_diff_eq!(b.value, 0.275, epsilon = 1e-12);
        // uniform blocks: (0.7 - 0.15 - 4 * 0) / (1 + 8)
        let w = max_error_budget(&h, AlgorithmClass::Ward).unwrap();
        assert_abs_diff_eq!(w.value, 0.55 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn two_level_ward_budget_by_hand() {
        // levels 0.1 / 0.7 / 0.75, n_1 = 4, n_2 = 2
        let spec = BlockSpec::node(
            0.1,
            vec![
                BlockSpec::node(
                    0.7,
                    vec![BlockSpec::leaf(2, 0.75), BlockSpec::leaf(2, 0.75)],
                ),
                BlockSpec::node(
                    0.7,
                    vec![BlockSpec::leaf(2, 0.75), BlockSpec::leaf(2, 0.75)],
                ),
            ],
        );
        let h = Hierarchy::from_spec(&spec).unwrap();
        // k=1: (0.75 - 0.1 - 4 * 0.05) / 9 = 0.05; k=2: (0.75 - 0.7 - 0) / 5 = 0.01
        let w = max_error_budget(&h, AlgorithmClass::Ward).unwrap();
        assert_abs_diff_eq!(w.value, 0.01, epsilon = 1e-12);
        assert_eq!(w.binding_level, 2);
        let sc = max_error_budget(&h, AlgorithmClass::SpaceConserving).unwrap();
        assert_abs_diff_eq!(sc.value, 0.025, epsilon = 1e-12);
    }

    #[test]
    fn benchmark_budgets() {
        let h = benchmark_hierarchy();
        let sc = max_error_budget(&h, AlgorithmClass::SpaceConserving).unwrap();
        assert_abs_diff_eq!(sc.value, 0.075, epsilon = 1e-12);
        assert!(sc.is_positive());
        // k=1: (0.7 - 0.30 - 115 * 0.25) / 231; k=2: (0.7 - 0.45 - 50 * 0.1) / 101
        let w = max_error_budget(&h, AlgorithmClass::Ward).unwrap();
        assert_abs_diff_eq!(w.value, (0.4 - 28.75) / 231.0, epsilon = 1e-12);
        assert!(!w.is_positive());
    }

    #[test]
    fn concentration_numbers() {
        let c = concentration_bound(265, 2500);
        assert_abs_diff_eq!(
            c.bound,
            24.0 * (265f64.ln() / 2500.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(c.bound, 1.134, epsilon = 1e-3);
        assert!(c.valid);
        let conf = recovery_confidence(265, 2500, 0.2);
        assert!((conf + 2176.0).abs() <= 10.0, "{conf}");
        assert!(recovery_confidence(10, 1_000_000, 0.2) > 0.999_999);
        // N < 24 / ln T + 2
        assert!(!concentration_bound(3, 10).valid);
        let mut last = f64::INFINITY;
        for t in [10, 100, 1_000, 10_000, 100_000] {
            let b = concentration_bound(50, t).bound;
            assert!(b < last);
            last = b;
        }
    }
}
