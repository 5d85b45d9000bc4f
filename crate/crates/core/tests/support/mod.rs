#![allow(dead_code)]

pub mod reference;

use hcbm::model::BlockSpec;
use hcbm::separability::{check_nested, max_error_budget};
use hcbm::{
    build_correlation, correlation_to_distance, Algorithm, AlgorithmClass, DistanceMatrix,
    Hierarchy, Partition,
};
use nalgebra::DMatrix;
use rand::Rng;

/// Symmetric matrix with zero diagonal and off-diagonal entries uniform in `[0, 1)`.
pub fn random_distance<R: Rng>(rng: &mut R, n: usize) -> DistanceMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.random();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    DistanceMatrix::new(m).unwrap()
}

/// Adjusted Rand index from the pair-counting definition, over all pairs.
pub fn ari_pairs(a: &Partition, b: &Partition) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut total) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let (sa, sb) = (a.same_cluster(i, j), b.same_cluster(i, j));
            total += 1.0;
            if sa && sb {
                both += 1.0;
            }
            if sa {
                only_a += 1.0;
            }
            if sb {
                only_b += 1.0;
            }
        }
    }
    let expected = only_a * only_b / total;
    let max = 0.5 * (only_a + only_b);
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// A random nested block model of depth 1 to 3 with leaf blocks of 2 to 5
/// variables. Correlations strictly increase with depth, so the block spec always
/// validates (the matrix itself may still fail the PSD check).
pub fn random_hcbm<R: Rng>(rng: &mut R) -> BlockSpec {
    let depth = rng.random_range(1..=3);
    let mut levels: Vec<f64> = (0..=depth).map(|_| rng.random_range(-0.1..0.95)).collect();
    levels.sort_by(f64::total_cmp);
    for k in 1..levels.len() {
        if levels[k] <= levels[k - 1] + 0.02 {
            levels[k] = levels[k - 1] + 0.02;
        }
    }
    build(rng, &levels, 0, 2..=5)
}

/// Small clusters, a wide gap under the root and closely packed deeper
/// levels: the shape on which the Ward budget is positive.
pub fn random_tight_hcbm<R: Rng>(rng: &mut R) -> BlockSpec {
    let depth = rng.random_range(1..=2);
    let mut levels = vec![rng.random_range(-0.05..0.3)];
    let base = rng.random_range(0.7..0.85);
    for k in 0..depth {
        levels.push(base + 0.01 * k as f64 + rng.random_range(0.0..0.005));
    }
    build(rng, &levels, 0, 2..=3)
}

fn build<R: Rng>(
    rng: &mut R,
    levels: &[f64],
    k: usize,
    leaf: std::ops::RangeInclusive<usize>,
) -> BlockSpec {
    if k + 1 == levels.len() {
        return BlockSpec::leaf(rng.random_range(leaf), levels[k]);
    }
    let children = (0..rng.random_range(2..=3))
        .map(|_| build(rng, levels, k + 1, leaf.clone()))
        .collect();
    BlockSpec::node(levels[k], children)
}

/// `(1 - rho) / 2` of `sigma + e` for a symmetric `e` uniform in `(-eps, eps)`.
/// The result need not be a valid correlation matrix, only a valid distance one.
pub fn perturbed_distance<R: Rng>(rng: &mut R, sigma: &DMatrix<f64>, eps: f64) -> DistanceMatrix {
    let n = sigma.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let e = if eps > 0.0 {
                rng.random_range(-eps..eps)
            } else {
                0.0
            };
            let rho = (sigma[(i, j)] + e).clamp(-1.0, 1.0);
            d[(i, j)] = (1.0 - rho) / 2.0;
            d[(j, i)] = d[(i, j)];
        }
    }
    DistanceMatrix::new(d).unwrap()
}

/// Tally of one separability-bridge run.
#[derive(Debug, Default)]
pub struct Bridge {
    pub instances: usize,
    /// (class, matrix) combinations on which the nested condition held.
    pub checks_held: usize,
    /// Condition held but some algorithm of the class missed a level.
    pub violations: Vec<String>,
}

fn class_algorithms(class: AlgorithmClass) -> Vec<Algorithm> {
    Algorithm::ALL
        .into_iter()
        .filter(|a| a.class() == Some(class))
        .collect()
}

/// Draws HCBM instances until `instances` valid ones are found and, on the
/// noise-free matrix and on perturbations inside each positive budget,
/// checks that a holding condition implies recovery of every level.
pub fn separability_bridge(seed: u64, instances: usize) -> Bridge {
    let mut rng = hcbm::sampler::rng_from_seed(seed);
    let mut out = Bridge::default();
    let mut draw = 0usize;
    while out.instances < instances {
        draw += 1;
        let spec = if draw.is_multiple_of(2) {
            random_tight_hcbm(&mut rng)
        } else {
            random_hcbm(&mut rng)
        };
        let h = Hierarchy::from_spec(&spec).unwrap();
        let Ok(sigma) = build_correlation(&h) else {
            continue;
        };
        out.instances += 1;
        let truth = h.partitions();
        let counts: Vec<usize> = truth.iter().map(Partition::num_clusters).collect();
        let mut matrices = vec![("noise-free".to_string(), correlation_to_distance(&sigma))];
        for class in [AlgorithmClass::SpaceConserving, AlgorithmClass::Ward] {
            let budget = max_error_budget(&h, class).unwrap();
            if budget.is_positive() {
                let eps = 0.9 * budget.value;
                matrices.push((
                    format!("{class:?} budget"),
                    perturbed_distance(&mut rng, sigma.as_matrix(), eps),
                ));
            }
        }
        for (name, d) in &matrices {
            for class in [AlgorithmClass::SpaceConserving, AlgorithmClass::Ward] {
                if !check_nested(d, &h, class).unwrap().holds {
                    continue;
                }
                out.checks_held += 1;
                for a in class_algorithms(class) {
                    let found = a.partitions(d, &counts, draw as u64).unwrap();
                    if found != truth {
                        out.violations.push(format!("draw {draw}, {name}, {a}"));
                    }
                }
            }
        }
    }
    out
}
