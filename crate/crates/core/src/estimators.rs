//! Empirical Pearson and Spearman correlation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CorrelationMatrix;
use crate::sampler::SampleMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Pearson,
    Spearman,
}

impl Coefficient {
    pub fn name(self) -> &'static str {
        match self {
            Coefficient::Pearson => "pearson",
            Coefficient::Spearman => "spearman",
        }
    }
}

impl std::str::FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Coefficient::Pearson),
            "spearman" => Ok(Coefficient::Spearman),
            _ => Err(Error::Parse(format!(
                "unknown correlation coefficient `{s}`"
            ))),
        }
    }
}

/// Average ranks (1-based) of one column. Sums to `T(T+1)/2`.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidMatrix(format!(
            "need at least 2 observations, got {}",
            x.len()
        )));
    }
    Ok(())
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Sample Pearson correlation, two-pass (means first, then co-moments).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    for (column, c) in [x, y].into_iter().enumerate() {
        if is_constant(c) {
            return Err(Error::ZeroVariance { column });
        }
    }
    let t = x.len() as f64;
    let mx = x.iter().sum::<f64>() / t;
    let my = y.iter().sum::<f64>() / t;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of the average-rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    for (column, c) in [x, y].into_iter().enumerate() {
        if is_constant(c) {
            return Err(Error::ZeroVariance { column });
        }
    }
    pearson(&ranks(x), &ranks(y))
}

/// Centers a column and scales it to unit Euclidean norm.
fn standardize(x: &[f64], column: usize) -> Result<Vec<f64>> {
    if is_constant(x) {
        return Err(Error::ZeroVariance { column });
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut z: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVariance { column });
    }
    z.iter_mut().for_each(|v| *v /= norm);
    Ok(z)
}

/// Empirical correlation matrix of the columns of `s`.
///
/// Each column is transformed once (ranked for Spearman, then centered and
/// normalized); entry `(i, j)` is the inner product of columns `i` and `j`.
pub fn correlation_matrix(s: &SampleMatrix, coefficient: Coefficient) -> Result<CorrelationMatrix> {
    let (t, n) = (s.len(), s.n_vars());
    let mut z = DMatrix::<f64>::zeros(t, n);
    for i in 0..n {
        let col = s.column(i);
        let std = match coefficient {
            Coefficient::Pearson => standardize(col, i)?,
            Coefficient::Spearman => {
                if is_constant(col) {
                    return Err(Error::ZeroVariance { column: i });
                }
                standardize(&ranks(col), i)?
            }
        };
        z.column_mut(i).copy_from_slice(&std);
    }
    let mut c = z.tr_mul(&z);
    for j in 0..n {
        c[(j, j)] = 1.0;
        for i in 0..j {
            let v = c[(i, j)].clamp(-1.0, 1.0);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix::from_estimate(c))
}

/// `max_ij |a_ij - b_ij|`.
pub fn max_abs_deviation(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.as_matrix()
        .iter()
        .zip(b.as_matrix().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
