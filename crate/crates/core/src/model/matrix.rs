use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest eigenvalue accepted as PSD is `-PSD_TOLERANCE * N`.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Slack allowed on symmetry, unit diagonal and the `[-1, 1]` range.
const ENTRY_TOLERANCE: f64 = 1e-12;

/// A symmetric, unit-diagonal, positive semi-definite `N x N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    /// Validates shape, symmetry, unit diagonal, range and positive semi-definiteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_correlation_entries(&m)?;
        let min_eigenvalue = min_eigenvalue(&m);
        if min_eigenvalue < -PSD_TOLERANCE * m.nrows() as f64 {
            return Err(Error::NotPositiveSemiDefinite { min_eigenvalue });
        }
        Ok(Self(m))
    }

    /// Wraps an empirical estimate. Sample correlation matrices are Gram
    /// matrices, hence PSD; only the cheap entry checks are debug-asserted.
    pub(crate) fn from_estimate(m: DMatrix<f64>) -> Self {
        debug_assert!(check_correlation_entries(&m).is_ok());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    /// Row-major rows, for serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.0)
    }
}

fn check_correlation_entries(m: &DMatrix<f64>) -> Result<()> {
    check_square_symmetric(m)?;
    let n = m.nrows();
    for i in 0..n {
        if (m[(i, i)] - 1.0).abs() > ENTRY_TOLERANCE {
            return Err(Error::InvalidMatrix(format!(
                "diagonal entry ({i},{i}) is {} instead of 1",
                m[(i, i)]
            )));
        }
        for j in 0..n {
            if m[(i, j)].abs() > 1.0 + ENTRY_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({i},{j}) = {} is outside [-1, 1]",
                    m[(i, j)]
                )));
            }
        }
    }
    Ok(())
}

fn check_square_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidMatrix(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidMatrix("matrix is empty".into()));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({i},{j}) is not finite"
                )));
            }
            if j > i && (v - m[(j, i)]).abs() > ENTRY_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "entries ({i},{j}) and ({j},{i}) differ"
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// A symmetric, zero-diagonal matrix of non-negative dissimilarities.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_symmetric(&m)?;
        for i in 0..m.nrows() {
            if m[(i, i)] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry ({i},{i}) of a distance matrix is {}",
                    m[(i, i)]
                )));
            }
        }
        if let Some(v) = m.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidMatrix(format!("negative distance {v}")));
        }
        Ok(Self(m))
    }

    /// `d = (1 - rho) / 2`, with an exactly zero diagonal.
    pub fn from_correlation(c: &CorrelationMatrix) -> Self {
        let n = c.dim();
        let mut m = c.as_matrix().map(|rho| ((1.0 - rho) / 2.0).clamp(0.0, 1.0));
        for i in 0..n {
            m[(i, i)] = 0.0;
        }
        Self(m)
    }

    /// Inverse of [`DistanceMatrix::from_correlation`]: `rho = 1 - 2d`.
    pub fn to_correlation(&self) -> Result<CorrelationMatrix> {
        let mut m = self.0.map(|d| 1.0 - 2.0 * d);
        for i in 0..m.nrows() {
            m[(i, i)] = 1.0;
        }
        CorrelationMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.0)
    }
}

pub fn correlation_to_distance(m: &CorrelationMatrix) -> DistanceMatrix {
    DistanceMatrix::from_correlation(m)
}

/// A bijection on `0..n`; `apply(i)` is where index `i` is sent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &p in &image {
            if p >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {p} is out of range for n={n}"
                )));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPermutation(format!(
                    "image {p} appears twice"
                )));
            }
        }
        Ok(Self(image))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn reversal(n: usize) -> Self {
        Self((0..n).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Self(inv)
    }
}

/// Relabels the variables: `result[p(i)][p(j)] = m[i][j]`.
pub fn permute(m: &CorrelationMatrix, perm: &Permutation) -> Result<CorrelationMatrix> {
    let n = m.dim();
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "permutation of {} elements applied to a {n}x{n} matrix",
            perm.len()
        )));
    }
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(perm.apply(i), perm.apply(j))] = m.get(i, j);
        }
    }
    Ok(CorrelationMatrix(out))
}
