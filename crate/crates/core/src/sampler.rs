//! Gaussian and Student-t return generators with reproducible seeding.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded through
//! [`derive_seed`]. Normal variates use the ziggurat sampler of
//! `rand_distr::StandardNormal`; chi-squared variates use
//! `rand_distr::ChiSquared`. Each row draws its `N` normals in column order,
//! then (Student-t only) one chi-squared divisor. Output is bit-identical for
//! a given seed within one build.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationMatrix, PSD_TOLERANCE};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with any number of coordinates (trial index, sample
/// length, model tag, ...) into an independent stream seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Return-generating model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    Gaussian,
    /// Multivariate t with `nu` degrees of freedom, scaled so its covariance is the target.
    StudentT {
        nu: f64,
    },
}

impl Model {
    pub const DEFAULT_NU: f64 = 3.0;

    pub fn student_t() -> Self {
        Model::StudentT {
            nu: Self::DEFAULT_NU,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Model::Gaussian => "gaussian".to_string(),
            Model::StudentT { nu } => format!("student_t({nu})"),
        }
    }

    /// Stable tag mixed into per-trial seeds.
    pub fn tag(&self) -> u64 {
        match self {
            Model::Gaussian => 1,
            Model::StudentT { nu } => derive_seed(2, &[nu.to_bits()]),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Model::Gaussian => Ok(()),
            Model::StudentT { nu } if nu > 2.0 && nu.is_finite() => Ok(()),
            Model::StudentT { nu } => Err(Error::DegenerateParameters(format!(
                "Student-t needs nu > 2 for a finite covariance, got {nu}"
            ))),
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Model::Gaussian),
            "student_t" | "student-t" | "t" => Ok(Model::student_t()),
            _ => {
                let nu = s
                    .strip_prefix("student_t(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown model `{s}`")))?;
                Ok(Model::StudentT { nu })
            }
        }
    }
}

/// `T x N` observations; row `t`, column `i` is the `t`-th observation of variable `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix(DMatrix<f64>);

impl SampleMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() < 2 || m.ncols() < 1 {
            return Err(Error::InvalidMatrix(format!(
                "sample matrix is {}x{}; need at least 2 observations of 1 variable",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite observation at row {}, column {}",
                pos % m.nrows(),
                pos / m.nrows()
            )));
        }
        Ok(Self(m))
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let t = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().position(|c| c.len() != t) {
            return Err(Error::DimensionMismatch {
                expected: t,
                found: columns[bad].len(),
            });
        }
        Self::new(DMatrix::from_fn(t, columns.len(), |r, c| columns[c][r]))
    }

    /// Sample length `T`.
    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn n_vars(&self) -> usize {
        self.0.ncols()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        let t = self.len();
        &self.0.as_slice()[i * t..(i + 1) * t]
    }

    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.0[(t, i)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerSpec {
    pub model: Model,
    pub correlation: CorrelationMatrix,
    pub seed: u64,
}

/// A model with its factorized covariance, reusable across many draws.
#[derive(Clone, Debug)]
pub struct Sampler {
    model: Model,
    /// `A` with `A A^T = Sigma`, from the eigendecomposition with negative
    /// eigenvalues clipped to zero.
    factor: DMatrix<f64>,
}

impl Sampler {
    pub fn new(model: Model, sigma: &CorrelationMatrix) -> Result<Self> {
        model.validate()?;
        let n = sigma.dim();
        let eig = SymmetricEigen::new(sigma.as_matrix().clone());
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE * n as f64 {
            return Err(Error::NotPositiveSemiDefinite {
                min_eigenvalue: min,
            });
        }
        let mut factor = eig.eigenvectors;
        for (j, lambda) in eig.eigenvalues.iter().enumerate() {
            factor.column_mut(j).scale_mut(lambda.max(0.0).sqrt());
        }
        Ok(Self { model, factor })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn n_vars(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample(&self, t: usize, seed: u64) -> Result<SampleMatrix> {
        if t < 2 {
            return Err(Error::DegenerateParameters(format!(
                "sample length must be at least 2, got {t}"
            )));
        }
        let n = self.n_vars();
        let mut rng = rng_from_seed(seed);
        let chi2 = match self.model {
            Model::StudentT { nu } => Some((
                nu,
                ChiSquared::new(nu).map_err(|e| Error::DegenerateParameters(e.to_string()))?,
            )),
            Model::Gaussian => None,
        };
        let mut z = DMatrix::<f64>::zeros(t, n);
        let mut scale = vec![1.0; t];
        for (row, s) in scale.iter_mut().enumerate() {
            for col in 0..n {
                z[(row, col)] = StandardNormal.sample(&mut rng);
            }
            if let Some((nu, dist)) = &chi2 {
                // t_nu(0, (nu-2)/nu Sigma) = sqrt((nu-2)/nu) * G / sqrt(W/nu)
                let w: f64 = dist.sample(&mut rng);
                *s = ((nu - 2.0) / w).sqrt();
            }
        }
        let mut x = &z * self.factor.transpose();
        if chi2.is_some() {
            for (row, s) in scale.iter().enumerate() {
                x.row_mut(row).scale_mut(*s);
            }
        }
        SampleMatrix::new(x)
    }
}

pub fn sample(spec: &SamplerSpec, t: usize) -> Result<SampleMatrix> {
    Sampler::new(spec.model, &spec.correlation)?.sample(t, spec.seed)
}
