//! Monte Carlo cluster-recovery experiments.
//!
//! Every trial draws its own seed from `(master seed, trial index, T, model)`
//! and trials are reduced in index order, so reports do not depend on how
//! trials are scheduled across threads.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::Algorithm;
use crate::error::{Error, Result};
use crate::estimators::{correlation_matrix, Coefficient};
use crate::model::{
    benchmark_hierarchy_with, build_correlation, correlation_to_distance, two_block_hierarchy,
    BenchmarkParams, BlockSpec, CorrelationMatrix, Hierarchy,
};
use crate::par::Execution;
use crate::partition::Partition;
use crate::sampler::{derive_seed, Model, Sampler};

pub use crate::partition::{ari, partition_equal};

/// Binomial standard error `sqrt(p (1 - p) / L)`.
pub fn binomial_std_error(ratio: f64, trials: usize) -> f64 {
    (ratio * (1.0 - ratio) / trials as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchySource {
    /// The 265-asset benchmark with the given (or default) levels.
    Benchmark265(#[serde(default)] BenchmarkParams),
    Blocks(BlockSpec),
}

impl HierarchySource {
    pub fn resolve(&self) -> Result<Hierarchy> {
        match self {
            HierarchySource::Benchmark265(p) => benchmark_hierarchy_with(p),
            HierarchySource::Blocks(spec) => Hierarchy::from_spec(spec),
        }
    }
}

/// Which ground-truth levels a trial must reproduce to count as a recovery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryCriterion {
    /// Every nontrivial partition `P_1 ..= P_h`.
    #[default]
    AllLevels,
    /// Only `P_1`.
    TopLevel,
}

impl RecoveryCriterion {
    pub fn levels(self, h: &Hierarchy) -> Vec<Partition> {
        match self {
            RecoveryCriterion::AllLevels => h.partitions(),
            RecoveryCriterion::TopLevel => vec![h.partition(1)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hierarchy: HierarchySource,
    pub models: Vec<Model>,
    pub algorithms: Vec<Algorithm>,
    pub coefficients: Vec<Coefficient>,
    pub t_grid: Vec<usize>,
    /// Trials per grid point (`L`).
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub criterion: RecoveryCriterion,
}

pub const DEFAULT_SEED: u64 = 20_160_715;
pub const DEFAULT_TRIALS: usize = 100;

impl ExperimentConfig {
    /// Convergence study on the benchmark: Gaussian and Student-t(3) returns,
    /// single / average / Ward linkage, both coefficients, `T` from 10 to 500.
    pub fn benchmark() -> Self {
        Self {
            hierarchy: HierarchySource::Benchmark265(BenchmarkParams::default()),
            models: vec![Model::Gaussian, Model::student_t()],
            algorithms: vec![Algorithm::Single, Algorithm::Average, Algorithm::Ward],
            coefficients: vec![Coefficient::Pearson, Coefficient::Spearman],
            t_grid: vec![10, 25, 50, 75, 100, 150, 200, 250, 300, 400, 500],
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            criterion: RecoveryCriterion::AllLevels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::DegenerateParameters(
                "trials must be at least 1".into(),
            ));
        }
        if self.t_grid.is_empty()
            || self.t_grid[0] < 2
            || self.t_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::DegenerateParameters(
                "t_grid must be non-empty, strictly increasing and start at 2 or more".into(),
            ));
        }
        if self.models.is_empty() || self.algorithms.is_empty() || self.coefficients.is_empty() {
            return Err(Error::DegenerateParameters(
                "models, algorithms and coefficients must be non-empty".into(),
            ));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

fn config_hash<T: Serialize>(config: &T) -> String {
    let text = serde_json::to_string(config).expect("configs serialize");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Everything a trial needs, prepared once per experiment.
pub struct ConvergenceSetup {
    config: ExperimentConfig,
    hierarchy: Hierarchy,
    truth: Vec<Partition>,
    counts: Vec<usize>,
    samplers: Vec<Sampler>,
}

/// `outcome[c][a]` for coefficient `c` and algorithm `a`: `Some(recovered)`,
/// or `None` when the correlation estimate failed (e.g. a constant column).
pub type TrialOutcome = Vec<Vec<Option<bool>>>;

impl ConvergenceSetup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let hierarchy = config.hierarchy.resolve()?;
        if hierarchy.depth() == 0 {
            return Err(Error::InvalidHierarchy(
                "experiments need at least one nontrivial level".into(),
            ));
        }
        let sigma = build_correlation(&hierarchy)?;
        let samplers = config
            .models
            .iter()
            .map(|&m| Sampler::new(m, &sigma))
            .collect::<Result<Vec<_>>>()?;
        let truth = config.criterion.levels(&hierarchy);
        let counts = truth.iter().map(Partition::num_clusters).collect();
        Ok(Self {
            config: config.clone(),
            hierarchy,
            truth,
            counts,
            samplers,
        })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn trial_seed(&self, t: usize, model: usize, trial: usize) -> u64 {
        derive_seed(
            self.config.seed,
            &[trial as u64, t as u64, self.config.models[model].tag()],
        )
    }

    /// Sample, estimate, cluster and compare one trial at sample length `t`.
    pub fn recovery_trial(&self, t: usize, model: usize, trial: usize) -> Result<TrialOutcome> {
        let seed = self.trial_seed(t, model, trial);
        let sample = self.samplers[model].sample(t, seed)?;
        Ok(self
            .config
            .coefficients
            .iter()
            .map(|&c| match correlation_matrix(&sample, c) {
                Ok(sigma) => recover(
                    &sigma,
                    &self.truth,
                    &self.counts,
                    &self.config.algorithms,
                    seed,
                )
                .into_iter()
                .map(Some)
                .collect(),
                Err(e) => {
                    log::warn!("trial {trial} (T={t}, {}): {e}", c.name());
                    vec![None; self.config.algorithms.len()]
                }
            })
            .collect())
    }

    /// Recovery on the exact model matrix, with no sampling noise.
    pub fn noise_free(&self) -> Result<Vec<(Algorithm, bool)>> {
        let sigma = build_correlation(&self.hierarchy)?;
        let ok = recover(
            &sigma,
            &self.truth,
            &self.counts,
            &self.config.algorithms,
            self.config.seed,
        );
        Ok(self.config.algorithms.iter().copied().zip(ok).collect())
    }
}

/// Whether each algorithm reproduces every partition in `truth` from `sigma`.
pub fn recover(
    sigma: &CorrelationMatrix,
    truth: &[Partition],
    counts: &[usize],
    algorithms: &[Algorithm],
    seed: u64,
) -> Vec<bool> {
    let d = correlation_to_distance(sigma);
    algorithms
        .iter()
        .map(|a| match a.partitions(&d, counts, seed) {
            Ok(found) => found.iter().zip(truth).all(|(f, t)| f == t),
            Err(e) => {
                log::warn!("{a}: {e}");
                false
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub t: usize,
    pub model: String,
    pub algorithm: Algorithm,
    pub coefficient: Coefficient,
    pub trials: usize,
    pub recovered: usize,
    /// Trials whose correlation estimate failed; counted as not recovered.
    pub failures: usize,
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub build: String,
    pub trials: usize,
    pub wall_seconds: f64,
    /// Summed trial compute time per `(T, model)` point, in grid order.
    pub point_seconds: Vec<f64>,
}

fn build_id() -> String {
    format!(
        "{} {} ({})",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        if cfg!(debug_assertions) {
            "debug"
        } else {
            "release"
        }
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    pub fn get(
        &self,
        t: usize,
        model: &Model,
        algorithm: Algorithm,
        coefficient: Coefficient,
    ) -> Option<&ReportRow> {
        let name = model.name();
        self.rows.iter().find(|r| {
            r.t == t && r.model == name && r.algorithm == algorithm && r.coefficient == coefficient
        })
    }

    /// One row per grid point. Contains no timings, so identical configs
    /// give byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "t",
            "model",
            "algorithm",
            "coefficient",
            "trials",
            "recovered",
            "failures",
            "ratio",
            "std_error",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.t.to_string(),
                r.model.clone(),
                r.algorithm.name().to_string(),
                r.coefficient.name().to_string(),
                r.trials.to_string(),
                r.recovered.to_string(),
                r.failures.to_string(),
                format!("{:.6}", r.ratio),
                format!("{:.6}", r.std_error),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

/// Recovery ratios over the full `T x model x algorithm x coefficient` grid.
pub fn run_convergence(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let start = Instant::now();
    let setup = ConvergenceSetup::new(config)?;
    let (nt, nm, l) = (config.t_grid.len(), config.models.len(), config.trials);
    let outcomes = exec.map(nt * nm * l, |idx| {
        let (point, trial) = (idx / l, idx % l);
        let (ti, mi) = (point / nm, point % nm);
        let clock = Instant::now();
        let outcome = setup.recovery_trial(config.t_grid[ti], mi, trial);
        (outcome, clock.elapsed().as_secs_f64())
    });

    let (na, nc) = (config.algorithms.len(), config.coefficients.len());
    let mut rows = Vec::with_capacity(nt * nm * na * nc);
    let mut point_seconds = Vec::with_capacity(nt * nm);
    for (point, chunk) in outcomes.chunks(l).enumerate() {
        let (ti, mi) = (point / nm, point % nm);
        let mut recovered = vec![0usize; nc * na];
        let mut failures = vec![0usize; nc * na];
        let mut seconds = 0.0;
        for (outcome, secs) in chunk {
            seconds += secs;
            let outcome = match outcome {
                Ok(o) => o,
                Err(e) => return Err(Error::DegenerateParameters(format!("trial failed: {e}"))),
            };
            for (c, per_alg) in outcome.iter().enumerate() {
                for (a, r) in per_alg.iter().enumerate() {
                    match r {
                        Some(true) => recovered[c * na + a] += 1,
                        Some(false) => {}
                        None => failures[c * na + a] += 1,
                    }
                }
            }
        }
        point_seconds.push(seconds);
        for (a, &algorithm) in config.algorithms.iter().enumerate() {
            for (c, &coefficient) in config.coefficients.iter().enumerate() {
                let ratio = recovered[c * na + a] as f64 / l as f64;
                rows.push(ReportRow {
                    t: config.t_grid[ti],
                    model: config.models[mi].name(),
                    algorithm,
                    coefficient,
                    trials: l,
                    recovered: recovered[c * na + a],
                    failures: failures[c * na + a],
                    ratio,
                    std_error: binomial_std_error(ratio, l),
                });
            }
        }
    }
    Ok(ExperimentReport {
        rows,
        metadata: ReportMetadata {
            seed: config.seed,
            config_hash: config.hash(),
            build: build_id(),
            trials: l,
            wall_seconds: start.elapsed().as_secs_f64(),
            point_seconds,
        },
    })
}

/// Recovery over a `(rho, T)` grid on two equal blocks with zero correlation across.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoquantConfig {
    pub rho_grid: Vec<f64>,
    pub t_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Size of each of the two blocks.
    pub block_size: usize,
    #[serde(default = "default_iso_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_iso_coefficient")]
    pub coefficient: Coefficient,
    #[serde(default = "default_iso_model")]
    pub model: Model,
}

fn default_iso_algorithm() -> Algorithm {
    Algorithm::Ward
}

fn default_iso_coefficient() -> Coefficient {
    Coefficient::Spearman
}

fn default_iso_model() -> Model {
    Model::Gaussian
}

impl IsoquantConfig {
    pub fn desk() -> Self {
        Self {
            rho_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
            t_grid: vec![25, 50, 100, 200, 400],
            trials: 50,
            seed: DEFAULT_SEED,
            block_size: 20,
            algorithm: Algorithm::Ward,
            coefficient: Coefficient::Spearman,
            model: Model::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.block_size < 2 {
            return Err(Error::DegenerateParameters(
                "isoquant needs trials >= 1 and block_size >= 2".into(),
            ));
        }
        if self.rho_grid.is_empty() || self.rho_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::DegenerateParameters(
                "rho_grid values must lie in (0, 1)".into(),
            ));
        }
        if self.t_grid.is_empty()
            || self.t_grid[0] < 2
            || self.t_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::DegenerateParameters(
                "t_grid must be non-empty, strictly increasing and start at 2 or more".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoquantCell {
    pub rho: f64,
    pub t: usize,
    pub trials: usize,
    pub recovered: usize,
    pub failures: usize,
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoquantReport {
    pub rho_grid: Vec<f64>,
    pub t_grid: Vec<usize>,
    /// Row-major: `cells[r * t_grid.len() + t]`.
    pub cells: Vec<IsoquantCell>,
    pub metadata: ReportMetadata,
}

impl IsoquantReport {
    pub fn cell(&self, rho_index: usize, t_index: usize) -> &IsoquantCell {
        &self.cells[rho_index * self.t_grid.len() + t_index]
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "rho",
            "t",
            "trials",
            "recovered",
            "failures",
            "ratio",
            "std_error",
        ])
        .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.rho.to_string(),
                c.t.to_string(),
                c.trials.to_string(),
                c.recovered.to_string(),
                c.failures.to_string(),
                format!("{:.6}", c.ratio),
                format!("{:.6}", c.std_error),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

pub fn run_isoquant(config: &IsoquantConfig, exec: Execution) -> Result<IsoquantReport> {
    config.validate()?;
    let start = Instant::now();
    let setups = config
        .rho_grid
        .iter()
        .map(|&rho| {
            let h = two_block_hierarchy(config.block_size, rho)?;
            let sampler = Sampler::new(config.model, &build_correlation(&h)?)?;
            Ok((h.partition(1), sampler))
        })
        .collect::<Result<Vec<_>>>()?;
    let (nr, nt, l) = (config.rho_grid.len(), config.t_grid.len(), config.trials);
    let algorithms = [config.algorithm];
    let outcomes = exec.map(nr * nt * l, |idx| {
        let (cell, trial) = (idx / l, idx % l);
        let (ri, ti) = (cell / nt, cell % nt);
        let (truth, sampler) = &setups[ri];
        let t = config.t_grid[ti];
        let seed = derive_seed(
            config.seed,
            &[
                trial as u64,
                t as u64,
                config.model.tag(),
                config.rho_grid[ri].to_bits(),
            ],
        );
        let clock = Instant::now();
        let sample = sampler.sample(t, seed)?;
        let outcome = match correlation_matrix(&sample, config.coefficient) {
            Ok(sigma) => {
                Some(recover(&sigma, std::slice::from_ref(truth), &[2], &algorithms, seed)[0])
            }
            Err(e) => {
                log::warn!(
                    "isoquant trial {trial} (rho={}, T={t}): {e}",
                    config.rho_grid[ri]
                );
                None
            }
        };
        Ok::<_, Error>((outcome, clock.elapsed().as_secs_f64()))
    });

    let mut cells = Vec::with_capacity(nr * nt);
    let mut point_seconds = Vec::with_capacity(nr * nt);
    for (cell, chunk) in outcomes.chunks(l).enumerate() {
        let (ri, ti) = (cell / nt, cell % nt);
        let (mut recovered, mut failures, mut seconds) = (0, 0, 0.0);
        for r in chunk {
            let (outcome, secs) = r
                .as_ref()
                .map_err(|e| Error::DegenerateParameters(e.to_string()))?;
            seconds += secs;
            match outcome {
                Some(true) => recovered += 1,
                Some(false) => {}
                None => failures += 1,
            }
        }
        point_seconds.push(seconds);
        let ratio = recovered as f64 / l as f64;
        cells.push(IsoquantCell {
            rho: config.rho_grid[ri],
            t: config.t_grid[ti],
            trials: l,
            recovered,
            failures,
            ratio,
            std_error: binomial_std_error(ratio, l),
        });
    }
    Ok(IsoquantReport {
        rho_grid: config.rho_grid.clone(),
        t_grid: config.t_grid.clone(),
        cells,
        metadata: ReportMetadata {
            seed: config.seed,
            config_hash: config_hash(config),
            build: build_id(),
            trials: l,
            wall_seconds: start.elapsed().as_secs_f64(),
            point_seconds,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            hierarchy: HierarchySource::Blocks(BlockSpec::node(
                0.1,
                vec![BlockSpec::leaf(5, 0.7), BlockSpec::leaf(5, 0.7)],
            )),
            models: vec![Model::Gaussian],
            algorithms: vec![Algorithm::Ward, Algorithm::Single],
            coefficients: vec![Coefficient::Pearson, Coefficient::Spearman],
            t_grid: vec![20, 60],
            trials: 6,
            seed: 3,
            criterion: RecoveryCriterion::AllLevels,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small_config();
        c.t_grid = vec![50, 20];
        assert!(c.validate().is_err());
        c.t_grid = vec![1, 20];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.trials = 0;
        assert!(run_convergence(&c, Execution::Sequential).is_err());
    }

    #[test]
    fn report_shape_and_bounds() {
        let c = small_config();
        let r = run_convergence(&c, Execution::Sequential).unwrap();
        assert_eq!(r.rows.len(), 2 * 2 * 2);
        for row in &r.rows {
            assert!(row.recovered <= row.trials);
            assert!((0.0..=1.0).contains(&row.ratio));
        }
        let csv = r.to_csv();
        assert!(csv.starts_with(
            "t,model,algorithm,coefficient,trials,recovered,failures,ratio,std_error\n"
        ));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn trials_replay_identically() {
        let setup = ConvergenceSetup::new(&small_config()).unwrap();
        assert_eq!(
            setup.recovery_trial(20, 0, 4).unwrap(),
            setup.recovery_trial(20, 0, 4).unwrap()
        );
    }

    #[test]
    fn noise_free_path_recovers() {
        let setup = ConvergenceSetup::new(&small_config()).unwrap();
        assert!(setup.noise_free().unwrap().iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn config_json_roundtrip() {
        let c = ExperimentConfig::benchmark();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn standard_error() {
        assert_eq!(binomial_std_error(1.0, 100), 0.0);
        assert!((binomial_std_error(0.5, 100) - 0.05).abs() < 1e-15);
    }
}
