use criterion::{criterion_group, criterion_main, Criterion};
use hcbm::experiments::{run_convergence, ExperimentConfig, HierarchySource};
use hcbm::model::BenchmarkParams;
use hcbm::{Algorithm, Coefficient, Execution, Model};

fn config() -> ExperimentConfig {
    ExperimentConfig {
        hierarchy: HierarchySource::Benchmark265(BenchmarkParams::default()),
        models: vec![Model::Gaussian],
        algorithms: vec![Algorithm::Average, Algorithm::Ward],
        coefficients: vec![Coefficient::Spearman],
        t_grid: vec![100],
        trials: 8,
        seed: 1,
        ..ExperimentConfig::benchmark()
    }
}

fn trials(c: &mut Criterion) {
    let config = config();
    let mut group = c.benchmark_group("convergence_trials");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| run_convergence(&config, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
