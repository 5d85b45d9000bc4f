use hcbm::estimators::{correlation_matrix, pearson, Coefficient};
use hcbm::model::benchmark_hierarchy;
use hcbm::sampler::{sample, SamplerSpec};
use hcbm::{build_correlation, CorrelationMatrix, Error, Model, SampleMatrix, Sampler};
use nalgebra::DMatrix;

fn two_by_two(rho: f64) -> CorrelationMatrix {
    CorrelationMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])).unwrap()
}

fn excess_kurtosis(x: &[f64]) -> f64 {
    let t = x.len() as f64;
    let mean = x.iter().sum::<f64>() / t;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / t;
    m4 / (m2 * m2) - 3.0
}

#[test]
fn independent_gaussian_columns_are_uncorrelated() {
    let s = Sampler::new(Model::Gaussian, &CorrelationMatrix::identity(2)).unwrap();
    for seed in 0..3 {
        let x = s.sample(100_000, seed).unwrap();
        assert!(pearson(x.column(0), x.column(1)).unwrap().abs() <= 0.02);
    }
}

#[test]
fn student_t_reproduces_the_target_correlation() {
    let s = Sampler::new(Model::student_t(), &two_by_two(0.7)).unwrap();
    for seed in 0..10 {
        let x = s.sample(100_000, seed).unwrap();
        let r = pearson(x.column(0), x.column(1)).unwrap();
        assert!((r - 0.7).abs() <= 0.05, "seed {seed}: {r}");
    }
}

#[test]
fn student_t_has_heavy_tails() {
    let sigma = CorrelationMatrix::identity(3);
    let g = Sampler::new(Model::Gaussian, &sigma).unwrap();
    let t = Sampler::new(Model::student_t(), &sigma).unwrap();
    for seed in 0..5 {
        let (xg, xt) = (
            g.sample(20_000, seed).unwrap(),
            t.sample(20_000, seed).unwrap(),
        );
        for c in 0..3 {
            let (kg, kt) = (excess_kurtosis(xg.column(c)), excess_kurtosis(xt.column(c)));
            assert!(kt > 1.0 && kt > kg, "seed {seed}, column {c}: {kt} vs {kg}");
        }
    }
}

#[test]
fn shared_divisor_creates_tail_dependence() {
    let sigma = CorrelationMatrix::identity(4);
    let squares =
        |x: &SampleMatrix, c: usize| x.column(c).iter().map(|v| v * v).collect::<Vec<_>>();
    let t = Sampler::new(Model::student_t(), &sigma)
        .unwrap()
        .sample(50_000, 9)
        .unwrap();
    let g = Sampler::new(Model::Gaussian, &sigma)
        .unwrap()
        .sample(50_000, 9)
        .unwrap();
    for (a, b) in [(0, 1), (1, 3), (2, 3)] {
        assert!(pearson(&squares(&t, a), &squares(&t, b)).unwrap() > 0.05);
        assert!(pearson(&squares(&g, a), &squares(&g, b)).unwrap().abs() < 0.03);
    }
}

#[test]
fn benchmark_covariance_converges() {
    let sigma = build_correlation(&benchmark_hierarchy()).unwrap();
    let s = Sampler::new(Model::Gaussian, &sigma).unwrap();
    let t = 100_000;
    let tol = 10.0 / (t as f64).sqrt();
    for seed in 0..10 {
        let x = s.sample(t, seed).unwrap();
        let cov = x.as_matrix().tr_mul(x.as_matrix()) / t as f64;
        let dev = (cov - sigma.as_matrix()).abs().max();
        assert!(dev <= tol, "seed {seed}: {dev}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let sigma = build_correlation(&benchmark_hierarchy()).unwrap();
    for model in [Model::Gaussian, Model::student_t()] {
        let spec = SamplerSpec {
            model,
            correlation: sigma.clone(),
            seed: 77,
        };
        let (a, b) = (sample(&spec, 40).unwrap(), sample(&spec, 40).unwrap());
        assert_eq!(a.as_matrix().as_slice(), b.as_matrix().as_slice());
        assert_eq!(
            correlation_matrix(&a, Coefficient::Spearman).unwrap(),
            correlation_matrix(&b, Coefficient::Spearman).unwrap()
        );
    }
}

#[test]
fn rejects_bad_parameters() {
    let sigma = two_by_two(0.2);
    assert!(matches!(
        Sampler::new(Model::StudentT { nu: 2.0 }, &sigma),
        Err(Error::DegenerateParameters(_))
    ));
    let s = Sampler::new(Model::Gaussian, &sigma).unwrap();
    assert!(matches!(
        s.sample(1, 0),
        Err(Error::DegenerateParameters(_))
    ));
    let bad = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { -0.9 });
    assert!(matches!(
        CorrelationMatrix::new(bad),
        Err(Error::NotPositiveSemiDefinite { .. })
    ));
}

#[test]
fn rank_deficient_matrices_are_accepted() {
    // all-ones block: rank one, smallest eigenvalue zero up to rounding
    let sigma = CorrelationMatrix::new(DMatrix::from_element(5, 5, 1.0)).unwrap();
    let x = Sampler::new(Model::Gaussian, &sigma)
        .unwrap()
        .sample(100, 1)
        .unwrap();
    for c in 1..5 {
        assert!((pearson(x.column(0), x.column(c)).unwrap() - 1.0).abs() < 1e-9);
    }
}
