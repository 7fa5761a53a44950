use compda::compression::compress_class;
use compda::datasets::synthesize_gaussian;
use compda::discriminant::{
    class_statistics, fit_linear, misclassification_rate, per_class_compressed_covariance,
};
use compda::linalg::{centered_scatter, SymMatrix};
use compda::rng::{child_seed, rng_from_seed};
use compda::theory::{bayes_error, compressed_rule_error};
use compda::{ClassLabel, FitConfig, LinearVariant, MatrixFamily, PopulationModel};
use compda::SparseCompressionMatrix;
use ndarray::{array, Array1, Array2};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = rng_from_seed(seed);
    Array2::from_shape_fn((rows, cols), |_| {
        let v: f64 = StandardNormal.sample(&mut rng);
        v
    })
}

fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn class_compressed_covariance_averages_to_sample_covariance() {
    let x = gaussian_matrix(60, 3, 11);
    let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
    let target = centered_scatter(x.view(), mean.view()) / 60.0;

    let mut sum = Array2::<f64>::zeros((3, 3));
    let dev_at = |r: usize, sum: &Array2<f64>| max_abs(&(sum / r as f64), &target);
    let mut dev_200 = f64::NAN;
    for r in 0..2000 {
        let q = SparseCompressionMatrix::sample(MatrixFamily::SparseRademacher, 10, 60, 0.1, r)
            .unwrap();
        let c = compress_class(ClassLabel::One, x.view(), mean.view(), &q).unwrap();
        sum += &per_class_compressed_covariance(&c).into_inner();
        if r + 1 == 200 {
            dev_200 = dev_at(200, &sum);
        }
    }
    let dev_2000 = dev_at(2000, &sum);
    assert!(dev_2000 < dev_200, "{dev_2000} vs {dev_200}");
}

#[test]
fn count_sketch_is_unbiased_too() {
    let x = gaussian_matrix(40, 2, 5);
    let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
    let target = centered_scatter(x.view(), mean.view()) / 40.0;
    let reps = 4000;
    let mut sum = Array2::<f64>::zeros((2, 2));
    for r in 0..reps {
        let q = SparseCompressionMatrix::sample(MatrixFamily::CountSketch, 8, 40, 0.5, r).unwrap();
        let c = compress_class(ClassLabel::One, x.view(), mean.view(), &q).unwrap();
        sum += &per_class_compressed_covariance(&c).into_inner();
    }
    let avg = sum / reps as f64;
    let scale = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_abs(&avg, &target) < 0.05 * scale, "{avg} vs {target}");
}

fn plane_population() -> PopulationModel {
    let sigma = SymMatrix::new(array![[1.0, 0.3], [0.3, 0.5]]).unwrap();
    PopulationModel::shared(array![0.6, 0.2], array![-0.6, -0.2], sigma, 0.5).unwrap()
}

#[test]
fn exact_error_matches_monte_carlo() {
    let pop = plane_population();
    let train = synthesize_gaussian(&pop, 400, 3).unwrap();
    let config = FitConfig {
        m: 40,
        s: 0.05,
        gamma: 1e-4,
        family: MatrixFamily::SparseRademacher,
        seed: 9,
    };
    let model = fit_linear(&train, LinearVariant::Compressed, &config).unwrap();
    let stats = class_statistics(&train).unwrap();
    let s_c = model.covariance().unwrap().with_ridge(config.gamma);
    let exact = compressed_rule_error(
        &pop,
        stats.d(),
        &s_c,
        stats.mean(ClassLabel::One),
        stats.mean(ClassLabel::Two),
    )
    .unwrap();

    let n = 1_000_000;
    let test = synthesize_gaussian(&pop, n, 4).unwrap();
    let mc = misclassification_rate(&model, &test).unwrap();
    let tol = 3.0 * (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((mc - exact).abs() <= tol, "mc {mc} exact {exact} tol {tol}");
}

fn random_population(p: usize, seed: u64) -> PopulationModel {
    let a = gaussian_matrix(p, p, seed);
    let sigma = SymMatrix::symmetrized(a.t().dot(&a) + Array2::<f64>::eye(p) * 0.5).unwrap();
    let mut rng = rng_from_seed(child_seed(seed, &[1]));
    let mu: Array1<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    PopulationModel::shared(mu.clone(), -mu, sigma, 0.5).unwrap()
}

#[test]
fn fitted_rules_never_beat_bayes() {
    for k in 0..100u64 {
        let pop = random_population(4, k);
        let r_opt = bayes_error(&pop).unwrap();
        let train = synthesize_gaussian(&pop, 60, child_seed(k, &[2])).unwrap();
        let config = FitConfig {
            m: 20,
            s: 0.2,
            gamma: 1e-3,
            family: MatrixFamily::SparseRademacher,
            seed: k,
        };
        let model = fit_linear(&train, LinearVariant::Compressed, &config).unwrap();
        let stats = class_statistics(&train).unwrap();
        let s_c = model.covariance().unwrap().with_ridge(config.gamma);
        let r_c = compressed_rule_error(
            &pop,
            stats.d(),
            &s_c,
            stats.mean(ClassLabel::One),
            stats.mean(ClassLabel::Two),
        )
        .unwrap();
        assert!(r_opt <= r_c + 1e-12, "case {k}: {r_opt} > {r_c}");
    }
}

#[test]
fn plug_in_of_random_populations_recovers_bayes() {
    for k in 0..20u64 {
        let pop = random_population(5, 100 + k);
        let sigma = pop.shared_covariance().unwrap();
        let r = compressed_rule_error(
            &pop,
            pop.delta().view(),
            sigma,
            pop.mean(ClassLabel::One),
            pop.mean(ClassLabel::Two),
        )
        .unwrap();
        assert!((r - bayes_error(&pop).unwrap()).abs() <= 1e-12);
    }
}
