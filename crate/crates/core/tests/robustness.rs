//! Distributional robustness of the Monte Carlo harness: the engine only
//! ever consumes the correlation spectrum, so conjugating Sigma by a random
//! orthogonal matrix must leave empirical metrics statistically unchanged.

use corrlasso::correlation::{build_exponential, spectral_decompose, CorrelationModel};
use corrlasso::harness::{run_trial, EmpiricalReport, TrialSettings};
use corrlasso::lasso::LassoOptions;
use corrlasso::prior::SparsePrior;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_orthogonal(m: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    qr.q()
}

fn collect(settings: &TrialSettings, trials: usize, base_seed: u64) -> EmpiricalReport {
    let outcomes: Vec<_> = (0..trials)
        .map(|i| run_trial(settings, base_seed + i as u64).unwrap())
        .collect();
    EmpiricalReport::from_outcomes(&outcomes).unwrap()
}

fn welch_t(a: &corrlasso::harness::MetricStats, b: &corrlasso::harness::MetricStats) -> f64 {
    (a.mean - b.mean) / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

#[test]
fn rotated_sigma_is_statistically_indistinguishable() {
    let (m, n) = (70usize, 100usize);
    let sigma = build_exponential(0.6, m).unwrap();
    let u = random_orthogonal(m, 5);
    let mut rotated = &u * &sigma * u.transpose();
    // symmetrize away the rounding skew before the decomposition
    rotated = 0.5 * (&rotated + rotated.transpose());

    let base_spec = spectral_decompose(&sigma).unwrap();
    let rot_spec = spectral_decompose(&rotated).unwrap();
    for (a, b) in base_spec.eigenvalues.iter().zip(&rot_spec.eigenvalues) {
        assert!((a - b).abs() <= 1e-9, "spectra differ: {a} vs {b}");
    }

    let settings = |spec| TrialSettings {
        spectrum: spec,
        n,
        sigma2: 0.01,
        lambda: 0.1,
        prior: SparsePrior::bernoulli(0.1),
        xi: 0.001,
        solver: LassoOptions::default(),
    };
    let trials = 200;
    // distinct seed ranges: two independent samples for the two-sample test
    let base = collect(&settings(base_spec), trials, 10_000);
    let rot = collect(&settings(rot_spec), trials, 20_000);

    // two-sample t at alpha = 0.01 (normal quantile 2.576)
    for (name, a, b) in [
        ("mse", &base.mse, &rot.mse),
        ("phi_on", &base.phi_on, &rot.phi_on),
        ("phi_off", &base.phi_off, &rot.phi_off),
        ("eer", &base.eer, &rot.eer),
    ] {
        let t = welch_t(a, b);
        assert!(
            t.abs() < 2.576,
            "{name}: |t| = {:.3} (means {} vs {})",
            t.abs(),
            a.mean,
            b.mean
        );
    }
}

#[test]
fn explicit_model_round_trips_exponential() {
    let m = 40;
    let sigma = build_exponential(0.7, m).unwrap();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| sigma[(i, j)]).collect())
        .collect();
    let explicit = CorrelationModel::Explicit { rows }.spectrum(m).unwrap();
    let direct = CorrelationModel::Exponential { rho: 0.7 }
        .spectrum(m)
        .unwrap();
    for (a, b) in explicit.eigenvalues.iter().zip(&direct.eigenvalues) {
        assert!((a - b).abs() <= 1e-12);
    }
}
