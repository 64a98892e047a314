//! Monte Carlo harness: generates correlated-design trials, solves the
//! LASSO, evaluates the empirical metrics and aggregates them across
//! reproducibly seeded trials.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cgmt::{solve_saddle, ScalarProblem, SolverOptions};
use crate::config::{ProblemConfig, RunMode};
use crate::correlation::CorrelationSpectrum;
use crate::lasso::{solve_lasso, LassoInstance, LassoOptions};
use crate::prior::{sample_signal, SignalVector, SparsePrior};
use crate::theory::{theory_report, TheoryReport};
use crate::{Error, Result};

/// Everything one trial needs, resolved from the config once per sweep.
#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub spectrum: CorrelationSpectrum,
    pub n: usize,
    pub sigma2: f64,
    pub lambda: f64,
    pub prior: SparsePrior,
    pub xi: f64,
    pub solver: LassoOptions,
}

/// Per-trial metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub mse: f64,
    pub phi_on: f64,
    pub phi_off: f64,
    pub eer: f64,
    /// None when the estimate is identically zero.
    pub cosine: Option<f64>,
    pub solver_converged: bool,
    pub seed: u64,
}

/// Mean / standard deviation / standard error of one metric over trials.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MetricStats {
    fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let stddev = if samples.len() > 1 {
            (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MetricStats {
            mean,
            stddev,
            stderr: stddev / n.sqrt(),
            count: samples.len(),
        })
    }
}

/// Aggregated metrics over a batch of trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub mse: MetricStats,
    pub phi_on: MetricStats,
    pub phi_off: MetricStats,
    pub eer: MetricStats,
    /// Aggregated over trials where the cosine was defined.
    pub cosine: Option<MetricStats>,
    pub trial_count: usize,
    pub nonconverged_count: usize,
    pub cosine_undefined_count: usize,
}

impl EmpiricalReport {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::invalid("need at least one trial"));
        }
        let collect =
            |f: fn(&TrialOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
        let cosines: Vec<f64> = outcomes.iter().filter_map(|o| o.cosine).collect();
        Ok(EmpiricalReport {
            mse: MetricStats::from_samples(&collect(|o| o.mse)).unwrap(),
            phi_on: MetricStats::from_samples(&collect(|o| o.phi_on)).unwrap(),
            phi_off: MetricStats::from_samples(&collect(|o| o.phi_off)).unwrap(),
            eer: MetricStats::from_samples(&collect(|o| o.eer)).unwrap(),
            cosine: MetricStats::from_samples(&cosines),
            trial_count: outcomes.len(),
            nonconverged_count: outcomes.iter().filter(|o| !o.solver_converged).count(),
            cosine_undefined_count: outcomes.iter().filter(|o| o.cosine.is_none()).count(),
        })
    }
}

/// Literal evaluation of the five per-trial metrics.
///
/// `phi_on` averages the detections `|x_i| >= xi` over support indices,
/// `phi_off` the rejections `|x_i| <= xi` off support; the EER is computed
/// from its own strict-inequality definition, not from the identity.
pub fn empirical_metrics(
    x_hat: &DVector<f64>,
    x0: &SignalVector,
    xi: f64,
) -> Result<(f64, f64, f64, f64, Option<f64>)> {
    if x_hat.len() != x0.n() {
        return Err(Error::invalid("estimate and signal lengths differ"));
    }
    if x0.k() == 0 {
        return Err(Error::invalid("signal support is empty"));
    }
    if xi <= 0.0 {
        return Err(Error::invalid("xi must be positive"));
    }
    let n = x0.n();
    let k = x0.k();
    let on_support = {
        let mut mask = vec![false; n];
        for &i in &x0.support {
            mask[i] = true;
        }
        mask
    };

    let mse = (x_hat - &x0.entries).norm_squared() / n as f64;

    let mut detected = 0usize;
    let mut rejected = 0usize;
    let mut missed = 0usize;
    let mut false_alarm = 0usize;
    for i in 0..n {
        let mag = x_hat[i].abs();
        if on_support[i] {
            if mag >= xi {
                detected += 1;
            }
            if mag < xi {
                missed += 1;
            }
        } else {
            if mag <= xi {
                rejected += 1;
            }
            if mag > xi {
                false_alarm += 1;
            }
        }
    }
    let phi_on = detected as f64 / k as f64;
    let phi_off = rejected as f64 / (n - k) as f64;
    let eer = missed as f64 / k as f64 + false_alarm as f64 / (n - k) as f64;

    let xh_norm = x_hat.norm();
    let cosine = if xh_norm == 0.0 {
        None
    } else {
        Some(x_hat.dot(&x0.entries) / (xh_norm * x0.entries.norm()))
    };

    Ok((mse, phi_on, phi_off, eer, cosine))
}

/// Run one seeded trial: draw `H` with iid `N(0, 1/n)` entries, form
/// `A = sqrt_factor * H`, draw the signal and noise, solve the LASSO and
/// score it. Fully deterministic given the seed.
pub fn run_trial(settings: &TrialSettings, seed: u64) -> Result<TrialOutcome> {
    let m = settings.spectrum.m;
    let n = settings.n;

    // independent substreams for H, signal and noise under one trial seed
    let mut rng_h = ChaCha8Rng::seed_from_u64(seed);
    rng_h.set_stream(1);
    let mut rng_z = ChaCha8Rng::seed_from_u64(seed);
    rng_z.set_stream(2);

    let h_std = (1.0 / n as f64).sqrt();
    let normal_h = Normal::new(0.0, h_std).map_err(|e| Error::invalid(e.to_string()))?;
    let h = DMatrix::from_fn(m, n, |_, _| normal_h.sample(&mut rng_h));
    let design = &settings.spectrum.sqrt_factor * h;

    let x0 = sample_signal(&settings.prior, n, seed)?;

    let normal_z =
        Normal::new(0.0, settings.sigma2.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let z = DVector::from_fn(m, |_, _| normal_z.sample(&mut rng_z));
    let y = &design * &x0.entries + z;

    let instance = LassoInstance::new(design, y, settings.lambda)?;
    let solution = solve_lasso(&instance, &settings.solver)?;

    let (mse, phi_on, phi_off, eer, cosine) =
        empirical_metrics(&solution.estimate, &x0, settings.xi)?;
    Ok(TrialOutcome {
        mse,
        phi_on,
        phi_off,
        eer,
        cosine,
        solver_converged: solution.converged,
        seed,
    })
}

/// One grid point of a sweep: the theory and empirical reports, or the
/// failure that prevented them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub theory: Option<TheoryReport>,
    pub empirical: Option<EmpiricalReport>,
    pub error: Option<String>,
}

/// Run the configured lambda sweep: per grid point one saddle solve plus
/// `trials` seeded trials (seeds `base_seed + index`). Per-point failures
/// are recorded and the sweep continues.
pub fn run_sweep(config: &ProblemConfig) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let spectrum = config.correlation_model().spectrum(config.m())?;
    let lambdas = config.lambda.values()?;
    let prior = config.prior();
    let sigma2 = config.sigma2();

    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let point = run_point(config, &spectrum, &prior, sigma2, lambda);
        points.push(match point {
            Ok(p) => p,
            Err(e) => SweepPoint {
                lambda,
                theory: None,
                empirical: None,
                error: Some(e.to_string()),
            },
        });
    }
    Ok(points)
}

fn run_point(
    config: &ProblemConfig,
    spectrum: &CorrelationSpectrum,
    prior: &SparsePrior,
    sigma2: f64,
    lambda: f64,
) -> Result<SweepPoint> {
    let theory = if config.mode != RunMode::Empirical {
        let problem = ScalarProblem {
            eigenvalues: spectrum.eigenvalues.clone(),
            n: config.n,
            sigma2,
            lambda,
            prior: prior.clone(),
        };
        let saddle = solve_saddle(&problem, &SolverOptions::default())?;
        Some(theory_report(&saddle, prior, lambda, config.xi)?)
    } else {
        None
    };

    let empirical = if config.mode != RunMode::Theory {
        let settings = TrialSettings {
            spectrum: spectrum.clone(),
            n: config.n,
            sigma2,
            lambda,
            prior: prior.clone(),
            xi: config.xi,
            solver: LassoOptions::default(),
        };
        let mut outcomes = Vec::with_capacity(config.trials);
        for idx in 0..config.trials {
            outcomes.push(run_trial(&settings, config.base_seed + idx as u64)?);
        }
        Some(EmpiricalReport::from_outcomes(&outcomes)?)
    } else {
        None
    };

    Ok(SweepPoint {
        lambda,
        theory,
        empirical,
        error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::CorrelationModel;
    use approx::assert_abs_diff_eq;

    fn settings(n: usize, delta: f64, rho: f64, sigma2: f64, lambda: f64) -> TrialSettings {
        let m = (delta * n as f64).round() as usize;
        let model = if rho == 0.0 {
            CorrelationModel::Identity
        } else {
            CorrelationModel::Exponential { rho }
        };
        TrialSettings {
            spectrum: model.spectrum(m).unwrap(),
            n,
            sigma2,
            lambda,
            prior: SparsePrior::bernoulli(0.1),
            xi: 0.001,
            solver: LassoOptions::default(),
        }
    }

    #[test]
    fn metrics_of_perfect_estimate() {
        let prior = SparsePrior::bernoulli(0.1);
        let x0 = sample_signal(&prior, 50, 1).unwrap();
        let (mse, on, off, eer, cos) = empirical_metrics(&x0.entries, &x0, 0.001).unwrap();
        assert_abs_diff_eq!(mse, 0.0);
        assert_abs_diff_eq!(on, 1.0);
        assert_abs_diff_eq!(off, 1.0);
        assert_abs_diff_eq!(eer, 0.0);
        assert_abs_diff_eq!(cos.unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn metrics_of_zero_estimate() {
        let prior = SparsePrior::bernoulli(0.1);
        let x0 = sample_signal(&prior, 100, 2).unwrap();
        let zero = DVector::zeros(100);
        let (mse, on, off, eer, cos) = empirical_metrics(&zero, &x0, 0.001).unwrap();
        assert_abs_diff_eq!(mse, 0.1, epsilon = 1e-15); // k/n for unit atoms
        assert_abs_diff_eq!(on, 0.0);
        assert_abs_diff_eq!(off, 1.0);
        assert_abs_diff_eq!(eer, 1.0);
        assert!(cos.is_none());
    }

    #[test]
    fn metrics_scale_invariance_of_cosine() {
        let prior = SparsePrior::bernoulli(0.1);
        let x0 = sample_signal(&prior, 100, 3).unwrap();
        let scaled = &x0.entries * 2.0;
        let (mse, _, _, _, cos) = empirical_metrics(&scaled, &x0, 0.001).unwrap();
        assert_abs_diff_eq!(cos.unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mse, 0.1, epsilon = 1e-15); // ||x0||^2 / n
    }

    #[test]
    fn metrics_agree_with_direct_reimplementation() {
        // independent scalar-loop evaluation of all five formulas
        let prior = SparsePrior::bernoulli(0.3);
        let x0 = sample_signal(&prior, 10, 4).unwrap();
        let x_hat = DVector::from_fn(10, |i, _| (i as f64 - 4.5) / 3.0);
        let xi = 0.2;
        let (mse, on, off, eer, cos) = empirical_metrics(&x_hat, &x0, xi).unwrap();

        let k = x0.k();
        let n = 10;
        let mut sq = 0.0;
        let mut dot = 0.0;
        let (mut nh, mut n0) = (0.0, 0.0);
        let (mut det, mut rej, mut miss, mut fa) = (0, 0, 0, 0);
        for i in 0..n {
            let d: f64 = x_hat[i] - x0.entries[i];
            sq += d * d;
            dot += x_hat[i] * x0.entries[i];
            nh += x_hat[i] * x_hat[i];
            n0 += x0.entries[i] * x0.entries[i];
            let on_s = x0.support.contains(&i);
            if on_s && x_hat[i].abs() >= xi {
                det += 1;
            }
            if on_s && x_hat[i].abs() < xi {
                miss += 1;
            }
            if !on_s && x_hat[i].abs() <= xi {
                rej += 1;
            }
            if !on_s && x_hat[i].abs() > xi {
                fa += 1;
            }
        }
        assert_abs_diff_eq!(mse, sq / n as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(on, det as f64 / k as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(off, rej as f64 / (n - k) as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(
            eer,
            miss as f64 / k as f64 + fa as f64 / (n - k) as f64,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(cos.unwrap(), dot / (nh.sqrt() * n0.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn eer_identity_per_trial() {
        let s = settings(60, 0.7, 0.7, 0.01, 0.1);
        for seed in 0..5 {
            let o = run_trial(&s, seed).unwrap();
            assert!((o.eer - (2.0 - o.phi_on - o.phi_off)).abs() <= 1e-12);
            assert!(o.phi_on >= 0.0 && o.phi_on <= 1.0);
            assert!(o.phi_off >= 0.0 && o.phi_off <= 1.0);
        }
    }

    #[test]
    fn trial_determinism() {
        let s = settings(60, 0.7, 0.7, 0.01, 0.1);
        let a = run_trial(&s, 17).unwrap();
        let b = run_trial(&s, 17).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&s, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_overdetermined_recovery() {
        let s = settings(40, 2.0, 0.0, 1e-12, 1e-8);
        let o = run_trial(&s, 5).unwrap();
        assert!(o.mse < 1e-6, "mse = {}", o.mse);
    }

    #[test]
    fn sweep_degenerate_single_point() {
        let cfg = ProblemConfig::from_toml(
            r#"
            n = 60
            delta = 0.7
            kappa = 0.1
            rho = 0.7
            sigma2 = 0.01
            lambda = 0.1
            trials = 1
            base_seed = 0
        "#,
        )
        .unwrap();
        let points = run_sweep(&cfg).unwrap();
        assert_eq!(points.len(), 1);
        let p = &points[0];
        assert!(p.error.is_none());
        let emp = p.empirical.as_ref().unwrap();
        assert_eq!(emp.trial_count, 1);
        // single trial must match run_trial directly
        let s = settings(60, 0.7, 0.7, 0.01, 0.1);
        let o = run_trial(&s, 0).unwrap();
        assert_abs_diff_eq!(emp.mse.mean, o.mse, epsilon = 1e-15);
        assert!(p.theory.is_some());
    }

    #[test]
    fn sweep_determinism() {
        let cfg = ProblemConfig::from_toml(
            r#"
            n = 50
            delta = 0.7
            kappa = 0.1
            rho = 0.5
            sigma2 = 0.01
            lambda = { start = 0.05, stop = 0.2, count = 2 }
            trials = 3
            base_seed = 9
            mode = "empirical"
        "#,
        )
        .unwrap();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            let ea = pa.empirical.as_ref().unwrap();
            let eb = pb.empirical.as_ref().unwrap();
            assert_eq!(ea.mse.mean.to_bits(), eb.mse.mean.to_bits());
            assert_eq!(ea.eer.mean.to_bits(), eb.eer.mean.to_bits());
        }
    }
}
