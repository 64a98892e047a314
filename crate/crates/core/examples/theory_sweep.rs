//! Solve the scalar saddle across a lambda grid and print the asymptotic
//! predictions (no simulation involved).
//!
//!     cargo run --release --example theory_sweep

use corrlasso::cgmt::{solve_saddle, ScalarProblem, SolverOptions};
use corrlasso::correlation::CorrelationModel;
use corrlasso::prior::SparsePrior;
use corrlasso::theory::theory_report;

fn main() {
    let spectrum = CorrelationModel::Exponential { rho: 0.7 }
        .spectrum(280)
        .unwrap();
    let prior = SparsePrior::bernoulli(0.1);

    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "lambda", "mse", "phi_on", "phi_off", "eer", "cosine"
    );
    for i in 0..15 {
        let lambda = 0.01 + 0.035 * i as f64;
        let problem = ScalarProblem {
            eigenvalues: spectrum.eigenvalues.clone(),
            n: 400,
            sigma2: 0.01,
            lambda,
            prior: prior.clone(),
        };
        let saddle = solve_saddle(&problem, &SolverOptions::default()).unwrap();
        let report = theory_report(&saddle, &prior, lambda, 0.001).unwrap();
        println!(
            "{:>8.3} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            lambda,
            report.mse,
            report.phi_on,
            report.phi_off,
            report.eer,
            report.cosine.unwrap_or(f64::NAN)
        );
    }
}
