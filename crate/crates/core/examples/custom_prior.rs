//! Predictions for a generic atom-mixture prior, served by the quadrature
//! path instead of the sparse-Bernoulli closed forms.
//!
//!     cargo run --release --example custom_prior

use corrlasso::cgmt::{solve_saddle, ScalarProblem, SolverOptions};
use corrlasso::correlation::CorrelationModel;
use corrlasso::prior::{expectation_e, SparsePrior};
use corrlasso::theory::theory_report;

fn main() {
    // signed sparse prior: nonzeros are +1 or -1 with equal probability
    let prior = SparsePrior::SparseGeneric {
        kappa: 0.1,
        atoms: vec![(1.0, 0.5), (-1.0, 0.5)],
    };
    prior.validate().unwrap();
    println!(
        "E[e(X0 + 0.8 Z; 0.3)] = {:.8}",
        expectation_e(&prior, 0.8, 0.3).unwrap()
    );

    let spectrum = CorrelationModel::Exponential { rho: 0.7 }
        .spectrum(280)
        .unwrap();
    let lambda = 0.15;
    let problem = ScalarProblem {
        eigenvalues: spectrum.eigenvalues,
        n: 400,
        sigma2: 0.01,
        lambda,
        prior: prior.clone(),
    };

    let saddle = solve_saddle(&problem, &SolverOptions::default()).unwrap();
    let report = theory_report(&saddle, &prior, lambda, 0.001).unwrap();
    println!(
        "lambda = {lambda}: mse = {:.6}, phi_on = {:.4}, phi_off = {:.4}, eer = {:.4}, cosine = {:.4}",
        report.mse,
        report.phi_on,
        report.phi_off,
        report.eer,
        report.cosine.unwrap_or(f64::NAN)
    );
}
