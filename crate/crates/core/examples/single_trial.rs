//! Run one seeded Monte Carlo trial end to end: correlated design, sparse
//! signal, LASSO solve, per-trial metrics.
//!
//!     cargo run --release --example single_trial

use corrlasso::correlation::CorrelationModel;
use corrlasso::harness::{run_trial, TrialSettings};
use corrlasso::lasso::LassoOptions;
use corrlasso::prior::SparsePrior;

fn main() {
    let settings = TrialSettings {
        spectrum: CorrelationModel::Exponential { rho: 0.7 }
            .spectrum(280)
            .unwrap(),
        n: 400,
        sigma2: 0.01,
        lambda: 0.15,
        prior: SparsePrior::bernoulli(0.1),
        xi: 0.001,
        solver: LassoOptions::default(),
    };

    for seed in 0..5 {
        let outcome = run_trial(&settings, seed).unwrap();
        println!(
            "seed {seed}: mse = {:.6}, phi_on = {:.3}, phi_off = {:.3}, eer = {:.3}, cosine = {:.4}, converged = {}",
            outcome.mse,
            outcome.phi_on,
            outcome.phi_off,
            outcome.eer,
            outcome.cosine.unwrap_or(f64::NAN),
            outcome.solver_converged
        );
    }
}
