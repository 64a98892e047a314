//! Slice the scalarized objective through the saddle to see the min-max
//! geometry: the reduced alpha objective is convex while the raw beta and
//! chi sections are concave.
//!
//!     cargo run --release --example saddle_landscape

use corrlasso::cgmt::{
    objective_d, reduced_alpha_curvature, solve_saddle, ScalarProblem, SolverOptions,
};
use corrlasso::correlation::CorrelationModel;
use corrlasso::prior::SparsePrior;

fn main() {
    let spectrum = CorrelationModel::Exponential { rho: 0.7 }
        .spectrum(280)
        .unwrap();
    let problem = ScalarProblem {
        eigenvalues: spectrum.eigenvalues,
        n: 400,
        sigma2: 0.01,
        lambda: 0.15,
        prior: SparsePrior::bernoulli(0.1),
    };

    let s = solve_saddle(&problem, &SolverOptions::default()).unwrap();
    println!(
        "saddle: alpha = {:.6}, beta = {:.6}, chi = {:.6}, mu = {:.6}, |grad| = {:.2e}",
        s.alpha_star, s.beta_star, s.chi_star, s.mu_star, s.grad_norm
    );

    println!("\nbeta section (concave through the saddle):");
    for i in -2i32..=2 {
        let beta = s.beta_star * (1.0 + 0.05 * i as f64);
        let v = objective_d(&problem, s.alpha_star, beta, s.chi_star).unwrap();
        println!("  beta = {beta:.5} -> D = {v:.9}");
    }

    println!("\nchi section (concave through the saddle):");
    for i in -2i32..=2 {
        let chi = s.chi_star * (1.0 + 0.05 * i as f64);
        let v = objective_d(&problem, s.alpha_star, s.beta_star, chi).unwrap();
        println!("  chi = {chi:.5} -> D = {v:.9}");
    }

    let curv =
        reduced_alpha_curvature(&problem, (s.alpha_star, s.beta_star, s.chi_star), 1e-3).unwrap();
    println!("\nreduced alpha curvature (max over beta, chi re-solved): {curv:.3}");
}
