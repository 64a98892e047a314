//! The LASSO solver on its own: a small random instance, KKT residual and
//! the closed-form identity-design check.
//!
//!     cargo run --release --example lasso_solver

use corrlasso::kernels::soft_threshold;
use corrlasso::lasso::{kkt_residual, solve_lasso, LassoInstance, LassoOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = DMatrix::from_fn(40, 100, |_, _| rng.gen_range(-1.0..1.0) / 8.0);
    let y = DVector::from_fn(40, |_, _| rng.gen_range(-1.0..1.0));
    let instance = LassoInstance::new(a, y, 0.2).unwrap();

    let solution = solve_lasso(&instance, &LassoOptions::default()).unwrap();
    let nonzeros = solution.estimate.iter().filter(|&&v| v != 0.0).count();
    println!(
        "objective = {:.8}, iterations = {}, kkt = {:.2e}, nonzeros = {}/100",
        solution.objective, solution.iterations, solution.kkt_residual, nonzeros
    );
    println!(
        "recomputed kkt residual: {:.2e}",
        kkt_residual(&instance, &solution.estimate)
    );

    // identity design solves coordinatewise to eta(y_i; lambda/2)
    let y = DVector::from_fn(6, |i, _| (i as f64 - 2.5) / 2.0);
    let inst = LassoInstance::new(DMatrix::identity(6, 6), y.clone(), 0.6).unwrap();
    let sol = solve_lasso(&inst, &LassoOptions::default()).unwrap();
    for i in 0..6 {
        println!(
            "y = {:+.2} -> x = {:+.6} (closed form {:+.6})",
            y[i],
            sol.estimate[i],
            soft_threshold(y[i], 0.3)
        );
    }
}
