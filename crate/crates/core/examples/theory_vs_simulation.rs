//! Paired theory/empirical sweep at reduced scale, rendered as CSV to
//! stdout. The same pipeline behind `corrlasso compare`.
//!
//!     cargo run --release --example theory_vs_simulation

use corrlasso::config::ProblemConfig;
use corrlasso::harness::run_sweep;
use corrlasso::report::render_csv;

fn main() {
    let config = ProblemConfig::from_toml(
        r#"
        n = 200
        delta = 0.7
        kappa = 0.1
        rho = 0.7
        sigma2 = 0.01
        trials = 50
        base_seed = 7
        lambda = { start = 0.02, stop = 0.45, count = 8 }
    "#,
    )
    .unwrap();

    let points = run_sweep(&config).unwrap();
    print!("{}", render_csv(&config, &points).unwrap());
}
