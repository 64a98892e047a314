//! Inspect the exponential correlation model: eigenvalue range, normalized
//! trace and the square-root factor used to color the design matrix.
//!
//!     cargo run --release --example correlation_spectrum

use corrlasso::correlation::{build_exponential, spectral_decompose};

fn main() {
    for &rho in &[0.0, 0.3, 0.7, 0.9] {
        let sigma = build_exponential(rho, 280).unwrap();
        let spectrum = spectral_decompose(&sigma).unwrap();
        let gmin = spectrum.eigenvalues.first().unwrap();
        let gmax = spectrum.gamma_max();
        println!(
            "rho = {rho}: eigenvalues in [{gmin:.4}, {gmax:.4}], trace/m = {:.6}, condition = {:.2}",
            spectrum.normalized_trace(),
            gmax / gmin
        );

        // sqrt_factor squares back to sigma
        let err = (&spectrum.sqrt_factor * &spectrum.sqrt_factor - &sigma).norm();
        println!("  reconstruction |S*S - Sigma|_F = {err:.2e}");
    }
}
