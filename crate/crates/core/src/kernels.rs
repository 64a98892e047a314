//! Scalar building blocks: the piecewise cost kernel `e(a; b)`, the
//! soft-thresholding map `eta(a; b)`, Gaussian tail functions and
//! Gauss-Hermite quadrature nodes.

use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Which case of the piecewise definitions fired for a given `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `a > b`
    Upper,
    /// `|a| <= b` (boundary points included)
    Middle,
    /// `a < -b`
    Lower,
}

/// A piecewise evaluation together with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseEval {
    pub value: f64,
    pub branch: Branch,
}

fn branch_of(a: f64, b: f64) -> Branch {
    if a > b {
        Branch::Upper
    } else if a < -b {
        Branch::Lower
    } else {
        Branch::Middle
    }
}

/// The cost kernel
/// `e(a; b) = b*a - b^2/2` for `a > b`, `a^2/2` for `|a| <= b`,
/// `-b*a - b^2/2` for `a < -b`.
///
/// Continuous and differentiable in `a`; even in `a`.
pub fn cost_e(a: f64, b: f64) -> f64 {
    assert!(b > 0.0, "cost_e requires b > 0, got b = {b}");
    match branch_of(a, b) {
        Branch::Upper => b * a - 0.5 * b * b,
        Branch::Middle => 0.5 * a * a,
        Branch::Lower => -b * a - 0.5 * b * b,
    }
}

/// `cost_e` with the branch that fired attached.
pub fn cost_e_eval(a: f64, b: f64) -> PiecewiseEval {
    let branch = branch_of(a, b);
    PiecewiseEval {
        value: cost_e(a, b),
        branch,
    }
}

/// Soft threshold `eta(a; b) = sign(a) * max(|a| - b, 0)`.
pub fn soft_threshold(a: f64, b: f64) -> f64 {
    assert!(b > 0.0, "soft_threshold requires b > 0, got b = {b}");
    match branch_of(a, b) {
        Branch::Upper => a - b,
        Branch::Middle => 0.0,
        Branch::Lower => a + b,
    }
}

/// Standard normal density `phi(x) = exp(-x^2/2) / sqrt(2*pi)`.
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Gaussian Q-function `Q(x) = P[Z > x]`, via the complementary error
/// function so deep tails (`x > 8`) keep relative accuracy.
pub fn gauss_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Error function, exposed because the sparse-Bernoulli closed forms use it
/// directly.
pub fn erf_fn(x: f64) -> f64 {
    libm::erf(x)
}

/// Gauss-Hermite nodes and weights in probabilists' normalization:
/// `sum_i w_i f(x_i) ~ E[f(Z)]` for `Z ~ N(0, 1)`.
///
/// Computed by the Golub-Welsch eigendecomposition of the Jacobi matrix of
/// the (monic) probabilists' Hermite recurrence.
pub fn hermite_nodes(n_nodes: usize) -> Vec<(f64, f64)> {
    assert!(n_nodes >= 1, "hermite_nodes requires at least one node");
    if n_nodes == 1 {
        return vec![(0.0, 1.0)];
    }
    // Jacobi matrix: zero diagonal, off-diagonal sqrt(k).
    let mut jacobi = DMatrix::<f64>::zeros(n_nodes, n_nodes);
    for k in 1..n_nodes {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n_nodes)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let first = eig.eigenvectors[(0, i)];
            (node, first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Expectation `E[f(Z)]` over standard normal `Z` using precomputed nodes.
pub fn hermite_expectation(nodes: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    nodes.iter().map(|&(x, w)| w * f(x)).sum()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, via Golub-Welsch on the
/// Legendre Jacobi matrix.
pub fn legendre_nodes(n_nodes: usize) -> Vec<(f64, f64)> {
    assert!(n_nodes >= 1, "legendre_nodes requires at least one node");
    if n_nodes == 1 {
        return vec![(0.0, 2.0)];
    }
    let mut jacobi = DMatrix::<f64>::zeros(n_nodes, n_nodes);
    for k in 1..n_nodes {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n_nodes)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let first = eig.eigenvectors[(0, i)];
            (node, 2.0 * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

const GAUSSIAN_TRUNCATION: f64 = 12.0;
const SEGMENT_NODES: usize = 80;

fn segment_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| legendre_nodes(SEGMENT_NODES))
}

/// `E[f(Z)]` for standard normal `Z` where `f` is smooth except at the given
/// breakpoints. The real line is truncated at +/-12 sigma, split at the
/// breakpoints, and each segment is integrated against the Gaussian density
/// by Gauss-Legendre. On piecewise-smooth integrands this reaches machine
/// precision, which plain Gauss-Hermite does not near a kink.
pub fn gaussian_expectation_with_kinks(breakpoints: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let left = -GAUSSIAN_TRUNCATION;
    let right = GAUSSIAN_TRUNCATION;
    let mut cuts = vec![left];
    let mut interior: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > left && *b < right)
        .collect();
    interior.sort_by(f64::total_cmp);
    cuts.extend(interior);
    cuts.push(right);
    let nodes = segment_nodes();
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a <= 0.0 {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut seg = 0.0;
        for &(x, w) in nodes {
            let z = mid + half * x;
            seg += w * normal_pdf(z) * f(z);
        }
        total += half * seg;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cost_e_branches() {
        assert_abs_diff_eq!(cost_e(2.0, 1.0), 1.5);
        assert_abs_diff_eq!(cost_e(0.5, 1.0), 0.125);
        assert_abs_diff_eq!(cost_e(-2.0, 1.0), 1.5);
        assert_eq!(cost_e_eval(2.0, 1.0).branch, Branch::Upper);
        assert_eq!(cost_e_eval(1.0, 1.0).branch, Branch::Middle);
        assert_eq!(cost_e_eval(-1.5, 1.0).branch, Branch::Lower);
    }

    #[test]
    fn cost_e_continuity_at_breakpoints() {
        for &b in &[0.3, 1.0, 2.5] {
            let eps = 1e-9;
            for &a in &[b, -b] {
                let left = cost_e(a - eps, b);
                let right = cost_e(a + eps, b);
                assert!((left - right).abs() < 1e-8, "jump at a = {a}, b = {b}");
            }
            // exact agreement of the adjacent branch formulas at a = b
            assert_abs_diff_eq!(b * b - 0.5 * b * b, 0.5 * b * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cost_e_derivative_matches_clip() {
        // d/da e(a;b) = b*sign(a) outside [-b, b], a inside.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let a = 6.0 * next() - 3.0;
            let b = 0.1 + 2.0 * next();
            if (a.abs() - b).abs() < 1e-4 {
                continue; // kink neighborhood, fd is meaningless there
            }
            let h = 1e-6;
            let fd = (cost_e(a + h, b) - cost_e(a - h, b)) / (2.0 * h);
            let exact = if a > b {
                b
            } else if a < -b {
                -b
            } else {
                a
            };
            assert!(
                (fd - exact).abs() <= 1e-8,
                "a={a}, b={b}: fd={fd}, exact={exact}"
            );
        }
    }

    #[test]
    fn soft_threshold_values() {
        assert_abs_diff_eq!(soft_threshold(2.0, 1.0), 1.0);
        assert_abs_diff_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_abs_diff_eq!(soft_threshold(-2.0, 1.0), -1.0);
        assert_abs_diff_eq!(soft_threshold(1.0, 1.0), 0.0); // boundary is middle
    }

    #[test]
    fn soft_threshold_is_one_lipschitz() {
        let pts = [-3.0, -1.2, -0.5, 0.0, 0.4, 0.9, 1.1, 2.7];
        for &b in &[0.2, 1.0, 3.0] {
            for &a1 in &pts {
                for &a2 in &pts {
                    let d = (soft_threshold(a1, b) - soft_threshold(a2, b)).abs();
                    assert!(d <= (a1 - a2).abs() + 1e-15);
                }
            }
        }
    }

    #[test]
    #[should_panic]
    fn cost_e_rejects_nonpositive_threshold() {
        cost_e(1.0, 0.0);
    }

    #[test]
    fn q_function_values() {
        assert_abs_diff_eq!(gauss_q(0.0), 0.5, epsilon = 1e-15);
        // high-precision erfc reference for Q(1)
        assert_abs_diff_eq!(gauss_q(1.0), 0.158_655_253_931_457_05, epsilon = 1e-14);
        for &x in &[0.3, 1.7, 2.9] {
            assert_abs_diff_eq!(gauss_q(x) + gauss_q(-x), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn q_function_deep_tail_stays_positive() {
        let q = gauss_q(12.0);
        assert!(q > 0.0 && q < 1e-30);
    }

    #[test]
    fn hermite_single_node() {
        let nodes = hermite_nodes(1);
        assert_eq!(nodes.len(), 1);
        assert_abs_diff_eq!(nodes[0].0, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nodes[0].1, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hermite_moment_exactness() {
        let n2 = hermite_nodes(2);
        assert_abs_diff_eq!(hermite_expectation(&n2, |z| z * z), 1.0, epsilon = 1e-13);
        let n3 = hermite_nodes(3);
        assert_abs_diff_eq!(
            hermite_expectation(&n3, |z| z.powi(4)),
            3.0,
            epsilon = 1e-12
        );
        // weights sum to one
        let n50: f64 = hermite_nodes(50).iter().map(|p| p.1).sum();
        assert_abs_diff_eq!(n50, 1.0, epsilon = 1e-12);
    }

    #[test]
    #[should_panic]
    fn hermite_rejects_zero_nodes() {
        hermite_nodes(0);
    }

    #[test]
    fn legendre_moment_exactness() {
        let n5 = legendre_nodes(5);
        let wsum: f64 = n5.iter().map(|p| p.1).sum();
        assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-13);
        let x4: f64 = n5.iter().map(|&(x, w)| w * x.powi(4)).sum();
        assert_abs_diff_eq!(x4, 0.4, epsilon = 1e-13);
    }

    #[test]
    fn kink_quadrature_matches_gaussian_moments() {
        assert_abs_diff_eq!(
            gaussian_expectation_with_kinks(&[], |z| z * z),
            1.0,
            epsilon = 1e-12
        );
        // E[|Z|] = sqrt(2/pi); the kink at zero must be split for accuracy.
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(
            gaussian_expectation_with_kinks(&[0.0], f64::abs),
            expect,
            epsilon = 1e-13
        );
    }

    #[test]
    fn kink_quadrature_handles_cost_kernel() {
        // E[e(Z; t)] has the single-atom closed form used by the prior module.
        let t = 0.7f64;
        let quad = gaussian_expectation_with_kinks(&[-t, t], |z| cost_e(z, t));
        let closed = 0.5 + t * normal_pdf(t) - (t * t + 1.0) * gauss_q(t);
        assert_abs_diff_eq!(quad, closed, epsilon = 1e-13);
    }
}
