//! Scalar min-max engine: resolves the inner `mu(alpha, beta)` fixed point
//! and locates the saddle of the scalarized objective
//! `min_alpha max_beta sup_chi D(alpha, beta, chi)` whose alpha-component is
//! the asymptotic MSE.

use serde::{Deserialize, Serialize};

use crate::prior::{expectation_e, SparsePrior};
use crate::{Error, Result};

/// Residual tolerance for the mu root.
const MU_TOL: f64 = 1e-12;
const MU_MAX_ITERS: usize = 300;

/// The scalarized problem data: only the spectrum of the correlation matrix
/// enters, never its eigenvectors.
#[derive(Debug, Clone)]
pub struct ScalarProblem {
    /// Eigenvalues gamma_j of the m-by-m correlation matrix.
    pub eigenvalues: Vec<f64>,
    /// Signal dimension n; together with the eigenvalue count m this fixes
    /// delta = m / n.
    pub n: usize,
    /// Noise variance sigma^2.
    pub sigma2: f64,
    /// Regularizer lambda.
    pub lambda: f64,
    pub prior: SparsePrior,
}

impl ScalarProblem {
    pub fn delta(&self) -> f64 {
        self.eigenvalues.len() as f64 / self.n as f64
    }

    pub fn gamma_max(&self) -> f64 {
        self.eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eigenvalues.is_empty() || self.n == 0 {
            return Err(Error::invalid(
                "problem needs m >= 1 eigenvalues and n >= 1",
            ));
        }
        if self.eigenvalues.iter().any(|&g| g < 0.0) {
            return Err(Error::invalid("eigenvalues must be nonnegative"));
        }
        if self.gamma_max() <= 0.0 {
            return Err(Error::invalid("at least one eigenvalue must be positive"));
        }
        if self.sigma2 <= 0.0 {
            return Err(Error::invalid("sigma2 must be positive"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::invalid("lambda must be positive"));
        }
        self.prior.validate()
    }
}

/// Solver controls for the saddle search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Max allowed component of the finite-difference gradient of D at the
    /// reported point.
    pub stationarity_tol: f64,
    /// Relative tolerance of the nested golden-section searches.
    pub golden_tol: f64,
    /// Newton polish iterations on the 3-d gradient.
    pub max_newton: usize,
    /// Initial iterate (alpha0, beta0, chi0).
    pub init: (f64, f64, f64),
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            stationarity_tol: 1e-6,
            golden_tol: 1e-10,
            max_newton: 60,
            // alpha on the signal-power scale, beta and chi order one
            init: (0.1, 1.0, 1.0),
        }
    }
}

/// Solution of the scalar min-max problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub chi_star: f64,
    pub mu_star: f64,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Max component of the finite-difference gradient at the point.
    pub grad_norm: f64,
}

/// Root of the fixed-point equation
/// `(1/n) sum_j gamma_j (gamma_j alpha + sigma^2) / (1 - gamma_j mu)^2 = beta^2 / 4`
/// on `mu < 1/gamma_max`, where the left side is strictly increasing from 0.
///
/// This is the denominators-cleared form of the stated equation; eigenvalues
/// equal to zero drop out of the sum.
pub fn solve_mu(problem: &ScalarProblem, alpha: f64, beta: f64) -> Result<f64> {
    if alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::invalid(format!(
            "solve_mu requires alpha > 0 and beta > 0, got ({alpha}, {beta})"
        )));
    }
    let gmax = problem.gamma_max();
    let pole = 1.0 / gmax;
    let n = problem.n as f64;
    let target = beta * beta / 4.0;
    // below this the residual is pure rounding noise of the target itself
    let tol = MU_TOL.max(target * 1e-15);

    let lhs = |mu: f64| -> f64 {
        problem
            .eigenvalues
            .iter()
            .map(|&g| {
                if g == 0.0 {
                    0.0
                } else {
                    let d = 1.0 - g * mu;
                    g * (g * alpha + problem.sigma2) / (d * d)
                }
            })
            .sum::<f64>()
            / n
    };
    let dlhs = |mu: f64| -> f64 {
        problem
            .eigenvalues
            .iter()
            .map(|&g| {
                if g == 0.0 {
                    0.0
                } else {
                    let d = 1.0 - g * mu;
                    2.0 * g * g * (g * alpha + problem.sigma2) / (d * d * d)
                }
            })
            .sum::<f64>()
            / n
    };

    // Bracket the root: lhs -> 0 as mu -> -inf and -> +inf at the pole.
    let mut hi = pole - 1e-12 * pole.abs().max(1.0);
    let mut shrink = 0;
    while lhs(hi) < target {
        hi = pole - (pole - hi) * 0.1;
        shrink += 1;
        if shrink > 60 {
            return Err(Error::MuNonConvergence {
                iterations: shrink,
                residual: lhs(hi) - target,
            });
        }
    }
    let mut lo = if pole > 0.0 { -pole } else { pole * 2.0 - 1.0 };
    let mut expand = 0;
    while lhs(lo) > target {
        lo = hi - (hi - lo) * 2.0;
        expand += 1;
        if expand > 200 {
            return Err(Error::MuNonConvergence {
                iterations: expand,
                residual: lhs(lo) - target,
            });
        }
    }

    // Bisection to a decent neighborhood, then Newton polish.
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..80 {
        if lhs(mu) > target {
            hi = mu;
        } else {
            lo = mu;
        }
        mu = 0.5 * (lo + hi);
    }
    for it in 0..MU_MAX_ITERS {
        let r = lhs(mu) - target;
        if r.abs() <= tol {
            return Ok(mu);
        }
        // bracket at machine resolution: the residual cannot improve further
        if hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(mu);
        }
        let d = dlhs(mu);
        let mut next = mu - r / d;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if r > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        mu = next;
        if it == MU_MAX_ITERS - 1 {
            let res = lhs(mu) - target;
            if res.abs() <= tol {
                return Ok(mu);
            }
            return Err(Error::MuNonConvergence {
                iterations: MU_MAX_ITERS,
                residual: res,
            });
        }
    }
    unreachable!()
}

/// The scalarized objective `D(alpha, beta, chi)` with mu resolved
/// internally.
pub fn objective_d(problem: &ScalarProblem, alpha: f64, beta: f64, chi: f64) -> Result<f64> {
    let mu = solve_mu(problem, alpha, beta)?;
    objective_d_with_mu(problem, alpha, beta, chi, mu)
}

/// `D` at a point where `mu(alpha, beta)` has already been solved; lets the
/// chi search reuse one mu root.
pub fn objective_d_with_mu(
    problem: &ScalarProblem,
    alpha: f64,
    beta: f64,
    chi: f64,
    mu: f64,
) -> Result<f64> {
    if alpha <= 0.0 || beta <= 0.0 || chi <= 0.0 {
        return Err(Error::invalid(format!(
            "objective requires positive (alpha, beta, chi), got ({alpha}, {beta}, {chi})"
        )));
    }
    let n = problem.n as f64;
    let trace: f64 = problem
        .eigenvalues
        .iter()
        .map(|&g| (g * alpha + problem.sigma2) / (1.0 - g * mu))
        .sum::<f64>()
        / n;
    let c = alpha * beta / chi;
    let t = problem.lambda * alpha / chi;
    let expect = expectation_e(&problem.prior, c, t)?;
    Ok(
        trace - (beta * beta * mu / 4.0 + chi / 2.0 + alpha * beta * beta / (2.0 * chi))
            + chi / alpha * expect,
    )
}

/// Golden-section minimum of `f` on `[a, b]` to relative tolerance `tol`.
fn golden_min(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const RESP: f64 = 0.381_966_011_250_105_1; // 2 - phi
    let mut x1 = a + RESP * (b - a);
    let mut x2 = b - RESP * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol * (a.abs() + b.abs() + 1e-12) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + RESP * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - RESP * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Expand a geometric bracket around `x0 > 0` containing an interior
/// minimum of `f`, then run golden section. Returns `(argmin, min)`.
fn bracketed_min(f: &mut impl FnMut(f64) -> f64, x0: f64, tol: f64) -> Result<(f64, f64)> {
    let mut a = x0 / 2.0;
    let mut m = x0;
    let mut b = x0 * 2.0;
    let mut fa = f(a);
    let mut fm = f(m);
    let mut fb = f(b);
    let mut steps = 0;
    while fb < fm {
        a = m;
        fa = fm;
        m = b;
        fm = fb;
        b *= 2.0;
        fb = f(b);
        steps += 1;
        if steps > 60 {
            return Err(Error::SaddleNonConvergence(
                "bracket expansion hit the upper cap".into(),
            ));
        }
    }
    steps = 0;
    while fa < fm {
        b = m;
        fb = fm;
        m = a;
        fm = fa;
        a /= 2.0;
        fa = f(a);
        steps += 1;
        if steps > 60 {
            return Err(Error::SaddleNonConvergence(
                "bracket expansion hit the lower cap".into(),
            ));
        }
    }
    let _ = (fa, fb);
    Ok(golden_min(f, a, b, tol))
}

fn bracketed_max(f: &mut impl FnMut(f64) -> f64, x0: f64, tol: f64) -> Result<(f64, f64)> {
    let mut neg = |x: f64| -f(x);
    let (x, v) = bracketed_min(&mut neg, x0, tol)?;
    Ok((x, -v))
}

/// Central finite-difference gradient of D, relative step `rel_step`.
pub fn fd_gradient(
    problem: &ScalarProblem,
    point: (f64, f64, f64),
    rel_step: f64,
) -> Result<[f64; 3]> {
    let x = [point.0, point.1, point.2];
    let mut grad = [0.0; 3];
    for i in 0..3 {
        let h = rel_step * x[i].abs().max(1e-3);
        let mut up = x;
        up[i] += h;
        let mut dn = x;
        dn[i] -= h;
        let fu = objective_d(problem, up[0], up[1], up[2])?;
        let fd = objective_d(problem, dn[0], dn[1], dn[2])?;
        grad[i] = (fu - fd) / (2.0 * h);
    }
    Ok(grad)
}

/// Second differences of the raw coordinate sections of D. At the saddle
/// the beta and chi sections are concave; the alpha section of D at fixed
/// (beta, chi) carries no sign guarantee, the min-side signature lives on
/// the reduced function (see `reduced_alpha_curvature`).
pub fn fd_curvatures(
    problem: &ScalarProblem,
    point: (f64, f64, f64),
    rel_step: f64,
) -> Result<[f64; 3]> {
    let x = [point.0, point.1, point.2];
    let f0 = objective_d(problem, x[0], x[1], x[2])?;
    let mut curv = [0.0; 3];
    for i in 0..3 {
        let h = rel_step * x[i].abs().max(1e-3);
        let mut up = x;
        up[i] += h;
        let mut dn = x;
        dn[i] -= h;
        let fu = objective_d(problem, up[0], up[1], up[2])?;
        let fd = objective_d(problem, dn[0], dn[1], dn[2])?;
        curv[i] = (fu - 2.0 * f0 + fd) / (h * h);
    }
    Ok(curv)
}

fn best_over_chi(
    problem: &ScalarProblem,
    alpha: f64,
    beta: f64,
    chi_start: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mu = solve_mu(problem, alpha, beta)?;
    let mut bad = false;
    let mut f = |chi: f64| match objective_d_with_mu(problem, alpha, beta, chi, mu) {
        Ok(v) => v,
        Err(_) => {
            bad = true;
            f64::NEG_INFINITY
        }
    };
    let r = bracketed_max(&mut f, chi_start, tol)?;
    if bad {
        return Err(Error::SaddleNonConvergence(
            "objective evaluation failed during chi search".into(),
        ));
    }
    Ok(r)
}

/// Inner maximization `max_beta sup_chi D(alpha, ., .)` with warm starts.
/// Returns `(beta_hat, chi_hat, value)`.
fn max_over_beta_chi(
    problem: &ScalarProblem,
    alpha: f64,
    beta_start: f64,
    chi_start: f64,
    tol: f64,
) -> Result<(f64, f64, f64)> {
    let mut chi_local = chi_start;
    let mut err: Option<Error> = None;
    let mut g = |beta: f64| match best_over_chi(problem, alpha, beta, chi_local, tol) {
        Ok((chi, v)) => {
            chi_local = chi;
            v
        }
        Err(e) => {
            err = Some(e);
            f64::INFINITY
        }
    };
    let mut neg = |beta: f64| -g(beta);
    let (beta, nv) = bracketed_min(&mut neg, beta_start, tol)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((beta, chi_local, -nv))
}

/// Curvature of the reduced function `h(alpha) = max_beta sup_chi D` at the
/// saddle. This is the quantity that is convex at a min-max point; the raw
/// alpha-section of D at fixed (beta, chi) need not be.
pub fn reduced_alpha_curvature(
    problem: &ScalarProblem,
    point: (f64, f64, f64),
    rel_step: f64,
) -> Result<f64> {
    let (alpha, beta, chi) = point;
    let tol = SolverOptions::default().golden_tol;
    let h = rel_step * alpha.abs().max(1e-3);
    let f = |a: f64| max_over_beta_chi(problem, a, beta, chi, tol).map(|r| r.2);
    let fu = f(alpha + h)?;
    let f0 = f(alpha)?;
    let fd = f(alpha - h)?;
    Ok((fu - 2.0 * f0 + fd) / (h * h))
}

/// Locate the saddle `min_alpha max_beta sup_chi D`.
///
/// Nested golden-section searches respect the min-max ordering, then a
/// damped Newton polish on the 3-d finite-difference gradient tightens the
/// point to the stationarity tolerance.
pub fn solve_saddle(problem: &ScalarProblem, opts: &SolverOptions) -> Result<SaddlePoint> {
    problem.validate()?;
    let (alpha0, beta0, chi0) = opts.init;
    let mut evals = 0usize;

    // warm starts threaded through the nesting
    let mut chi_warm = chi0;
    let mut beta_warm = beta0;

    let mut alpha_err: Option<Error> = None;
    let mut h = |alpha: f64| -> f64 {
        evals += 1;
        match max_over_beta_chi(problem, alpha, beta_warm, chi_warm, opts.golden_tol) {
            Ok((beta, chi, v)) => {
                beta_warm = beta;
                chi_warm = chi;
                v
            }
            Err(e) => {
                alpha_err = Some(e);
                f64::INFINITY
            }
        }
    };
    let (alpha_hat, _) = bracketed_min(&mut h, alpha0, opts.golden_tol)?;
    if let Some(e) = alpha_err {
        return Err(e);
    }
    let (beta_hat, chi_hat, _) =
        max_over_beta_chi(problem, alpha_hat, beta_warm, chi_warm, opts.golden_tol)?;

    // Newton polish on the gradient.
    let mut x = [alpha_hat, beta_hat, chi_hat];
    let mut converged = false;
    let mut newton_iters = 0;
    let mut grad = fd_gradient(problem, (x[0], x[1], x[2]), 1e-6)?;
    let gnorm = |g: &[f64; 3]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for it in 0..opts.max_newton {
        newton_iters = it + 1;
        if gnorm(&grad) <= opts.stationarity_tol {
            converged = true;
            break;
        }
        // numeric Jacobian of the gradient
        let mut hess = nalgebra::Matrix3::<f64>::zeros();
        for j in 0..3 {
            let hstep = 1e-5 * x[j].abs().max(1e-3);
            let mut up = x;
            up[j] += hstep;
            let gu = fd_gradient(problem, (up[0], up[1], up[2]), 1e-6)?;
            let mut dn = x;
            dn[j] -= hstep;
            let gd = fd_gradient(problem, (dn[0], dn[1], dn[2]), 1e-6)?;
            for i in 0..3 {
                hess[(i, j)] = (gu[i] - gd[i]) / (2.0 * hstep);
            }
        }
        let g_vec = nalgebra::Vector3::new(grad[0], grad[1], grad[2]);
        let step = match hess.lu().solve(&g_vec) {
            Some(s) => s,
            None => break,
        };
        // damp: keep positivity and demand gradient decrease
        let mut scale = 1.0;
        let base_norm = gnorm(&grad);
        let mut accepted = false;
        for _ in 0..40 {
            let cand = [
                x[0] - scale * step[0],
                x[1] - scale * step[1],
                x[2] - scale * step[2],
            ];
            if cand.iter().all(|&v| v > 0.0) {
                if let Ok(g2) = fd_gradient(problem, (cand[0], cand[1], cand[2]), 1e-6) {
                    if gnorm(&g2) < base_norm {
                        x = cand;
                        grad = g2;
                        accepted = true;
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if gnorm(&grad) <= opts.stationarity_tol {
        converged = true;
    }

    let mu = solve_mu(problem, x[0], x[1])?;
    let value = objective_d_with_mu(problem, x[0], x[1], x[2], mu)?;
    let saddle = SaddlePoint {
        alpha_star: x[0],
        beta_star: x[1],
        chi_star: x[2],
        mu_star: mu,
        objective_value: value,
        converged,
        iterations: evals + newton_iters,
        grad_norm: gnorm(&grad),
    };
    if !(saddle.alpha_star > 0.0 && saddle.beta_star > 0.0 && saddle.chi_star > 0.0) {
        return Err(Error::SaddleNonConvergence(format!(
            "located point violates positivity: {saddle:?}"
        )));
    }
    if !converged {
        return Err(Error::SaddleNonConvergence(format!(
            "gradient norm {:e} above tolerance {:e} (best iterate alpha={}, beta={}, chi={})",
            saddle.grad_norm, opts.stationarity_tol, x[0], x[1], x[2]
        )));
    }
    Ok(saddle)
}
