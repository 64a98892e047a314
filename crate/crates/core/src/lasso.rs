//! Numerical LASSO solver for `min_x ||y - Ax||^2 + lambda ||x||_1`.
//!
//! Accelerated proximal gradient with gradient-based adaptive restart.
//! The loss carries no 1/2 factor, so the gradient is `2 A^T (Ax - y)`, the
//! Lipschitz constant is `2 sigma_max(A)^2`, and the identity-design
//! solution is `eta(y_i; lambda/2)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::kernels::soft_threshold;
use crate::{Error, Result};

/// One LASSO problem instance.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub design: DMatrix<f64>,
    pub observations: DVector<f64>,
    pub lambda: f64,
}

impl LassoInstance {
    pub fn new(design: DMatrix<f64>, observations: DVector<f64>, lambda: f64) -> Result<Self> {
        if design.nrows() != observations.len() {
            return Err(Error::invalid(format!(
                "design has {} rows but y has {} entries",
                design.nrows(),
                observations.len()
            )));
        }
        if lambda <= 0.0 {
            return Err(Error::invalid("lambda must be positive"));
        }
        if design.iter().any(|v| !v.is_finite()) || observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("inputs must be finite"));
        }
        Ok(LassoInstance {
            design,
            observations,
            lambda,
        })
    }

    /// `||y - Ax||^2 + lambda ||x||_1`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let r = &self.observations - &self.design * x;
        r.norm_squared() + self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoOptions {
    /// KKT residual target.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            tol: 1e-9,
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub estimate: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

/// Subgradient-optimality residual: for `x_i != 0` the distance of
/// `2 A_i^T (Ax - y)` from `-lambda sign(x_i)`, for `x_i = 0` the excess of
/// `|2 A_i^T (Ax - y)|` over `lambda`.
pub fn kkt_residual(instance: &LassoInstance, x: &DVector<f64>) -> f64 {
    let grad = gradient(
        &(instance.design.transpose() * &instance.design),
        &(instance.design.transpose() * &instance.observations),
        x,
    );
    kkt_residual_from_grad(&grad, x, instance.lambda)
}

fn gradient(ata: &DMatrix<f64>, aty: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    2.0 * (ata * x - aty)
}

fn kkt_residual_from_grad(grad: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let r = if x[i] != 0.0 {
            (grad[i] + lambda * x[i].signum()).abs()
        } else {
            (grad[i].abs() - lambda).max(0.0)
        };
        worst = worst.max(r);
    }
    worst
}

/// Largest eigenvalue of `A^T A` by power iteration with a deterministic
/// start vector.
fn spectral_norm_sq(ata: &DMatrix<f64>) -> f64 {
    let n = ata.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..300 {
        let w = ata * &v;
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - lambda).abs() <= 1e-12 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// Solve the LASSO by monotone FISTA.
pub fn solve_lasso(instance: &LassoInstance, opts: &LassoOptions) -> Result<LassoSolution> {
    let n = instance.design.ncols();
    let ata = instance.design.transpose() * &instance.design;
    let aty = instance.design.transpose() * &instance.observations;
    let y_norm_sq = instance.observations.norm_squared();

    // L = 2 sigma_max(A)^2, padded against power-iteration underestimation
    let l = 2.0 * spectral_norm_sq(&ata) * (1.0 + 1e-6);
    if l == 0.0 {
        // A = 0: objective is ||y||^2 + lambda ||x||_1, minimized at 0
        return Ok(LassoSolution {
            estimate: DVector::zeros(n),
            objective: y_norm_sq,
            iterations: 0,
            converged: true,
            kkt_residual: 0.0,
        });
    }
    let step = 1.0 / l;
    let shrink = instance.lambda * step;

    let mut x = DVector::<f64>::zeros(n);
    let mut momentum = x.clone();
    let mut theta = 1.0f64;
    let mut kkt = f64::INFINITY;
    let mut iters = 0;

    for it in 1..=opts.max_iters {
        iters = it;
        let grad_m = 2.0 * (&ata * &momentum - &aty);
        let mut x_next = &momentum - step * &grad_m;
        for v in x_next.iter_mut() {
            *v = soft_threshold(*v, shrink);
        }

        // adaptive restart: reset the momentum when it points against the
        // actual progress direction, otherwise acceleration oscillates
        if (&momentum - &x_next).dot(&(&x_next - &x)) > 0.0 {
            momentum = x.clone();
            theta = 1.0;
            continue;
        }

        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        momentum = &x_next + beta * (&x_next - &x);
        x = x_next;
        theta = theta_next;

        if it % 10 == 0 || it == opts.max_iters {
            let grad_x = 2.0 * (&ata * &x - &aty);
            kkt = kkt_residual_from_grad(&grad_x, &x, instance.lambda);
            if kkt <= opts.tol {
                break;
            }
        }
    }

    if kkt.is_infinite() {
        let grad_x = 2.0 * (&ata * &x - &aty);
        kkt = kkt_residual_from_grad(&grad_x, &x, instance.lambda);
    }
    let converged = kkt <= opts.tol;
    let objective = instance.objective(&x);
    Ok(LassoSolution {
        estimate: x,
        objective,
        iterations: iters,
        converged,
        kkt_residual: kkt,
    })
}
