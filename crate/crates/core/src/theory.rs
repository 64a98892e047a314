//! Asymptotic metric predictions from a solved saddle point: MSE, on/off
//! support recovery probabilities, element error rate and cosine similarity.
//!
//! Sparse-Bernoulli uses the closed forms in `Q` and `phi`; generic atom
//! priors go through kink-split Gaussian quadrature over the scalar channel
//! `eta(X0 + c*Z; t)` with `c = alpha*beta/chi` and `t = lambda*alpha/chi`.

use serde::{Deserialize, Serialize};

use crate::cgmt::SaddlePoint;
use crate::kernels::{gauss_q, gaussian_expectation_with_kinks, normal_pdf, soft_threshold};
use crate::prior::SparsePrior;
use crate::{Error, Result};

/// Routes that must agree do so to this tolerance or the call errors out.
const EER_ROUTE_TOL: f64 = 1e-10;
const COSINE_ROUTE_TOL: f64 = 1e-8;

/// The four asymptotic predictions at one parameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryReport {
    pub mse: f64,
    pub phi_on: f64,
    pub phi_off: f64,
    pub eer: f64,
    /// Undefined (None) when the threshold kills the estimate almost surely.
    pub cosine: Option<f64>,
    pub xi: f64,
    pub saddle: SaddlePoint,
}

/// Asymptotic MSE is the alpha-component of the saddle.
pub fn predict_mse(saddle: &SaddlePoint) -> Result<f64> {
    if !saddle.converged {
        return Err(Error::UnconvergedSaddle);
    }
    Ok(saddle.alpha_star)
}

/// Scalar channel parameters `(c, t) = (alpha*beta/chi, lambda*alpha/chi)`.
fn channel(saddle: &SaddlePoint, lambda: f64) -> (f64, f64) {
    let c = saddle.alpha_star * saddle.beta_star / saddle.chi_star;
    let t = lambda * saddle.alpha_star / saddle.chi_star;
    (c, t)
}

/// Asymptotic `(phi_on, phi_off)` at threshold `xi`.
pub fn predict_support(
    saddle: &SaddlePoint,
    prior: &SparsePrior,
    lambda: f64,
    xi: f64,
) -> Result<(f64, f64)> {
    if !saddle.converged {
        return Err(Error::UnconvergedSaddle);
    }
    if xi <= 0.0 {
        return Err(Error::invalid("support threshold xi must be positive"));
    }
    let (alpha, beta, chi) = (saddle.alpha_star, saddle.beta_star, saddle.chi_star);
    let phi_off = 1.0 - 2.0 * gauss_q(lambda / beta + chi * xi / (alpha * beta));
    let phi_on = match prior {
        SparsePrior::SparseBernoulli { .. } => {
            gauss_q(lambda / beta + chi * (xi + 1.0) / (alpha * beta))
                + gauss_q(lambda / beta + chi * (xi - 1.0) / (alpha * beta))
        }
        SparsePrior::SparseGeneric { atoms, .. } => {
            // P[|eta(v + cZ; t)| >= xi] per atom; the event is
            // Z >= (t + xi - v)/c or Z <= -(t + xi + v)/c.
            let (c, t) = channel(saddle, lambda);
            atoms
                .iter()
                .map(|&(v, w)| w * (gauss_q((t + xi - v) / c) + gauss_q((t + xi + v) / c)))
                .sum()
        }
    };
    Ok((phi_on, phi_off))
}

/// Asymptotic element error rate `2 - phi_on - phi_off`, cross-checked
/// against the direct three-Q-term closed form (sparse-Bernoulli only).
pub fn predict_eer(saddle: &SaddlePoint, prior: &SparsePrior, lambda: f64, xi: f64) -> Result<f64> {
    let (phi_on, phi_off) = predict_support(saddle, prior, lambda, xi)?;
    let eer = 2.0 - phi_on - phi_off;
    if matches!(prior, SparsePrior::SparseBernoulli { .. }) {
        let (alpha, beta, chi) = (saddle.alpha_star, saddle.beta_star, saddle.chi_star);
        let direct = gauss_q(chi * (1.0 - xi) / (alpha * beta) - lambda / beta)
            - gauss_q(chi * (1.0 + xi) / (alpha * beta) + lambda / beta)
            + 2.0 * gauss_q(chi * xi / (alpha * beta) + lambda / beta);
        if (eer - direct).abs() > EER_ROUTE_TOL {
            return Err(Error::ConsistencyFailure(format!(
                "EER routes disagree: identity {eer:e} vs direct {direct:e}"
            )));
        }
    }
    Ok(eer)
}

/// Closed-form pieces of the sparse-Bernoulli cosine similarity
/// `I0 / sqrt(kappa * (I1 + I2))`.
pub fn cosine_integrals(saddle: &SaddlePoint, lambda: f64, kappa: f64) -> (f64, f64, f64) {
    let (a, b, x) = (saddle.alpha_star, saddle.beta_star, saddle.chi_star);
    let lb = lambda / b;
    let xab = x / (a * b);

    let i0 = kappa / x
        * (a * b * (normal_pdf(xab - lb) - normal_pdf(xab + lb))
            + (x - lambda * a) * gauss_q(lb - xab)
            + (x + lambda * a) * gauss_q(lb + xab));

    // phi(lb + xab) * exp(2*lambda*chi / (alpha*beta^2)) = phi(lb - xab);
    // folding the exp into the density keeps huge lambda from overflowing
    let i1 = kappa / (x * x)
        * ((a * a * b * b + (lambda * a - x).powi(2)) * gauss_q(lb - xab)
            + (a * a * b * b + (lambda * a + x).powi(2)) * gauss_q(lb + xab)
            - a * b
                * ((lambda * a - x) * normal_pdf(lb - xab)
                    + (lambda * a + x) * normal_pdf(lb + xab)));

    let i2 = 2.0 * (1.0 - kappa) * a * a / (x * x)
        * ((lambda * lambda + b * b) * gauss_q(lb) - lambda * b * normal_pdf(lb));

    (i0, i1, i2)
}

/// Quadrature route for the cosine similarity: numerator
/// `E[eta(X0 + cZ; t) X0]`, denominator `sqrt(kappa E[eta^2(X0 + cZ; t)])`.
pub fn cosine_quadrature(
    saddle: &SaddlePoint,
    prior: &SparsePrior,
    lambda: f64,
) -> Result<Option<f64>> {
    let (c, t) = channel(saddle, lambda);
    let kappa = prior.kappa();
    let atoms = prior.atoms();
    // eta(v + c*z; t) has kinks where v + c*z = +/-t
    let kinks = |v: f64| [(-t - v) / c, (t - v) / c];
    let numerator: f64 = atoms
        .iter()
        .map(|&(v, w)| {
            kappa
                * w
                * v
                * gaussian_expectation_with_kinks(&kinks(v), |z| soft_threshold(v + c * z, t))
        })
        .sum();
    let second_zero =
        gaussian_expectation_with_kinks(&kinks(0.0), |z| soft_threshold(c * z, t).powi(2));
    let second_on: f64 = atoms
        .iter()
        .map(|&(v, w)| {
            w * gaussian_expectation_with_kinks(&kinks(v), |z| soft_threshold(v + c * z, t).powi(2))
        })
        .sum();
    let second = (1.0 - kappa) * second_zero + kappa * second_on;
    let denom_sq = kappa * second;
    // NaN also lands here, keeping the undefined-cosine contract
    if denom_sq.is_nan() || denom_sq <= 1e-300 {
        return Ok(None);
    }
    Ok(Some(numerator / denom_sq.sqrt()))
}

/// Asymptotic cosine similarity. Sparse-Bernoulli evaluates the I-integral
/// closed forms and asserts agreement with the quadrature route; generic
/// priors use quadrature alone.
pub fn predict_cosine(
    saddle: &SaddlePoint,
    prior: &SparsePrior,
    lambda: f64,
    kappa: f64,
) -> Result<Option<f64>> {
    if !saddle.converged {
        return Err(Error::UnconvergedSaddle);
    }
    if !(0.0 < kappa && kappa < 1.0) {
        return Err(Error::invalid("kappa must be in (0, 1)"));
    }
    let quad = cosine_quadrature(saddle, prior, lambda)?;
    match prior {
        SparsePrior::SparseBernoulli { .. } => {
            let (i0, i1, i2) = cosine_integrals(saddle, lambda, kappa);
            let denom_sq = kappa * (i1 + i2);
            if denom_sq.is_nan() || denom_sq <= 1e-300 {
                return Ok(None);
            }
            let closed = i0 / denom_sq.sqrt();
            if let Some(q) = quad {
                if (closed - q).abs() > COSINE_ROUTE_TOL {
                    return Err(Error::ConsistencyFailure(format!(
                        "cosine routes disagree: closed form {closed:e} vs quadrature {q:e}"
                    )));
                }
            }
            Ok(Some(closed))
        }
        SparsePrior::SparseGeneric { .. } => Ok(quad),
    }
}

/// Bundle all four predictions for one `(saddle, lambda, xi)` point.
pub fn theory_report(
    saddle: &SaddlePoint,
    prior: &SparsePrior,
    lambda: f64,
    xi: f64,
) -> Result<TheoryReport> {
    let mse = predict_mse(saddle)?;
    let (phi_on, phi_off) = predict_support(saddle, prior, lambda, xi)?;
    let eer = predict_eer(saddle, prior, lambda, xi)?;
    let cosine = predict_cosine(saddle, prior, lambda, prior.kappa())?;
    Ok(TheoryReport {
        mse,
        phi_on,
        phi_off,
        eer,
        cosine,
        xi,
        saddle: saddle.clone(),
    })
}
