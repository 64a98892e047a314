//! Sparse signal priors: sampling of k-sparse vectors and the scalar
//! expectation `E[e(X0 + c*Z; t)]` consumed by the scalar min-max objective.
//!
//! For the sparse-Bernoulli prior the expectation has a closed form in
//! `Q`, `phi` and `erf`; for generic atom mixtures it is evaluated by
//! kink-split Gaussian quadrature, which doubles as the independent oracle
//! for the closed form.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kernels::{cost_e, erf_fn, gauss_q, gaussian_expectation_with_kinks, normal_pdf};
use crate::{Error, Result};

/// The sparse prior `(1 - kappa) * delta_0 + kappa * p_atoms`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SparsePrior {
    /// Nonzero entries are all 1: `(1 - kappa) delta_0 + kappa delta_1`.
    SparseBernoulli { kappa: f64 },
    /// Nonzero entries drawn from a finite mixture of point masses,
    /// `atoms = [(value, weight), ...]` with weights summing to 1.
    SparseGeneric { kappa: f64, atoms: Vec<(f64, f64)> },
}

impl SparsePrior {
    pub fn bernoulli(kappa: f64) -> Self {
        SparsePrior::SparseBernoulli { kappa }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            SparsePrior::SparseBernoulli { kappa } => *kappa,
            SparsePrior::SparseGeneric { kappa, .. } => *kappa,
        }
    }

    /// The conditional (on-support) law of a nonzero entry.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            SparsePrior::SparseBernoulli { .. } => vec![(1.0, 1.0)],
            SparsePrior::SparseGeneric { atoms, .. } => atoms.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kappa = self.kappa();
        if !(0.0 < kappa && kappa < 1.0) {
            return Err(Error::invalid(format!(
                "sparsity fraction kappa must be in (0, 1), got {kappa}"
            )));
        }
        if let SparsePrior::SparseGeneric { atoms, .. } = self {
            if atoms.is_empty() {
                return Err(Error::invalid("generic prior needs at least one atom"));
            }
            if atoms.iter().any(|&(_, w)| w <= 0.0) {
                return Err(Error::invalid("atom weights must be positive"));
            }
            let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(format!(
                    "atom weights must sum to 1, got {total}"
                )));
            }
        }
        Ok(())
    }

    /// Second moment `E[X0^2]` under the full prior.
    pub fn second_moment(&self) -> f64 {
        self.kappa() * self.atoms().iter().map(|&(v, w)| w * v * v).sum::<f64>()
    }
}

/// A realized k-sparse signal.
#[derive(Debug, Clone)]
pub struct SignalVector {
    pub entries: DVector<f64>,
    /// Sorted indices of nonzero entries.
    pub support: Vec<usize>,
}

impl SignalVector {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }
}

/// Draw a k-sparse signal with `k = round(kappa * n)`: support uniform over
/// size-k subsets, values iid from the atom distribution. Deterministic
/// given the seed.
pub fn sample_signal(prior: &SparsePrior, n: usize, rng_seed: u64) -> Result<SignalVector> {
    prior.validate()?;
    if n == 0 {
        return Err(Error::invalid("signal length n must be positive"));
    }
    let k = (prior.kappa() * n as f64).round() as usize;
    if k == 0 || k == n {
        return Err(Error::invalid(format!(
            "kappa * n rounds to {k} of {n}; need a strictly sparse, nonempty support"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let (chosen, _) = indices.partial_shuffle(&mut rng, k);
    let mut support: Vec<usize> = chosen.to_vec();
    support.sort_unstable();

    let atoms = prior.atoms();
    let mut entries = DVector::zeros(n);
    for &i in &support {
        entries[i] = draw_atom(&atoms, &mut rng);
    }
    Ok(SignalVector { entries, support })
}

fn draw_atom(atoms: &[(f64, f64)], rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(v, w) in atoms {
        acc += w;
        if u < acc {
            return v;
        }
    }
    atoms.last().expect("nonempty atoms").0
}

/// `E[e(X0 + c*Z; t)]` over the full prior (zero mass included) and
/// `Z ~ N(0, 1)`.
///
/// Sparse-Bernoulli uses the closed form; generic mixtures go through
/// Gauss-Hermite quadrature atom by atom.
pub fn expectation_e(prior: &SparsePrior, c: f64, t: f64) -> Result<f64> {
    if c <= 0.0 || t <= 0.0 {
        return Err(Error::invalid(format!(
            "expectation_e requires c > 0 and t > 0, got c = {c}, t = {t}"
        )));
    }
    prior.validate()?;
    match prior {
        SparsePrior::SparseBernoulli { kappa } => Ok(expectation_e_bernoulli(*kappa, c, t)),
        SparsePrior::SparseGeneric { kappa, atoms } => {
            Ok(expectation_e_quadrature(*kappa, atoms, c, t))
        }
    }
}

/// Closed form of `E[e(X0 + c*Z; t)]` for the sparse-Bernoulli prior.
///
/// This is the per-entry expectation; the scalarized objective multiplies
/// it by `chi / alpha` with `c = alpha*beta/chi` and `t = lambda*alpha/chi`.
pub fn expectation_e_bernoulli(kappa: f64, c: f64, t: f64) -> f64 {
    let r = t / c;
    let zero_mass =
        (1.0 - kappa) * (0.5 * c * c + c * t * normal_pdf(r) - (t * t + c * c) * gauss_q(r));

    let q_minus = gauss_q((t - 1.0) / c);
    let q_plus = gauss_q((t + 1.0) / c);
    let on_mass = kappa * (t - 0.5 * t * t) * q_minus - kappa * (t + 0.5 * t * t) * q_plus
        + kappa * c * t * (normal_pdf((t + 1.0) / c) + normal_pdf((t - 1.0) / c))
        // phi((t+1)/c) * exp(2t/c^2) = phi((t-1)/c); the folded form avoids
        // the exp overflowing when c is small.
        - 0.5 * kappa * c
            * ((t - 1.0) * normal_pdf((t + 1.0) / c) + (t + 1.0) * normal_pdf((t - 1.0) / c))
        + 0.25
            * kappa
            * (c * c + 1.0)
            * (erf_fn((t + 1.0) / (std::f64::consts::SQRT_2 * c))
                + erf_fn((t - 1.0) / (std::f64::consts::SQRT_2 * c)));

    zero_mass + on_mass
}

/// Quadrature evaluation of the same expectation for a finite atom mixture.
///
/// `e(v + c*z; t)` is piecewise quadratic in `z` with kinks where
/// `v + c*z = +/-t`; splitting the Gaussian integral there keeps the
/// quadrature accurate to machine precision.
pub fn expectation_e_quadrature(kappa: f64, atoms: &[(f64, f64)], c: f64, t: f64) -> f64 {
    let atom_expectation = |v: f64| {
        let kinks = [(-t - v) / c, (t - v) / c];
        gaussian_expectation_with_kinks(&kinks, |z| cost_e(v + c * z, t))
    };
    let on: f64 = atoms.iter().map(|&(v, w)| w * atom_expectation(v)).sum();
    (1.0 - kappa) * atom_expectation(0.0) + kappa * on
}
