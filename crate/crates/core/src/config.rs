//! Run configuration: the full experiment definition, parsed from a TOML
//! file (or assembled from CLI flags) with strict validation.

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationModel;
use crate::prior::SparsePrior;
use crate::{Error, Result};

/// Regularizer specification: a single value or a sweep grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Single(f64),
    Grid {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl LambdaSpec {
    /// Materialize the grid values.
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            LambdaSpec::Single(v) => {
                if v <= 0.0 {
                    return Err(Error::Config(format!("lambda must be positive, got {v}")));
                }
                Ok(vec![v])
            }
            LambdaSpec::Grid {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 0 {
                    return Err(Error::Config("lambda grid count must be >= 1".into()));
                }
                if start <= 0.0 || stop <= 0.0 {
                    return Err(Error::Config(
                        "lambda grid endpoints must be positive".into(),
                    ));
                }
                if count == 1 {
                    return Ok(vec![start]);
                }
                let pts = (0..count)
                    .map(|i| {
                        let f = i as f64 / (count - 1) as f64;
                        match spacing {
                            Spacing::Linear => start + f * (stop - start),
                            Spacing::Log => (start.ln() + f * (stop.ln() - start.ln())).exp(),
                        }
                    })
                    .collect();
                Ok(pts)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Theory,
    Empirical,
    #[default]
    Both,
}

/// The full experiment definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Signal dimension.
    pub n: usize,
    /// Measurement ratio m / n.
    pub delta: f64,
    /// Sparsity fraction k / n.
    pub kappa: f64,
    /// Shorthand for the exponential correlation model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Full correlation model spec; mutually exclusive with `rho`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationModel>,
    /// Noise variance; exactly one of `sigma2` / `snr_db`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    /// SNR in dB, converted via `sigma2 = kappa / 10^(snr_db / 10)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    /// Signal prior; defaults to sparse-Bernoulli at `kappa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<SparsePrior>,
    pub lambda: LambdaSpec,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

fn default_xi() -> f64 {
    0.001
}

fn default_trials() -> usize {
    500
}

impl ProblemConfig {
    /// Parse and validate a TOML config file.
    pub fn from_path(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ProblemConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.delta <= 0.0 {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(0.0 < self.kappa && self.kappa < 1.0) {
            return Err(Error::Config(format!(
                "kappa must be in (0, 1), got {}",
                self.kappa
            )));
        }
        match (self.sigma2, self.snr_db) {
            (Some(s), None) if s > 0.0 => {}
            (Some(s), None) => {
                return Err(Error::Config(format!("sigma2 must be positive, got {s}")))
            }
            (None, Some(_)) => {}
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "sigma2 and snr_db are mutually exclusive; give exactly one".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config("one of sigma2 or snr_db is required".into()))
            }
        }
        if self.rho.is_some() && self.correlation.is_some() {
            return Err(Error::Config(
                "rho and correlation are mutually exclusive; give at most one".into(),
            ));
        }
        if let Some(rho) = self.rho {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::Config(format!("rho must be in [0, 1), got {rho}")));
            }
        }
        if let Some(prior) = &self.prior {
            prior.validate().map_err(|e| Error::Config(e.to_string()))?;
            if (prior.kappa() - self.kappa).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "prior.kappa ({}) disagrees with top-level kappa ({})",
                    prior.kappa(),
                    self.kappa
                )));
            }
        }
        if self.xi <= 0.0 {
            return Err(Error::Config(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        self.lambda.values()?;
        Ok(())
    }

    /// Measurement count `m = round(delta * n)`.
    pub fn m(&self) -> usize {
        (self.delta * self.n as f64).round() as usize
    }

    /// Sparsity count `k = round(kappa * n)`.
    pub fn k(&self) -> usize {
        (self.kappa * self.n as f64).round() as usize
    }

    /// Resolved noise variance.
    pub fn sigma2(&self) -> f64 {
        match (self.sigma2, self.snr_db) {
            (Some(s), _) => s,
            (None, Some(db)) => self.kappa / 10f64.powf(db / 10.0),
            (None, None) => unreachable!("validated"),
        }
    }

    /// Resolved correlation model.
    pub fn correlation_model(&self) -> CorrelationModel {
        if let Some(model) = &self.correlation {
            model.clone()
        } else if let Some(rho) = self.rho {
            CorrelationModel::Exponential { rho }
        } else {
            CorrelationModel::Identity
        }
    }

    /// Resolved prior.
    pub fn prior(&self) -> SparsePrior {
        self.prior
            .clone()
            .unwrap_or(SparsePrior::SparseBernoulli { kappa: self.kappa })
    }

    /// Canonical TOML rendering, used for the CSV header comment.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const MINIMAL: &str = r#"
        n = 400
        delta = 0.7
        kappa = 0.1
        rho = 0.7
        sigma2 = 0.01
        lambda = { start = 0.01, stop = 0.5, count = 15 }
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ProblemConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.m(), 280);
        assert_eq!(cfg.k(), 40);
        assert_abs_diff_eq!(cfg.xi, 0.001);
        assert_eq!(cfg.trials, 500);
        assert_eq!(cfg.mode, RunMode::Both);
        assert_eq!(cfg.lambda.values().unwrap().len(), 15);
        assert!(matches!(
            cfg.correlation_model(),
            CorrelationModel::Exponential { rho } if rho == 0.7
        ));
    }

    #[test]
    fn sigma2_snr_exclusivity() {
        let both = format!("{MINIMAL}\nsnr_db = 10.0");
        let err = ProblemConfig::from_toml(&both).unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"));
    }

    #[test]
    fn snr_db_conversion() {
        let cfg_text = MINIMAL.replace("sigma2 = 0.01", "snr_db = 10.0");
        let cfg = ProblemConfig::from_toml(&cfg_text).unwrap();
        assert_abs_diff_eq!(cfg.sigma2(), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = format!("{MINIMAL}\nbogus_field = 1");
        assert!(ProblemConfig::from_toml(&text).is_err());
    }

    #[test]
    fn single_lambda_value() {
        let text = MINIMAL.replace(
            "lambda = { start = 0.01, stop = 0.5, count = 15 }",
            "lambda = 0.1",
        );
        let cfg = ProblemConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.lambda.values().unwrap(), vec![0.1]);
    }

    #[test]
    fn log_spacing() {
        let spec = LambdaSpec::Grid {
            start: 0.01,
            stop: 1.0,
            count: 3,
            spacing: Spacing::Log,
        };
        let vals = spec.values().unwrap();
        assert_abs_diff_eq!(vals[1], 0.1, epsilon = 1e-12);
    }

    #[test]
    fn roundtrip_through_toml() {
        let cfg = ProblemConfig::from_toml(MINIMAL).unwrap();
        let text = cfg.to_toml();
        let back = ProblemConfig::from_toml(&text).unwrap();
        assert_eq!(back.n, cfg.n);
        assert_eq!(back.trials, cfg.trials);
        assert_eq!(back.lambda.values().unwrap(), cfg.lambda.values().unwrap());
    }
}
