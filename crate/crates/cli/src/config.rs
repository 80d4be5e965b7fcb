use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use qhaar::haarverify::{VerifyConfig, DEFAULT_TOL};
use qhaar::{Poly, QContext};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Everything a run depends on. Two runs with equal configs produce the
/// same JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub q: f64,
    pub tau: f64,
    pub sigma: f64,
    pub trunc_n: usize,
    /// `0` means `4 d + 4` per polynomial.
    pub phi_points: usize,
    pub max_degree: usize,
    pub tol: f64,
    pub output: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 0.5,
            tau: 0.4,
            sigma: 0.6,
            trunc_n: 160,
            phi_points: 0,
            max_degree: 6,
            tol: DEFAULT_TOL,
            output: OutputFormat::Json,
            seed: 0,
        }
    }
}

/// A config file or a set of flags: any field may be missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    /// Deformation parameter, 0 < q < 1
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Twist parameter of the spherical elements, tau >= 0
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Second parameter of the rho_{tau,sigma} element, sigma >= 0
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Truncation N of the representation space
    #[arg(long, global = true)]
    pub trunc_n: Option<usize>,
    /// Points of the phi grid (0 = 4d+4)
    #[arg(long, global = true)]
    pub phi_points: Option<usize>,
    /// Highest monomial degree checked
    #[arg(long, global = true)]
    pub max_degree: Option<usize>,
    /// Comparison tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
    /// Seed for randomised sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fields set here win over `base`.
    pub fn over(&self, base: RunConfig) -> RunConfig {
        RunConfig {
            q: self.q.unwrap_or(base.q),
            tau: self.tau.unwrap_or(base.tau),
            sigma: self.sigma.unwrap_or(base.sigma),
            trunc_n: self.trunc_n.unwrap_or(base.trunc_n),
            phi_points: self.phi_points.unwrap_or(base.phi_points),
            max_degree: self.max_degree.unwrap_or(base.max_degree),
            tol: self.tol.unwrap_or(base.tol),
            output: self.output.unwrap_or(base.output),
            seed: self.seed.unwrap_or(base.seed),
        }
    }
}

/// Flags over file over defaults.
pub fn resolve(flags: &PartialConfig, file: Option<&Path>) -> Result<RunConfig, CliError> {
    let base = match file {
        Some(path) => PartialConfig::load(path)?.over(RunConfig::default()),
        None => RunConfig::default(),
    };
    let cfg = flags.over(base);
    cfg.context()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn context(&self) -> Result<QContext, CliError> {
        Ok(QContext::new(self.q)?)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig, CliError> {
        Ok(VerifyConfig::new(
            self.context()?,
            self.tau,
            self.sigma,
            self.trunc_n,
            Poly::monomials(self.max_degree),
            self.tol,
            self.phi_points,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml_and_json() {
        let cfg = RunConfig {
            q: 0.3,
            output: OutputFormat::Csv,
            seed: 7,
            ..RunConfig::default()
        };
        let back: RunConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn precedence() {
        let file = PartialConfig {
            q: Some(0.3),
            tau: Some(1.0),
            ..Default::default()
        };
        let flags = PartialConfig {
            q: Some(0.8),
            ..Default::default()
        };
        let cfg = flags.over(file.over(RunConfig::default()));
        assert_eq!(cfg.q, 0.8);
        assert_eq!(cfg.tau, 1.0);
        assert_eq!(cfg.sigma, RunConfig::default().sigma);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<PartialConfig>("qq = 0.5").is_err());
    }
}
