//! Experiment configuration.
//!
//! One TOML file per run. Unknown keys are rejected everywhere, and every
//! precondition is checked against the named field before any computation.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dirac_hardy::{MeshScheme, OriginClosure, Potential};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("precondition violated: `{field}` {why}")]
    Field { field: &'static str, why: String },
}

fn field(field: &'static str, why: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, why: why.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyHardy,
    EstimateC,
    SolveEigen,
    ResolventCheck,
    DomainDiagnostics,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyHardy => "verify-hardy",
            Command::EstimateC => "estimate-c",
            Command::SolveEigen => "solve-eigen",
            Command::ResolventCheck => "resolvent-check",
            Command::DomainDiagnostics => "domain-diagnostics",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Coulomb,
    PerturbedCoulomb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(rename = "type")]
    pub kind: PotentialKind,
    pub nu: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub gamma_cap: f64,
}

impl PotentialConfig {
    pub fn build(&self) -> anyhow::Result<Potential> {
        self.build_with_nu(self.nu)
    }

    pub fn build_with_nu(&self, nu: f64) -> anyhow::Result<Potential> {
        Ok(match self.kind {
            PotentialKind::Coulomb => Potential::coulomb(nu)?,
            PotentialKind::PerturbedCoulomb => Potential::perturbed_coulomb(nu, self.c1, self.gamma_cap)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Uniform,
    LogUniform,
}

impl From<Scheme> for MeshScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Uniform => MeshScheme::Uniform,
            Scheme::LogUniform => MeshScheme::LogUniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    Regular,
    Dirichlet,
}

impl From<Closure> for OriginClosure {
    fn from(c: Closure) -> Self {
        match c {
            Closure::Regular => OriginClosure::Regular,
            Closure::Dirichlet => OriginClosure::Dirichlet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub scheme: Scheme,
    pub closure: Closure,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-6,
            r_max: 60.0,
            n: 4000,
            scheme: Scheme::LogUniform,
            closure: Closure::Regular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Verdict tolerance on `mu_1`.
    pub hardy: f64,
    pub gamma: f64,
    pub mu: f64,
    /// Bracket width for `estimate-c`.
    pub estimate: f64,
    /// Largest acceptable relative residual in `resolvent-check`.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hardy: 1e-6,
            gamma: 1e-8,
            mu: 1e-7,
            estimate: 1e-4,
            residual: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    N,
    #[serde(rename = "nu")]
    Nu,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "c")]
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_channels")]
    pub channels: Vec<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: i32,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_per_decade")]
    pub cutoffs_per_decade: usize,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_channels() -> Vec<i32> {
    vec![-1, 1, -2, 2]
}

fn default_kappa() -> i32 {
    -1
}

fn default_k() -> usize {
    1
}

fn default_samples() -> usize {
    100
}

fn default_per_decade() -> usize {
    5
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        if let Some(declared) = self.command {
            if declared != command {
                return Err(field(
                    "command",
                    format!("is `{}` but `{}` was requested", declared.name(), command.name()),
                ));
            }
        }
        let p = &self.potential;
        if !(p.nu > 0.0 && p.nu <= 1.0) {
            return Err(field("potential.nu", format!("= {} must lie in (0, 1]", p.nu)));
        }
        if p.kind == PotentialKind::PerturbedCoulomb {
            if p.nu >= 1.0 {
                return Err(field("potential.nu", "must be below 1 for perturbed-coulomb"));
            }
            if !(p.c1 >= 0.0) {
                return Err(field("potential.c1", "must be nonnegative"));
            }
            if !(p.gamma_cap >= 0.0) {
                return Err(field("potential.gamma_cap", "must be nonnegative"));
            }
        }
        let g = &self.grid;
        if !(g.r_min > 0.0) {
            return Err(field("grid.r_min", "must be positive"));
        }
        if !(g.r_max > g.r_min) {
            return Err(field("grid.r_max", "must exceed grid.r_min"));
        }
        if g.n < dirac_hardy::grid::MIN_NODES {
            return Err(field("grid.N", format!("must be at least {}", dirac_hardy::grid::MIN_NODES)));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.hardy", t.hardy),
            ("tolerances.gamma", t.gamma),
            ("tolerances.mu", t.mu),
            ("tolerances.estimate", t.estimate),
            ("tolerances.residual", t.residual),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field(name, "must be positive"));
            }
        }
        if self.channels.is_empty() {
            return Err(field("channels", "must not be empty"));
        }
        if self.channels.contains(&0) {
            return Err(field("channels", "must not contain 0"));
        }
        if self.kappa == 0 {
            return Err(field("kappa", "must be nonzero"));
        }
        if self.k == 0 {
            return Err(field("k", "must be at least 1"));
        }

        match command {
            Command::VerifyHardy => {
                let c = self.c.ok_or_else(|| field("c", "is required for verify-hardy"))?;
                if !(c > -1.0 && c < 1.0) {
                    return Err(field("c", format!("= {c} must lie in (-1, 1)")));
                }
            }
            Command::ResolventCheck => {
                self.gamma.ok_or_else(|| field("gamma", "is required for resolvent-check"))?;
                if self.samples == 0 {
                    return Err(field("samples", "must be at least 1"));
                }
            }
            Command::SolveEigen | Command::DomainDiagnostics => {
                if let Some([lo, hi]) = self.window {
                    if !(lo < hi) {
                        return Err(field("window", "must satisfy lo < hi"));
                    }
                }
                if command == Command::DomainDiagnostics && self.cutoffs_per_decade == 0 {
                    return Err(field("cutoffs_per_decade", "must be at least 1"));
                }
            }
            Command::EstimateC => {
                if !(t.estimate < 0.1) {
                    return Err(field("tolerances.estimate", "must be below 0.1"));
                }
            }
            Command::Sweep => {
                let s = self.sweep.as_ref().ok_or_else(|| field("sweep", "table is required for sweep"))?;
                if s.values.is_empty() {
                    return Err(field("sweep.values", "must not be empty"));
                }
                if s.values.iter().any(|v| !v.is_finite()) {
                    return Err(field("sweep.values", "must be finite"));
                }
                match s.axis {
                    Axis::N => {
                        if s.values.iter().any(|&v| v.fract() != 0.0 || v < dirac_hardy::grid::MIN_NODES as f64) {
                            return Err(field(
                                "sweep.values",
                                format!("N values must be integers >= {}", dirac_hardy::grid::MIN_NODES),
                            ));
                        }
                    }
                    Axis::Nu => {
                        if s.values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
                            return Err(field("sweep.values", "nu values must lie in (0, 1]"));
                        }
                    }
                    Axis::C => {
                        if s.values.iter().any(|&v| !(v > -1.0 && v < 1.0)) {
                            return Err(field("sweep.values", "c values must lie in (-1, 1)"));
                        }
                    }
                    Axis::Gamma => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[potential]\ntype = \"coulomb\"\nnu = 0.5\n";

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.channels, vec![-1, 1, -2, 2]);
        assert_eq!(c.kappa, -1);
        c.validate(Command::SolveEigen).unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}typo = 1\n");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.contains("typo"), "{err}");
        let text = format!("{MINIMAL}[grid]\nNN = 100\n");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::parse(MINIMAL).unwrap();
        c.command = Some(Command::Sweep);
        c.sweep = Some(SweepConfig {
            axis: Axis::N,
            values: vec![1000.0, 2000.0],
        });
        c.window = Some([1.1, 1.9]);
        let back = ExperimentConfig::parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_fields_are_named() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        let err = c.validate(Command::VerifyHardy).unwrap_err().to_string();
        assert!(err.contains("`c`"), "{err}");
        let err = c.validate(Command::Sweep).unwrap_err().to_string();
        assert!(err.contains("`sweep`"), "{err}");
    }
}
