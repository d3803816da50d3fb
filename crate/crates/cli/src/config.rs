use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config is for `{found}` but the subcommand is `{expected}`")]
    WrongCommand { expected: &'static str, found: &'static str },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    PhaseEd,
    GapScan,
    GapScaling,
    RgFlow,
    RgBoundary,
    ChainRg,
    Dimer,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::PhaseEd => "phase-ed",
            CommandName::GapScan => "gap-scan",
            CommandName::GapScaling => "gap-scaling",
            CommandName::RgFlow => "rg-flow",
            CommandName::RgBoundary => "rg-boundary",
            CommandName::ChainRg => "chain-rg",
            CommandName::Dimer => "dimer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

/// A swept coupling: one value, an explicit list, or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Value(f64),
    List(Vec<f64>),
    Range(Range),
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Value(v) => vec![*v],
            Sweep::List(v) => v.clone(),
            Sweep::Range(r) => match r.points {
                0 => Vec::new(),
                1 => vec![r.from],
                n => (0..n).map(|i| r.from + (r.to - r.from) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    fn single(&self) -> Option<f64> {
        match self.values().as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorName {
    Full,
    ZeroMomentum,
}

/// One run, as read from a JSON file. Every key is optional; absent keys take
/// per-command defaults when the run is resolved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Ladder lengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Sweep>,
    /// Top-row XX coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Sweep>,
    /// Bare V of an RG flow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// RG flow only: start at the critical U plus this offset when `u` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// RG boundary only: explicit `[gamma, xi]` rays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorName>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config always serializes")
    }

    /// Applies overrides and per-command defaults.
    pub fn resolve(mut self, command: CommandName, o: &Overrides) -> Result<RunConfig, ConfigError> {
        if let Some(found) = self.command {
            if found != command {
                return Err(ConfigError::WrongCommand {
                    expected: command.as_str(),
                    found: found.as_str(),
                });
            }
        }
        self.command = Some(command);
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        self.seed = o.seed.or(self.seed).or(Some(0));
        self.workers = o.workers.or(self.workers);
        self.tol = o.tol.or(self.tol).or(Some(1e-10));
        if command != CommandName::RgFlow {
            self.u = self.u.or(Some(1.0));
        }
        let range = |from, to, points| Some(Sweep::Range(Range { from, to, points }));
        match command {
            CommandName::PhaseEd => {
                self.sizes = self.sizes.or(Some(vec![8]));
                self.k = self.k.or(Some(Sweep::Value(5.0)));
                self.gamma = self.gamma.or(range(0.5, 3.5, 7));
                self.xi = self.xi.or(Some(Sweep::Value(0.0)));
                self.sector = self.sector.or(Some(SectorName::ZeroMomentum));
            }
            CommandName::GapScan | CommandName::GapScaling => {
                self.sizes = self.sizes.or(Some(vec![4, 6, 8]));
                self.k = self.k.or(Some(Sweep::Value(5.0)));
                self.gamma = self.gamma.or(range(1.0, 3.0, 21));
                self.xi = self.xi.or(Some(Sweep::Value(0.0)));
                self.sector = self.sector.or(Some(SectorName::ZeroMomentum));
            }
            CommandName::RgFlow => {
                if self.u.is_some() && self.u_offset.is_some() {
                    return Err(ConfigError::Invalid("give either u or u_offset, not both".into()));
                }
                self.gamma = self.gamma.or(Some(Sweep::Value(1.0)));
                self.xi = self.xi.or(Some(Sweep::Value(0.0)));
                self.v = self.v.or(Some(0.0));
                self.steps = self.steps.or(Some(60));
            }
            CommandName::RgBoundary => {
                self.xi = self.xi.or(range(-2.0, 2.0, 9));
                self.rays = self.rays.or(Some(Vec::new()));
            }
            CommandName::ChainRg => {
                self.gamma = self.gamma.or(range(0.0, 2.0, 21));
                self.xi = self.xi.or(range(-1.0, 1.0, 5));
            }
            CommandName::Dimer => {
                self.sizes = self.sizes.or(Some(vec![4, 6, 8, 10]));
                self.xi = self.xi.or(Some(Sweep::Value(0.0)));
                self.gamma = self.gamma.or(range(1.0, 3.0, 2));
            }
        }
        self.check(command)?;
        Ok(self)
    }

    fn check(&self, command: CommandName) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(w) = self.workers {
            if w == 0 {
                return bad("workers must be at least 1".into());
            }
        }
        let tol = self.tol();
        if !(tol > 0.0 && tol.is_finite()) {
            return bad(format!("tol must be positive, got {tol}"));
        }
        for (name, s) in [("k", &self.k), ("gamma", &self.gamma), ("xi", &self.xi)] {
            if let Some(s) = s {
                if s.values().iter().any(|v| !v.is_finite()) {
                    return bad(format!("{name} contains a non-finite value"));
                }
            }
        }
        if let Some(u) = self.u {
            if !u.is_finite() {
                return bad("u must be finite".into());
            }
        }
        match command {
            CommandName::PhaseEd | CommandName::GapScan | CommandName::GapScaling => {
                if self.u() <= 0.0 {
                    return bad("u must be positive so that ratios to U are defined".into());
                }
            }
            _ => {}
        }
        match command {
            CommandName::GapScan | CommandName::GapScaling | CommandName::Dimer => {
                if self.gamma_range().is_none() {
                    return bad("gamma must be a {from, to, points} range for this command".into());
                }
            }
            CommandName::RgFlow => {
                for (name, s) in [("gamma", &self.gamma), ("xi", &self.xi)] {
                    if s.as_ref().and_then(Sweep::single).is_none() {
                        return bad(format!("{name} must be a single value for rg-flow"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Hex SHA-256 of the result-relevant part of the config.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.workers = None;
        let digest = Sha256::digest(c.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-10)
    }

    pub fn u(&self) -> f64 {
        self.u.unwrap_or(1.0)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sizes.clone().unwrap_or_default()
    }

    pub fn k_values(&self) -> Vec<f64> {
        self.k.as_ref().map(Sweep::values).unwrap_or_default()
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        self.gamma.as_ref().map(Sweep::values).unwrap_or_default()
    }

    pub fn xi_values(&self) -> Vec<f64> {
        self.xi.as_ref().map(Sweep::values).unwrap_or_default()
    }

    pub fn gamma_single(&self) -> Option<f64> {
        self.gamma.as_ref().and_then(Sweep::single)
    }

    pub fn xi_single(&self) -> Option<f64> {
        self.xi.as_ref().and_then(Sweep::single)
    }

    pub fn gamma_range(&self) -> Option<Range> {
        match self.gamma {
            Some(Sweep::Range(r)) => Some(r),
            _ => None,
        }
    }
}
