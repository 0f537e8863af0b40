//! Run configuration read from TOML, with command-line overrides applied on
//! top.

use std::path::{Path, PathBuf};

use lindstedt_core::{Frequency, MapSpec, Real, TrigPoly, GOLDEN_MEAN};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `"golden"` or a literal rotation number in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    Token(String),
    Value(Real),
}

impl OmegaSpec {
    pub fn golden() -> Self {
        OmegaSpec::Token("golden".into())
    }

    /// Accepts the token or anything `f64::from_str` reads.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s == "golden" {
            return Ok(Self::golden());
        }
        s.parse::<Real>()
            .map(OmegaSpec::Value)
            .map_err(|_| CliError::Validation(format!("omega must be \"golden\" or a number, got {s:?}")))
    }

    pub fn value(&self) -> Result<Real, CliError> {
        match self {
            OmegaSpec::Token(t) if t == "golden" => Ok(GOLDEN_MEAN),
            OmegaSpec::Token(t) => Err(CliError::Validation(format!("unknown omega token {t:?}"))),
            OmegaSpec::Value(v) => Ok(*v),
        }
    }

    /// Provenance written into coefficient files.
    pub fn provenance(&self) -> &'static str {
        match self {
            OmegaSpec::Token(_) => "golden",
            OmegaSpec::Value(_) => "literal",
        }
    }
}

/// `a cos(2πkθ) + b sin(2πkθ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialMode {
    pub k: usize,
    #[serde(default)]
    pub cos: Real,
    #[serde(default)]
    pub sin: Real,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsSamples {
    pub eps_min: Real,
    pub eps_max: Real,
    pub eps_count: usize,
    pub theta_count: usize,
}

impl Default for EpsSamples {
    fn default() -> Self {
        Self {
            eps_min: 1e-3,
            eps_max: 1e-2,
            eps_count: 11,
            theta_count: 64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub omega: OmegaSpec,
    pub tau: Real,
    pub k_max: usize,
    pub alpha: usize,
    /// Expansion order for `expand`, `fit` and `residual`.
    #[serde(rename = "N")]
    pub n: usize,
    /// Seed order and step count for `newton`.
    #[serde(rename = "N0")]
    pub n0: usize,
    pub h: usize,
    pub rho: Real,
    /// `"f64"` (alias `"double"`); the only precision compiled in.
    pub precision: String,
    pub potential: Vec<PotentialMode>,
    pub fit: FitWindow,
    pub residual: EpsSamples,
    pub output: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega: OmegaSpec::golden(),
            tau: 1.0,
            k_max: 10_000,
            alpha: 3,
            n: 32,
            n0: 4,
            h: 3,
            rho: 0.05,
            precision: "f64".into(),
            potential: vec![PotentialMode { k: 1, cos: 0.0, sin: 1.0 }],
            fit: FitWindow::default(),
            residual: EpsSamples::default(),
            output: Outputs::default(),
        }
    }
}

/// Command-line values that replace config entries when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub n0: Option<usize>,
    pub h: Option<usize>,
    pub alpha: Option<usize>,
    pub omega: Option<String>,
    pub rho: Option<Real>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.precision = canonical_precision(&cfg.precision)?.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML; `from_toml(to_toml(c)) == c` and the text is a fixed
    /// point of the round trip.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.n0 {
            self.n0 = v;
        }
        if let Some(v) = o.h {
            self.h = v;
        }
        if let Some(v) = o.alpha {
            self.alpha = v;
        }
        if let Some(v) = &o.omega {
            self.omega = OmegaSpec::parse(v)?;
        }
        if let Some(v) = o.rho {
            self.rho = v;
        }
        Ok(())
    }

    pub fn potential_poly(&self) -> TrigPoly {
        let terms: Vec<_> = self.potential.iter().map(|m| (m.k, m.cos, m.sin)).collect();
        TrigPoly::from_cos_sin(&terms)
    }

    /// Checks ranges and builds the frequency cache and map.
    pub fn map(&self) -> Result<MapSpec, CliError> {
        if self.alpha == 0 {
            return Err(CliError::Validation("alpha must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(CliError::Validation(format!("rho must be positive, got {}", self.rho)));
        }
        let g = self.potential_poly();
        let freq = Frequency::with_estimated_nu(self.omega.value()?, self.tau, self.k_max)?;
        Ok(MapSpec::new(g, self.alpha, freq)?)
    }
}

fn canonical_precision(p: &str) -> Result<&'static str, CliError> {
    match p {
        "f64" | "double" => Ok("f64"),
        other => Err(CliError::Validation(format!(
            "precision {other:?} unavailable; this build supports \"f64\" (\"double\")"
        ))),
    }
}
