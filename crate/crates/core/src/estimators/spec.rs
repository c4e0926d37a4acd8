use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::covariates::{presets, CarrierRoles, CovariateOptions};
use crate::error::{Error, Result};
use crate::ingest::YearWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Estimator {
    Probit,
    Xtprobit,
    Relogit,
    /// Plain logit, the uncorrected counterpart of RELOGIT.
    Logit,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Probit => "PROBIT",
            Estimator::Xtprobit => "XTPROBIT",
            Estimator::Relogit => "RELOGIT",
            Estimator::Logit => "LOGIT",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PROBIT" => Ok(Estimator::Probit),
            "XTPROBIT" | "RE_PROBIT" | "REPROBIT" => Ok(Estimator::Xtprobit),
            "RELOGIT" => Ok(Estimator::Relogit),
            "LOGIT" => Ok(Estimator::Logit),
            other => Err(Error::invalid(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKey {
    #[default]
    Pair,
    /// Every row its own cluster.
    Observation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteFilter {
    #[default]
    All,
    Exist,
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleFilter {
    pub years: Option<YearWindow>,
    pub routes: RouteFilter,
    /// Drop a pair's rows after its entry year.
    pub censor_after_entry: bool,
}

/// One regression to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub estimator: Estimator,
    pub variables: Vec<String>,
    pub intercept: bool,
    pub cluster: ClusterKey,
    pub filter: SampleFilter,
    pub alpha: f64,
    pub quadrature_nodes: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// RELOGIT only.
    pub bias_correction: bool,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, estimator: Estimator, variables: Vec<String>) -> Self {
        ModelSpec {
            name: name.into(),
            estimator,
            variables,
            intercept: true,
            cluster: ClusterKey::Pair,
            filter: SampleFilter::default(),
            alpha: 0.10,
            quadrature_nodes: 12,
            tolerance: 1e-8,
            max_iterations: 100,
            bias_correction: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("{}: alpha must lie in (0, 1)", self.name)));
        }
        if self.quadrature_nodes < 4 || self.quadrature_nodes % 2 != 0 {
            return Err(Error::invalid(format!(
                "{}: quadrature node count must be even and at least 4",
                self.name
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid(format!("{}: tolerance must be positive", self.name)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid(format!("{}: max_iterations must be positive", self.name)));
        }
        if self.variables.is_empty() && !self.intercept {
            return Err(Error::invalid(format!("{}: no regressors", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: Option<String>,
    estimator: String,
    preset: Option<String>,
    #[serde(default)]
    variables: Vec<String>,
    #[serde(default)]
    trend_controls: bool,
    intercept: Option<bool>,
    cluster: Option<ClusterKey>,
    years: Option<String>,
    routes: Option<RouteFilter>,
    #[serde(default)]
    censor_after_entry: bool,
    alpha: Option<f64>,
    nodes: Option<usize>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    bias_correction: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecFile {
    #[serde(default)]
    carriers: CarrierRoles,
    #[serde(default)]
    covariates: CovariateOptions,
    #[serde(default)]
    model: Vec<RawModel>,
}

/// A parsed model-spec file: optional carrier roles and covariate options,
/// then one or more `[[model]]` tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub carriers: CarrierRoles,
    pub covariates: CovariateOptions,
    pub models: Vec<ModelSpec>,
}

impl SpecFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Invalid(m) => Error::Invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSpecFile = toml::from_str(text).map_err(|e| Error::invalid(format!("spec file: {e}")))?;
        let mut models = Vec::with_capacity(raw.model.len());
        for (i, m) in raw.model.into_iter().enumerate() {
            let estimator: Estimator = m.estimator.parse()?;
            let name = m.name.unwrap_or_else(|| format!("({}) {}", i + 1, estimator));
            let mut variables: Vec<String> = match &m.preset {
                Some(p) => presets::by_name(p)
                    .ok_or_else(|| Error::invalid(format!("{name}: unknown preset '{p}'")))?
                    .iter()
                    .map(|v| v.label().to_string())
                    .collect(),
                None => Vec::new(),
            };
            variables.extend(m.variables);
            if m.trend_controls {
                for v in presets::TREND_CONTROLS {
                    if !variables.iter().any(|s| crate::covariates::canonical_key(s) == v.key()) {
                        variables.push(v.label().to_string());
                    }
                }
            }
            let mut spec = ModelSpec::new(name, estimator, variables);
            if let Some(b) = m.intercept {
                spec.intercept = b;
            }
            if let Some(c) = m.cluster {
                spec.cluster = c;
            }
            if let Some(y) = m.years {
                spec.filter.years = Some(y.parse()?);
            }
            if let Some(r) = m.routes {
                spec.filter.routes = r;
            }
            spec.filter.censor_after_entry = m.censor_after_entry;
            if let Some(a) = m.alpha {
                spec.alpha = a;
            }
            if let Some(n) = m.nodes {
                spec.quadrature_nodes = n;
            }
            if let Some(t) = m.tolerance {
                spec.tolerance = t;
            }
            if let Some(t) = m.max_iterations {
                spec.max_iterations = t;
            }
            if let Some(b) = m.bias_correction {
                spec.bias_correction = b;
            }
            spec.validate()?;
            models.push(spec);
        }
        if models.is_empty() {
            return Err(Error::invalid("spec file defines no [[model]]"));
        }
        Ok(SpecFile {
            carriers: raw.carriers,
            covariates: raw.covariates,
            models,
        })
    }
}
