use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::normal::two_sided_p;
use super::Estimator;
use crate::covariates::{DesignMatrix, DroppedColumn, INTERCEPT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Random-intercept scale reported by XTPROBIT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponent {
    pub sigma_u: f64,
    /// Absent when the group effect is not identified.
    pub sigma_u_se: Option<f64>,
    pub sigma_u_squared: f64,
    /// Share of latent variance due to the group effect, σ²/(1+σ²).
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    /// "gradient" or "precision-floor".
    pub stopping_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub name: String,
    pub estimator: Estimator,
    pub coefficients: Vec<Coefficient>,
    /// Cluster-robust covariance of the coefficients, row by row.
    pub covariance: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub pseudo_r2: f64,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub clusters: usize,
    pub positives: usize,
    /// Estimated parameters, including a variance component if any.
    pub parameters: usize,
    pub alpha: f64,
    pub dropped: Vec<DroppedColumn>,
    pub variance_component: Option<VarianceComponent>,
    /// RELOGIT: the logit MLE before bias correction.
    pub uncorrected: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
    pub notes: Vec<String>,
}

pub(crate) struct FitParts {
    pub beta: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub parameters: usize,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    pub(crate) fn from_parts(name: &str, estimator: Estimator, alpha: f64, d: &DesignMatrix, parts: FitParts) -> Result<Self> {
        let stats = super::fit_stats(
            parts.log_likelihood,
            parts.null_log_likelihood,
            parts.parameters,
            d.n,
        )?;
        let coefficients = d
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let se = parts.covariance[(j, j)].max(0.0).sqrt();
                let z = parts.beta[j] / se;
                Coefficient {
                    name: name.clone(),
                    estimate: parts.beta[j],
                    std_error: se,
                    z,
                    p_value: two_sided_p(z),
                }
            })
            .collect();
        let k = d.k;
        Ok(FitResult {
            name: name.to_string(),
            estimator,
            coefficients,
            covariance: (0..k).map(|a| (0..k).map(|b| parts.covariance[(a, b)]).collect()).collect(),
            log_likelihood: parts.log_likelihood,
            null_log_likelihood: parts.null_log_likelihood,
            pseudo_r2: stats.pseudo_r2,
            aic: stats.aic,
            bic: stats.bic,
            n: d.n,
            clusters: d.cluster_count(),
            positives: d.positives(),
            parameters: parts.parameters,
            alpha,
            dropped: d.dropped.clone(),
            variance_component: None,
            uncorrected: None,
            diagnostics: parts.diagnostics,
            notes: Vec::new(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coefficients.iter().map(|c| c.name.as_str())
    }

    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.std_error).collect()
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let k = self.coefficients.len();
        DMatrix::from_fn(k, k, |a, b| self.covariance[a][b])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// One row per coefficient: variable, estimate, stars, std_error, z, p.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["variable", "estimate", "stars", "std_error", "z", "p_value"])?;
        for c in &self.coefficients {
            wtr.write_record([
                c.name.clone(),
                format!("{}", c.estimate),
                stars(c.p_value).to_string(),
                format!("{}", c.std_error),
                format!("{}", c.z),
                format!("{}", c.p_value),
            ])?;
        }
        for d in &self.dropped {
            wtr.write_record([d.name.as_str(), "–", "", "", "", ""])?;
        }
        wtr.flush().map_err(|e| Error::io("<fit csv>", e))?;
        Ok(())
    }
}

/// `***` for p < 0.01, `**` for p < 0.05, `*` for p < 0.10.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Side-by-side table of several fits: one row per variable (intercept
/// last), cells `estimate` plus stars, `–` for dropped columns, then the
/// fit statistics.
pub fn write_comparison_csv<W: Write>(fits: &[FitResult], w: W) -> Result<()> {
    let mut rows: Vec<String> = Vec::new();
    for f in fits {
        for name in f.names().chain(f.dropped.iter().map(|d| d.name.as_str())) {
            if name != INTERCEPT && !rows.iter().any(|r| r == name) {
                rows.push(name.to_string());
            }
        }
    }
    rows.push(INTERCEPT.to_string());
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["variable".to_string()];
    header.extend(fits.iter().map(|f| f.name.clone()));
    wtr.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![r.clone()];
        for f in fits {
            rec.push(match f.coefficient(r) {
                Some(c) => format!("{:.4}{}", c.estimate, stars(c.p_value)),
                None if f.dropped.iter().any(|d| &d.name == r) => "–".to_string(),
                None => String::new(),
            });
        }
        wtr.write_record(&rec)?;
    }
    let footer: [(&str, &dyn Fn(&FitResult) -> String); 8] = [
        ("Estimator", &|f| f.estimator.to_string()),
        ("Log likelihood", &|f| format!("{:.2}", f.log_likelihood)),
        ("Pseudo R2", &|f| format!("{:.4}", f.pseudo_r2)),
        ("AIC", &|f| format!("{:.2}", f.aic)),
        ("BIC", &|f| format!("{:.2}", f.bic)),
        ("Nr Observations", &|f| f.n.to_string()),
        ("Airport-Pair Clusters", &|f| f.clusters.to_string()),
        ("Entries", &|f| f.positives.to_string()),
    ];
    for (label, cell) in footer {
        let mut rec = vec![label.to_string()];
        rec.extend(fits.iter().map(cell));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<comparison csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.0099), "***");
        assert_eq!(stars(0.01), "**");
        assert_eq!(stars(0.0499), "**");
        assert_eq!(stars(0.05), "*");
        assert_eq!(stars(0.0999), "*");
        assert_eq!(stars(0.10), "");
        assert_eq!(stars(f64::NAN), "");
    }
}
