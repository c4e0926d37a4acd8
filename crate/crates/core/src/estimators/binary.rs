use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::newton::{maximize, spd_inverse, NewtonSettings, Optimum};
use super::normal::{inverse_mills, log_norm_cdf};
use super::result::FitParts;
use super::{clustered_sandwich, Diagnostics, Estimator, FitResult, ModelSpec};
use crate::covariates::DesignMatrix;
use crate::error::{Error, Result};

/// Rows per parallel block; fixed so sums do not depend on thread count.
const BLOCK: usize = 2048;

/// Index magnitude beyond which a still-improving fit is treated as
/// separated.
const SEPARATION_INDEX: f64 = 30.0;

/// Log-likelihood with analytic gradient and Hessian.
#[derive(Debug, Clone)]
pub struct LogLik {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Link {
    Probit,
    Logit,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl Link {
    /// `(ℓ, ∂ℓ/∂η, −∂²ℓ/∂η²)` for one observation with index η.
    fn terms(self, y: f64, eta: f64) -> (f64, f64, f64) {
        match self {
            Link::Probit => {
                let s = 2.0 * y - 1.0;
                let q = s * eta;
                let lambda = inverse_mills(q);
                (log_norm_cdf(q), s * lambda, lambda * (lambda + q))
            }
            Link::Logit => {
                let p = if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                };
                let ll = if y == 1.0 { -softplus(-eta) } else { -softplus(eta) };
                (ll, y - p, p * (1.0 - p))
            }
        }
    }
}

fn index(row: &[f64], beta: &[f64]) -> f64 {
    row.iter().zip(beta).map(|(x, b)| x * b).sum()
}

pub(crate) fn loglik(link: Link, beta: &[f64], d: &DesignMatrix) -> LogLik {
    let k = d.k;
    let parts: Vec<(f64, Vec<f64>, Vec<f64>)> = d
        .x
        .par_chunks(BLOCK * k)
        .zip(d.y.par_chunks(BLOCK))
        .map(|(xs, ys)| {
            let mut ll = 0.0;
            let mut g = vec![0.0; k];
            let mut h = vec![0.0; k * k];
            for (row, &y) in xs.chunks_exact(k).zip(ys) {
                let (l, a, w) = link.terms(y, index(row, beta));
                ll += l;
                for a_ in 0..k {
                    g[a_] += a * row[a_];
                    let wx = w * row[a_];
                    for b in a_..k {
                        h[a_ * k + b] -= wx * row[b];
                    }
                }
            }
            (ll, g, h)
        })
        .collect();
    let mut value = 0.0;
    let mut gradient = DVector::zeros(k);
    let mut hessian = DMatrix::zeros(k, k);
    for (ll, g, h) in parts {
        value += ll;
        for a in 0..k {
            gradient[a] += g[a];
            for b in a..k {
                hessian[(a, b)] += h[a * k + b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            hessian[(a, b)] = hessian[(b, a)];
        }
    }
    LogLik {
        value,
        gradient,
        hessian,
    }
}

/// Probit log-likelihood Σ y ln Φ(xβ) + (1−y) ln(1−Φ(xβ)).
pub fn probit_loglik(beta: &[f64], d: &DesignMatrix) -> LogLik {
    loglik(Link::Probit, beta, d)
}

pub fn logit_loglik(beta: &[f64], d: &DesignMatrix) -> LogLik {
    loglik(Link::Logit, beta, d)
}

/// Row-major `n × k` matrix of per-observation scores.
pub(crate) fn scores(link: Link, beta: &[f64], d: &DesignMatrix) -> Vec<f64> {
    let k = d.k;
    let mut out = vec![0.0; d.n * k];
    out.par_chunks_mut(k)
        .zip(d.x.par_chunks(k))
        .zip(d.y.par_iter())
        .for_each(|((s, row), &y)| {
            let (_, a, _) = link.terms(y, index(row, beta));
            for (sj, xj) in s.iter_mut().zip(row) {
                *sj = a * xj;
            }
        });
    out
}

pub(crate) fn check_outcome(d: &DesignMatrix) -> Result<()> {
    if d.n == 0 {
        return Err(Error::invalid("design has no rows"));
    }
    let pos = d.positives();
    if pos == 0 || pos == d.n {
        return Err(Error::invalid(format!(
            "outcome has no variation ({pos} positives in {} rows)",
            d.n
        )));
    }
    Ok(())
}

fn settings(spec: &ModelSpec) -> NewtonSettings {
    NewtonSettings {
        tolerance: spec.tolerance,
        max_iterations: spec.max_iterations,
        ..NewtonSettings::default()
    }
}

/// Starting values: zeros, with the intercept at the link quantile of the
/// positive rate.
fn start(link: Link, d: &DesignMatrix) -> DVector<f64> {
    let mut b = DVector::zeros(d.k);
    if d.intercept {
        let rate = d.positives() as f64 / d.n as f64;
        b[0] = match link {
            Link::Probit => Normal::standard().inverse_cdf(rate),
            Link::Logit => (rate / (1.0 - rate)).ln(),
        };
    }
    b
}

fn max_abs_index(d: &DesignMatrix, beta: &[f64]) -> f64 {
    d.x.par_chunks(d.k).map(|r| index(r, beta).abs()).reduce(|| 0.0, f64::max)
}

/// Columns carrying the largest share of the index at `beta`.
fn separation_culprits(d: &DesignMatrix, beta: &[f64]) -> Vec<String> {
    let contrib: Vec<f64> = (0..d.k)
        .map(|j| {
            let m = (0..d.n).map(|i| d.get(i, j).abs()).fold(0.0, f64::max);
            beta[j].abs() * m
        })
        .collect();
    let top = contrib.iter().cloned().fold(0.0, f64::max);
    let mut names: Vec<String> = (0..d.k)
        .filter(|&j| contrib[j] >= 0.25 * top && !(d.intercept && j == 0 && d.k > 1))
        .map(|j| d.names[j].clone())
        .collect();
    if names.is_empty() {
        names.push(d.names[0].clone());
    }
    names
}

pub(crate) fn optimize(link: Link, d: &DesignMatrix, spec: &ModelSpec) -> Result<Optimum> {
    check_outcome(d)?;
    let mut strikes = 0;
    maximize(
        start(link, d),
        |b| {
            let ll = loglik(link, b.as_slice(), d);
            Ok(ll)
        },
        settings(spec),
        |b, old, new| {
            let max_index = max_abs_index(d, b.as_slice());
            if max_index > SEPARATION_INDEX && new > old {
                strikes += 1;
                if strikes >= 2 {
                    return Err(Error::Separation {
                        max_index,
                        columns: separation_culprits(d, b.as_slice()),
                    });
                }
            } else {
                strikes = 0;
            }
            Ok(())
        },
    )
}

/// lnL of the intercept-only model, which matches the sample frequency for
/// either link.
pub(crate) fn null_loglik(d: &DesignMatrix) -> f64 {
    let n1 = d.positives() as f64;
    let n0 = d.n as f64 - n1;
    let p = n1 / d.n as f64;
    n1 * p.ln() + n0 * (1.0 - p).ln()
}

fn diagnostics(opt: &Optimum) -> Diagnostics {
    Diagnostics {
        iterations: opt.iterations,
        gradient_norm: opt.gradient_norm,
        stopping_rule: if opt.gradient_converged {
            "gradient".into()
        } else {
            "precision-floor".into()
        },
    }
}

fn pooled_fit(link: Link, estimator: Estimator, d: &DesignMatrix, spec: &ModelSpec) -> Result<(FitResult, Optimum)> {
    let opt = optimize(link, d, spec)?;
    let bread = spd_inverse(&-&opt.loglik.hessian)?;
    let s = scores(link, opt.beta.as_slice(), d);
    let cov = clustered_sandwich(&bread, &s, &d.clusters, d.n)?;
    let fit = FitResult::from_parts(
        &spec.name,
        estimator,
        spec.alpha,
        d,
        FitParts {
            beta: opt.beta.iter().copied().collect(),
            covariance: cov,
            log_likelihood: opt.loglik.value,
            null_log_likelihood: null_loglik(d),
            parameters: d.k,
            diagnostics: diagnostics(&opt),
        },
    )?;
    Ok((fit, opt))
}

/// Probit by Newton–Raphson with clustered sandwich covariance.
pub fn fit_probit(d: &DesignMatrix, spec: &ModelSpec) -> Result<FitResult> {
    pooled_fit(Link::Probit, Estimator::Probit, d, spec).map(|(f, _)| f)
}

/// Plain logit MLE with clustered sandwich covariance.
pub fn fit_logit(d: &DesignMatrix, spec: &ModelSpec) -> Result<FitResult> {
    pooled_fit(Link::Logit, Estimator::Logit, d, spec).map(|(f, _)| f)
}

/// Rare-events logit: the logit MLE less its small-sample bias
/// `(XᵀWX)⁻¹ XᵀW ξ`, ξᵢ = Qᵢᵢ(π̂ᵢ − ½), with covariance scaled by
/// `(n/(n+k))²`. lnL and fit statistics refer to the MLE. With
/// `spec.bias_correction` off the result is the logit MLE unchanged.
pub fn fit_relogit(d: &DesignMatrix, spec: &ModelSpec) -> Result<FitResult> {
    let (mut fit, opt) = pooled_fit(Link::Logit, Estimator::Relogit, d, spec)?;
    let mle: Vec<f64> = opt.beta.iter().copied().collect();
    fit.uncorrected = Some(mle.clone());
    if !spec.bias_correction {
        fit.notes.push("bias correction disabled".into());
        return Ok(fit);
    }
    let k = d.k;
    let info = -&opt.loglik.hessian;
    let ainv = spd_inverse(&info)?;
    let parts: Vec<Vec<f64>> = d
        .x
        .par_chunks(BLOCK * k)
        .map(|xs| {
            let mut acc = vec![0.0; k];
            for row in xs.chunks_exact(k) {
                let eta = index(row, &mle);
                let p = 1.0 / (1.0 + (-eta).exp());
                let w = p * (1.0 - p);
                let x = DVector::from_column_slice(row);
                let q = x.dot(&(&ainv * &x));
                let xi = q * (p - 0.5);
                for j in 0..k {
                    acc[j] += row[j] * w * xi;
                }
            }
            acc
        })
        .collect();
    let mut xw_xi = DVector::zeros(k);
    for p in parts {
        for j in 0..k {
            xw_xi[j] += p[j];
        }
    }
    let bias = &ainv * xw_xi;
    let n = d.n as f64;
    let shrink = (n / (n + k as f64)).powi(2);
    for row in fit.covariance.iter_mut() {
        for v in row.iter_mut() {
            *v *= shrink;
        }
    }
    for (j, c) in fit.coefficients.iter_mut().enumerate() {
        c.estimate = mle[j] - bias[j];
        c.std_error = fit.covariance[j][j].max(0.0).sqrt();
        c.z = c.estimate / c.std_error;
        c.p_value = super::normal::two_sided_p(c.z);
    }
    Ok(fit)
}

/// Dispatches on `spec.estimator`.
pub fn fit(d: &DesignMatrix, spec: &ModelSpec) -> Result<FitResult> {
    spec.validate()?;
    match spec.estimator {
        Estimator::Probit => fit_probit(d, spec),
        Estimator::Logit => fit_logit(d, spec),
        Estimator::Relogit => fit_relogit(d, spec),
        Estimator::Xtprobit => super::fit_re_probit(d, spec),
    }
}
