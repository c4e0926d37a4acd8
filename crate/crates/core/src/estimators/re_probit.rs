use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::binary::{check_outcome, null_loglik, optimize, Link};
use super::newton::{maximize, spd_inverse, NewtonSettings};
use super::normal::{inverse_mills, log_norm_cdf};
use super::result::FitParts;
use super::{clustered_sandwich, fit_probit, Diagnostics, Estimator, FitResult, LogLik, ModelSpec, VarianceComponent};
use crate::covariates::DesignMatrix;
use crate::error::{Error, Result};

/// Groups per parallel block.
const BLOCK: usize = 256;

/// Starting value of the random-intercept scale.
const SIGMA_START: f64 = 0.5;

/// Gauss–Hermite rule for ∫ e^{−x²} f(x) dx: ascending nodes and weights.
/// Nodes are exactly antisymmetric and weights symmetric.
pub fn gauss_hermite(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 {
        return Err(Error::invalid("quadrature needs at least one node"));
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Row indices grouped by id, groups in order of first appearance.
struct Groups {
    rows: Vec<usize>,
    starts: Vec<usize>,
}

impl Groups {
    fn new(ids: &[u32]) -> Self {
        let mut slot: HashMap<u32, usize> = HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, g) in ids.iter().enumerate() {
            let s = *slot.entry(*g).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            members[s].push(i);
        }
        let mut starts = Vec::with_capacity(members.len() + 1);
        let mut rows = Vec::with_capacity(ids.len());
        for m in members {
            starts.push(rows.len());
            rows.extend(m);
        }
        starts.push(rows.len());
        Groups { rows, starts }
    }

    fn len(&self) -> usize {
        self.starts.len() - 1
    }

    fn members(&self, g: usize) -> &[usize] {
        &self.rows[self.starts[g]..self.starts[g + 1]]
    }
}

struct Rule {
    /// √2 · node, the group effect per unit σ.
    shifts: Vec<f64>,
    log_weights: Vec<f64>,
}

impl Rule {
    fn new(m: usize) -> Result<Self> {
        let (nodes, weights) = gauss_hermite(m)?;
        let ln_sqrt_pi = 0.5 * std::f64::consts::PI.ln();
        Ok(Rule {
            shifts: nodes.iter().map(|x| std::f64::consts::SQRT_2 * x).collect(),
            log_weights: weights.iter().map(|w| w.ln() - ln_sqrt_pi).collect(),
        })
    }
}

/// Contribution of one group: lnL_g, its score over (β, σ) and Hessian.
fn group_terms(d: &DesignMatrix, rows: &[usize], beta: &[f64], sigma: f64, rule: &Rule) -> (f64, Vec<f64>, Vec<f64>) {
    let k = d.k;
    let p = k + 1;
    let mm = rule.shifts.len();
    let xb: Vec<f64> = rows
        .iter()
        .map(|&i| d.row(i).iter().zip(beta).map(|(x, b)| x * b).sum())
        .collect();
    let sign: Vec<f64> = rows.iter().map(|&i| 2.0 * d.y[i] - 1.0).collect();

    let mut lm = vec![0.0; mm];
    for m in 0..mm {
        let c = sigma * rule.shifts[m];
        lm[m] = rule.log_weights[m]
            + xb.iter().zip(&sign).map(|(e, s)| log_norm_cdf(s * (e + c))).sum::<f64>();
    }
    let top = lm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = lm.iter().map(|l| (l - top).exp()).sum();
    let lg = top + total.ln();
    let pi: Vec<f64> = lm.iter().map(|l| (l - lg).exp()).collect();

    let mut sbar = vec![0.0; p];
    let mut outer = vec![0.0; p * p];
    let mut wxx = vec![0.0; rows.len()];
    let mut wxc = vec![0.0; rows.len()];
    let mut wcc = 0.0;
    let mut sm = vec![0.0; p];
    for m in 0..mm {
        let shift = rule.shifts[m];
        let c = sigma * shift;
        sm.iter_mut().for_each(|v| *v = 0.0);
        for (r, &i) in rows.iter().enumerate() {
            let q = sign[r] * (xb[r] + c);
            let lambda = inverse_mills(q);
            let a = sign[r] * lambda;
            let w = lambda * (lambda + q);
            for (s, x) in sm.iter_mut().zip(d.row(i)) {
                *s += a * x;
            }
            sm[k] += a * shift;
            wxx[r] += pi[m] * w;
            wxc[r] += pi[m] * w * shift;
            wcc += pi[m] * w * shift * shift;
        }
        for a in 0..p {
            sbar[a] += pi[m] * sm[a];
            let ps = pi[m] * sm[a];
            for b in a..p {
                outer[a * p + b] += ps * sm[b];
            }
        }
    }
    let mut h = outer;
    for a in 0..p {
        for b in a..p {
            h[a * p + b] -= sbar[a] * sbar[b];
        }
    }
    for (r, &i) in rows.iter().enumerate() {
        let x = d.row(i);
        for a in 0..k {
            let wa = wxx[r] * x[a];
            for b in a..k {
                h[a * p + b] -= wa * x[b];
            }
            h[a * p + k] -= wxc[r] * x[a];
        }
    }
    h[k * p + k] -= wcc;
    (lg, sbar, h)
}

/// Returns the log-likelihood and, when asked, per-group scores.
fn evaluate(d: &DesignMatrix, groups: &Groups, theta: &[f64], rule: &Rule, want_scores: bool) -> (LogLik, Vec<f64>) {
    let k = d.k;
    let p = k + 1;
    let beta = &theta[..k];
    let sigma = theta[k];
    let ids: Vec<usize> = (0..groups.len()).collect();
    let parts: Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> = ids
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut ll = 0.0;
            let mut g = vec![0.0; p];
            let mut h = vec![0.0; p * p];
            let mut sc = Vec::new();
            for &gid in chunk {
                let (lg, s, hg) = group_terms(d, groups.members(gid), beta, sigma, rule);
                ll += lg;
                for a in 0..p {
                    g[a] += s[a];
                }
                for (acc, v) in h.iter_mut().zip(&hg) {
                    *acc += v;
                }
                if want_scores {
                    sc.extend_from_slice(&s);
                }
            }
            (ll, g, h, sc)
        })
        .collect();
    let mut value = 0.0;
    let mut gradient = DVector::zeros(p);
    let mut hessian = DMatrix::zeros(p, p);
    let mut scores = Vec::new();
    for (ll, g, h, sc) in parts {
        value += ll;
        for a in 0..p {
            gradient[a] += g[a];
            for b in a..p {
                hessian[(a, b)] += h[a * p + b];
            }
        }
        scores.extend(sc);
    }
    for a in 0..p {
        for b in 0..a {
            hessian[(a, b)] = hessian[(b, a)];
        }
    }
    (
        LogLik {
            value,
            gradient,
            hessian,
        },
        scores,
    )
}

/// Random-intercept probit log-likelihood at `theta = (β, σ)` by
/// Gauss–Hermite quadrature with `nodes` points, grouping on `d.groups`.
pub fn re_probit_loglik(theta: &[f64], d: &DesignMatrix, nodes: usize) -> Result<LogLik> {
    if theta.len() != d.k + 1 {
        return Err(Error::invalid("theta must hold k coefficients and sigma"));
    }
    let rule = Rule::new(nodes)?;
    Ok(evaluate(d, &Groups::new(&d.groups), theta, &rule, false).0)
}

fn re_maximize(
    d: &DesignMatrix,
    groups: &Groups,
    rule: &Rule,
    beta0: &[f64],
    settings: NewtonSettings,
) -> Result<super::newton::Optimum> {
    let scale = (1.0 + SIGMA_START * SIGMA_START).sqrt();
    let mut theta0 = DVector::zeros(d.k + 1);
    for (t, b) in theta0.iter_mut().zip(beta0) {
        *t = b * scale;
    }
    theta0[d.k] = SIGMA_START;
    let mut opt = maximize(
        theta0,
        |t| Ok(evaluate(d, groups, t.as_slice(), rule, false).0),
        settings,
        |_, _, _| Ok(()),
    )?;
    // lnL is even in σ; report the nonnegative root.
    if opt.beta[d.k] < 0.0 {
        opt.beta[d.k] = -opt.beta[d.k];
        let k = d.k;
        opt.loglik.gradient[k] = -opt.loglik.gradient[k];
        for j in 0..k {
            opt.loglik.hessian[(j, k)] = -opt.loglik.hessian[(j, k)];
            opt.loglik.hessian[(k, j)] = -opt.loglik.hessian[(k, j)];
        }
    }
    Ok(opt)
}

/// Random-intercept probit over `d.groups` with clustered sandwich
/// covariance. The group effect is N(0, σ²); the reported pseudo-R² uses the
/// random-intercept null model. A panel with one row per group falls back
/// to pooled probit with σ = 0.
pub fn fit_re_probit(d: &DesignMatrix, spec: &ModelSpec) -> Result<FitResult> {
    check_outcome(d)?;
    if spec.quadrature_nodes < 4 || spec.quadrature_nodes % 2 != 0 {
        return Err(Error::invalid("quadrature node count must be even and at least 4"));
    }
    let groups = Groups::new(&d.groups);
    if groups.len() == d.n {
        let mut fit = fit_probit(d, spec)?;
        fit.estimator = Estimator::Xtprobit;
        fit.variance_component = Some(VarianceComponent {
            sigma_u: 0.0,
            sigma_u_se: None,
            sigma_u_squared: 0.0,
            rho: 0.0,
        });
        fit.notes
            .push("one observation per group: the group effect is not identified, pooled probit reported".into());
        return Ok(fit);
    }
    let mut group_cluster = Vec::with_capacity(groups.len());
    for g in 0..groups.len() {
        let rows = groups.members(g);
        let c = d.clusters[rows[0]];
        if rows.iter().any(|&i| d.clusters[i] != c) {
            return Err(Error::invalid("random-effect groups must nest within clusters"));
        }
        group_cluster.push(c);
    }

    let rule = Rule::new(spec.quadrature_nodes)?;
    let settings = NewtonSettings {
        tolerance: spec.tolerance,
        max_iterations: spec.max_iterations,
        ..NewtonSettings::default()
    };
    let pooled = optimize(Link::Probit, d, spec)?;
    let opt = re_maximize(d, &groups, &rule, pooled.beta.as_slice(), settings)?;
    let k = d.k;
    let theta: Vec<f64> = opt.beta.iter().copied().collect();
    let bread = spd_inverse(&-&opt.loglik.hessian)?;
    let (_, scores) = evaluate(d, &groups, &theta, &rule, true);
    let cov = clustered_sandwich(&bread, &scores, &group_cluster, d.n)?;

    let null = d.intercept_only();
    let rate = d.positives() as f64 / d.n as f64;
    let null_ll = match re_maximize(&null, &groups, &rule, &[Normal::standard().inverse_cdf(rate)], settings) {
        Ok(o) => o.loglik.value,
        Err(_) => null_loglik(d),
    };

    let mut fit = FitResult::from_parts(
        &spec.name,
        Estimator::Xtprobit,
        spec.alpha,
        d,
        FitParts {
            beta: theta[..k].to_vec(),
            covariance: cov.view((0, 0), (k, k)).into_owned(),
            log_likelihood: opt.loglik.value,
            null_log_likelihood: null_ll,
            parameters: k + 1,
            diagnostics: Diagnostics {
                iterations: opt.iterations,
                gradient_norm: opt.gradient_norm,
                stopping_rule: if opt.gradient_converged {
                    "gradient".into()
                } else {
                    "precision-floor".into()
                },
            },
        },
    )?;
    let sigma = theta[k];
    fit.variance_component = Some(VarianceComponent {
        sigma_u: sigma,
        sigma_u_se: Some(cov[(k, k)].max(0.0).sqrt()),
        sigma_u_squared: sigma * sigma,
        rho: sigma * sigma / (1.0 + sigma * sigma),
    });
    fit.notes.push(format!(
        "{}-node Gauss–Hermite quadrature over {} groups",
        spec.quadrature_nodes,
        groups.len()
    ));
    Ok(fit)
}
