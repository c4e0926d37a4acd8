use nalgebra::{DMatrix, DVector};

use super::LogLik;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Gradient ∞-norm at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tolerance: 1e-8,
            max_iterations: 100,
            max_halvings: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Optimum {
    pub beta: DVector<f64>,
    pub loglik: LogLik,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// False when iteration stopped at the floating-point floor of the
    /// objective rather than on the gradient test.
    pub gradient_converged: bool,
}

pub(crate) fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `(−H) δ = g`, regularizing `−H` when it is not positive definite.
fn newton_direction(ll: &LogLik) -> Result<DVector<f64>> {
    let info = -&ll.hessian;
    if let Some(ch) = info.clone().cholesky() {
        return Ok(ch.solve(&ll.gradient));
    }
    let scale = info.diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
    let k = info.nrows();
    let mut mu = 1e-8 * scale;
    for _ in 0..40 {
        let reg = &info + DMatrix::<f64>::identity(k, k) * mu;
        if let Some(ch) = reg.cholesky() {
            return Ok(ch.solve(&ll.gradient));
        }
        mu *= 10.0;
    }
    Err(Error::Numerical("information matrix could not be regularized".into()))
}

/// Newton–Raphson ascent with step halving. `watch` sees every accepted
/// iterate with the previous and new log-likelihood and may abort.
pub(crate) fn maximize<F, W>(beta0: DVector<f64>, eval: F, settings: NewtonSettings, mut watch: W) -> Result<Optimum>
where
    F: Fn(&DVector<f64>) -> Result<LogLik>,
    W: FnMut(&DVector<f64>, f64, f64) -> Result<()>,
{
    let mut beta = beta0;
    let mut cur = eval(&beta)?;
    if !cur.value.is_finite() {
        return Err(Error::Numerical("log-likelihood not finite at starting values".into()));
    }
    let mut iterations = 0;
    let mut stalled = false;
    while iterations < settings.max_iterations {
        if inf_norm(&cur.gradient) < settings.tolerance {
            break;
        }
        let step = newton_direction(&cur)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let cand = &beta + &step * t;
            let c = eval(&cand)?;
            if c.value.is_finite() && c.value > cur.value {
                accepted = Some((cand, c));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((b, c)) => {
                watch(&b, cur.value, c.value)?;
                beta = b;
                cur = c;
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    let gradient_norm = inf_norm(&cur.gradient);
    if gradient_norm < settings.tolerance {
        return Ok(Optimum {
            beta,
            loglik: cur,
            iterations,
            gradient_norm,
            gradient_converged: true,
        });
    }
    // No ascent direction improves lnL in floating point: accept when the
    // predicted gain is below the rounding level of lnL itself.
    let decrement = newton_direction(&cur)?.dot(&cur.gradient);
    if stalled && decrement <= 1e-10 * cur.value.abs().max(1.0) {
        return Ok(Optimum {
            beta,
            loglik: cur,
            iterations,
            gradient_norm,
            gradient_converged: false,
        });
    }
    Err(Error::NonConvergence {
        iterations,
        gradient_norm,
    })
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub(crate) fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ch = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("information matrix is singular or indefinite".into()))?;
    let inv = ch.inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}
