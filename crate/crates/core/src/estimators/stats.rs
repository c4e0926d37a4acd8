use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::normal::two_sided_p;
use super::FitResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    pub pseudo_r2: f64,
    pub aic: f64,
    pub bic: f64,
}

/// McFadden pseudo-R² = 1 − lnL/lnL₀, AIC = 2k − 2lnL, BIC = k·ln n − 2lnL.
pub fn fit_stats(lnl: f64, lnl0: f64, k: usize, n: usize) -> Result<FitStats> {
    if lnl0 == 0.0 {
        return Err(Error::invalid("null log-likelihood is zero; pseudo-R² undefined"));
    }
    if k == 0 || n == 0 {
        return Err(Error::invalid("fit statistics need k ≥ 1 and n ≥ 1"));
    }
    let k = k as f64;
    Ok(FitStats {
        pseudo_r2: 1.0 - lnl / lnl0,
        aic: 2.0 * k - 2.0 * lnl,
        bic: k * (n as f64).ln() - 2.0 * lnl,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityRow {
    pub name: String,
    pub difference: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityTest {
    pub rows: Vec<EqualityRow>,
    pub wald: f64,
    pub df: usize,
    pub wald_p_value: f64,
}

/// Per shared coefficient, z = (β_A − β_B)/√(SE_A² + SE_B²) treating the fits
/// as independent samples; the joint Wald statistic uses V_A + V_B over the
/// shared block. The intercept is compared like any other coefficient.
pub fn coefficient_equality_test(a: &FitResult, b: &FitResult) -> Result<EqualityTest> {
    let shared: Vec<(usize, usize)> = a
        .coefficients
        .iter()
        .enumerate()
        .filter_map(|(i, c)| b.coefficients.iter().position(|d| d.name == c.name).map(|j| (i, j)))
        .collect();
    if shared.is_empty() {
        return Err(Error::invalid(format!("fits '{}' and '{}' share no coefficients", a.name, b.name)));
    }
    let rows = shared
        .iter()
        .map(|&(i, j)| {
            let (ca, cb) = (&a.coefficients[i], &b.coefficients[j]);
            let difference = ca.estimate - cb.estimate;
            let se = (ca.std_error.powi(2) + cb.std_error.powi(2)).sqrt();
            let z = if difference == 0.0 { 0.0 } else { difference / se };
            EqualityRow {
                name: ca.name.clone(),
                difference,
                z,
                p_value: two_sided_p(z),
            }
        })
        .collect::<Vec<_>>();
    let m = shared.len();
    let d = DVector::from_iterator(m, rows.iter().map(|r| r.difference));
    let v = DMatrix::from_fn(m, m, |r, c| {
        let (ia, ib) = shared[r];
        let (ja, jb) = shared[c];
        a.covariance[ia][ja] + b.covariance[ib][jb]
    });
    let wald = if d.iter().all(|x| *x == 0.0) {
        0.0
    } else {
        let ch = v
            .cholesky()
            .ok_or_else(|| Error::Numerical("combined covariance of shared coefficients is singular".into()))?;
        d.dot(&ch.solve(&d))
    };
    let chi = ChiSquared::new(m as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(EqualityTest {
        rows,
        wald,
        df: m,
        wald_p_value: chi.sf(wald),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let s = fit_stats(-100.0, -100.0, 2, 1000).unwrap();
        assert_eq!(s.pseudo_r2, 0.0);
        assert!((s.aic - 204.0).abs() < 1e-12);
        assert!((s.bic - (2.0 * 1000f64.ln() + 200.0)).abs() < 1e-12);
        assert!((s.bic - 213.8155).abs() < 1e-4);
        assert!(fit_stats(-1.0, 0.0, 1, 1).is_err());
        for n in 8..200 {
            let s = fit_stats(-50.0, -60.0, 3, n).unwrap();
            assert!(s.aic < s.bic);
        }
    }
}
