//! Standard normal helpers that stay finite in the tails.

use statrs::function::erf::erfc;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument Φ is evaluated through the Mills ratio.
const TAIL: f64 = -8.0;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate for large x.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Mills ratio (1 − Φ(t)) / φ(t) for t ≥ 8 by continued fraction.
fn mills_ratio_tail(t: f64) -> f64 {
    debug_assert!(t >= -TAIL);
    let mut f = t;
    for k in (1..=60).rev() {
        f = t + k as f64 / f;
    }
    1.0 / f
}

/// ln Φ(x), never the log of an underflowed zero.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x < TAIL {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio_tail(-x).ln()
    } else if x > 5.0 {
        (-norm_sf(x)).ln_1p()
    } else {
        norm_cdf(x).ln()
    }
}

/// φ(x) / Φ(x).
pub fn inverse_mills(x: f64) -> f64 {
    if x < TAIL {
        1.0 / mills_ratio_tail(-x)
    } else {
        norm_pdf(x) / norm_cdf(x)
    }
}

/// Two-sided normal p-value for a z statistic.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cdf_matches_direct_evaluation_where_safe() {
        for i in -300..=300 {
            let x = i as f64 / 40.0;
            let direct = norm_cdf(x).ln();
            assert!((log_norm_cdf(x) - direct).abs() < 1e-12 * direct.abs().max(1e-3), "x = {x}");
        }
    }

    #[test]
    fn log_cdf_is_continuous_at_the_switch() {
        let a = log_norm_cdf(TAIL - 1e-12);
        let b = log_norm_cdf(TAIL + 1e-12);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn deep_tail_is_finite_and_asymptotic() {
        for x in [-40.0, -100.0, -1e3, -1e5] {
            let v = log_norm_cdf(x);
            assert!(v.is_finite());
            let asym = -0.5 * x * x - LN_SQRT_2PI - (-x as f64).ln();
            assert!((v - asym).abs() < 1.5 / (x * x) + 4.0 * f64::EPSILON * asym.abs());
            let l = inverse_mills(x);
            assert!((l / -x - 1.0).abs() < 2.0 / (x * x));
        }
        assert_eq!(log_norm_cdf(40.0), 0.0);
    }

    #[test]
    fn p_values() {
        assert_eq!(two_sided_p(0.0), 1.0);
        assert!((two_sided_p(1.959_963_984_540_054) - 0.05).abs() < 1e-10);
        assert!(two_sided_p(50.0) < 1e-300 || two_sided_p(50.0) == 0.0);
    }
}
