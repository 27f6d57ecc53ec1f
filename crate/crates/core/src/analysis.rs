//! The piecewise weight g, the double integral I(X) over the region
//! {1/log X <= x, y <= 10, y - x >= 1/log X}, and the Abel-summation bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub const DEFAULT_EXP_X_CAP: f64 = 1e12;
pub const DEFAULT_REL_TOL: f64 = 1e-6;
const MAX_SEGMENTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GParams {
    pub log_x: f64,
    /// Stand-in for the branch point e^X.
    pub exp_x_cap: f64,
}

impl GParams {
    pub fn new(log_x: f64, exp_x_cap: f64) -> Result<Self> {
        if !(log_x > 0.0) {
            return Err(Error::validation(format!("log X must be > 0, got {log_x}")));
        }
        if !(1.0 / log_x < 10.0 && 10.0 < exp_x_cap) {
            return Err(Error::validation(format!(
                "branch points out of order: 1/logX = {}, cap = {exp_x_cap}",
                1.0 / log_x
            )));
        }
        Ok(GParams { log_x, exp_x_cap })
    }

    pub fn with_log_x(log_x: f64) -> Result<Self> {
        GParams::new(log_x, DEFAULT_EXP_X_CAP)
    }
}

/// log X near 0 and beyond the cap, 1/x in between up to 10, log log x
/// from 10 on (that branch wins at x = 10).
pub fn g(x: f64, params: &GParams) -> f64 {
    if x <= 1.0 / params.log_x || x >= params.exp_x_cap {
        params.log_x
    } else if x < 10.0 {
        1.0 / x
    } else {
        x.ln().ln()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralReport {
    #[serde(rename = "logX")]
    pub log_x: f64,
    #[serde(rename = "I")]
    pub value: f64,
    #[serde(rename = "I_over_sqrtlog")]
    pub over_sqrt_log: f64,
    pub error_estimate: f64,
}

/// I(X) to relative tolerance `rel_tol`.
pub fn integral_i(log_x: f64, rel_tol: f64) -> Result<IntegralReport> {
    if !(log_x >= 2.0) {
        return Err(Error::validation(format!("log X must be >= 2, got {log_x}")));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::validation("tolerance must lie in (0, 1)"));
    }
    let (value, error_estimate) = integral_over_box(log_x, 10.0, rel_tol)?;
    Ok(IntegralReport {
        log_x,
        value,
        over_sqrt_log: value / log_x.sqrt(),
        error_estimate,
    })
}

/// The integral with the box [eps, upper]^2, eps = 1/log X. After y = x + u
/// and x = e^s, u = e^v the integrand is bounded:
/// x^{1/4} u^{1/2} (x + u)^{-3/4} (2x + u)^{-1/2} over
/// s in [ln eps, ln(upper - eps)], v in [ln eps, ln(upper - x)].
pub(crate) fn integral_over_box(log_x: f64, upper: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let eps = 1.0 / log_x;
    if upper - eps <= eps {
        return Ok((0.0, 0.0));
    }
    let inner_tol = rel_tol / 10.0;
    let mut failure = None;
    let outer = integrate(
        |s| {
            let x = s.exp();
            let v_hi = (upper - x).ln();
            match integrate(
                |v| {
                    let u = v.exp();
                    x.powf(0.25) * u.sqrt() * (x + u).powf(-0.75) / (2.0 * x + u).sqrt()
                },
                eps.ln(),
                v_hi,
                0.0,
                inner_tol,
                MAX_SEGMENTS,
            ) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        eps.ln(),
        (upper - eps).ln(),
        0.0,
        rel_tol,
        MAX_SEGMENTS,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = outer?;
    Ok((r.value, r.error + inner_tol * r.value.abs()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AbelCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// |sum a_n b_n| against (max|b_n| + sum |b_n - b_{n+1}|) * max_n |a_1 + ... + a_n|.
pub fn abel_bound_check(a: &[f64], b: &[f64]) -> Result<AbelCheck> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::validation("sequences must be nonempty"));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let m = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let v: f64 = b.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
    let mut partial = 0.0f64;
    let mut max_partial = 0.0f64;
    for x in a {
        partial += x;
        max_partial = max_partial.max(partial.abs());
    }
    let lhs = dot.abs();
    let rhs = (m + v) * max_partial;
    let scale: f64 = a.iter().zip(b).map(|(x, y)| (x * y).abs()).sum::<f64>() + rhs;
    let slack = 4.0 * a.len() as f64 * f64::EPSILON * scale;
    Ok(AbelCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_branches() {
        let p = GParams::with_log_x(100.0).unwrap();
        assert_eq!(g(0.5, &p), 2.0);
        assert_eq!(g(1e-9, &p), 100.0);
        assert_eq!(g(20.0, &p), 20f64.ln().ln());
        assert_eq!(g(10.0, &p), 10f64.ln().ln());
        assert_eq!(g(0.01, &p), 100.0);
        assert_eq!(g(2e12, &p), 100.0);
        assert!(GParams::new(0.05, 1e12).is_err());
        assert!(GParams::new(100.0, 5.0).is_err());
        assert!(GParams::new(-1.0, 1e12).is_err());
    }

    #[test]
    fn g_nonincreasing_below_ten() {
        let p = GParams::with_log_x(1000.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=10_000 {
            let x = 1e-3 + (10.0 - 1e-3 - 1e-9) * i as f64 / 10_000.0;
            let v = g(x, &p);
            assert!(v <= prev);
            prev = v;
        }
        let jump = (g(10.0 - 1e-12, &p) - g(10.0, &p)).abs();
        assert!(jump <= (0.1 - 10f64.ln().ln()).abs() + 1e-9);
    }

    #[test]
    fn integral_positive_and_consistent() {
        let r = integral_i(10.0, 1e-6).unwrap();
        assert!(r.value > 0.0 && r.value.is_finite());
        let fine = integral_i(10.0, 5e-7).unwrap();
        assert!((r.value - fine.value).abs() < 1e-6 * r.value);
        assert!(integral_i(1.5, 1e-6).is_err());
    }

    #[test]
    fn integral_matches_direct_cartesian_oracle() {
        // midpoint rule in the original (x, y) variables, well away from the
        // singular corner: log X = 2 keeps the region [0.5, 10]^2 tame
        let (got, _) = integral_over_box(2.0, 10.0, 1e-9).unwrap();
        let eps = 0.5;
        let n = 4000;
        let h = (10.0 - eps) / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let x = eps + (i as f64 + 0.5) * h;
            // inner integral in u = y - x over [eps, 10 - x] by substitution u = w^2
            let top = 10.0 - x;
            if top <= eps {
                continue;
            }
            let m = 400;
            let (w0, w1) = (eps.sqrt(), top.sqrt());
            let hw = (w1 - w0) / m as f64;
            for j in 0..m {
                let w = w0 + (j as f64 + 0.5) * hw;
                let u = w * w;
                let y = x + u;
                sum += (x * y).powf(-0.75) / (x + y).sqrt() * 2.0 * hw * h;
            }
        }
        assert!((got - sum).abs() < 1e-4 * got, "{got} vs {sum}");
    }

    #[test]
    fn empty_region_is_zero() {
        assert_eq!(integral_over_box(0.05, 10.0, 1e-6).unwrap().0, 0.0);
        assert_eq!(integral_over_box(10.0, 0.15, 1e-6).unwrap().0, 0.0);
    }

    #[test]
    fn abel_examples() {
        let a: Vec<f64> = (1..=10).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b: Vec<f64> = (1..=10).map(|n| 1.0 / n as f64).collect();
        assert!(abel_bound_check(&a, &b).unwrap().holds);
        let c = abel_bound_check(&a, &[0.7; 10]).unwrap();
        assert!(c.holds);
        assert!((c.rhs - 0.7).abs() < 1e-15);
        let z = abel_bound_check(&[0.0; 5], &[1.0, -2.0, 3.0, 0.5, 0.0]).unwrap();
        assert_eq!(z.lhs, 0.0);
        assert!(z.holds);
        assert!(abel_bound_check(&[1.0], &[]).is_err());
    }
}
