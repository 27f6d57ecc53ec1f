//! Theta functions theta(t, chi_d) = sum_{n >= 1} chi_d(n) exp(-pi n^2 t / d)
//! with a certified truncation, their moments over d <= X, and the
//! non-vanishing census at t = 1.

use std::f64::consts::PI;

use serde::Serialize;

use crate::arith::{character_table, kronecker, Discriminant, FundamentalSieve, SmallestPrimeFactor, DEFAULT_SEGMENT_SIZE};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

pub const T_MIN: f64 = 1e-3;
pub const T_MAX: f64 = 1e3;
/// Relative tail target: the omitted tail is below TAIL_TARGET * max(1, sqrt(d/t)).
pub const TAIL_TARGET: f64 = 1e-15;
pub const MAX_MOMENT_K: u32 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSample {
    pub d: u64,
    pub t: f64,
    /// Number of terms summed.
    pub truncation: u64,
    pub value: f64,
    /// Certified bound on sum_{n > N} exp(-pi n^2 t / d).
    pub tail_bound: f64,
}

/// Geometric majorant exp(-a N^2) / (1 - exp(-a (2N + 1))) for the tail
/// beyond N, with a = pi t / d.
pub fn tail_majorant(d: u64, t: f64, n: u64) -> f64 {
    let a = PI * t / d as f64;
    let nf = n as f64;
    (-a * nf * nf).exp() / -(-a * (2.0 * nf + 1.0)).exp_m1()
}

fn tail_tolerance(d: u64, t: f64) -> f64 {
    TAIL_TARGET * (d as f64 / t).sqrt().max(1.0)
}

/// Smallest truncation with a certified tail below the target.
pub fn truncation_for(d: u64, t: f64) -> u64 {
    let tol = tail_tolerance(d, t);
    let a = PI * t / d as f64;
    // exp(-a N^2) <= tol gives the starting point; the denominator only adds a few terms
    let mut n = ((-tol.ln() / a).sqrt().floor() as u64).max(1);
    while n > 1 && tail_majorant(d, t, n - 1) <= tol {
        n -= 1;
    }
    while tail_majorant(d, t, n) > tol {
        n += 1;
    }
    n
}

fn check_t(t: f64) -> Result<()> {
    if !(T_MIN..=T_MAX).contains(&t) {
        return Err(Error::validation(format!("t must lie in [{T_MIN}, {T_MAX}], got {t}")));
    }
    Ok(())
}

fn sum_terms(d: u64, t: f64, n: u64, chi: impl Fn(u64) -> i8) -> f64 {
    let a = PI * t / d as f64;
    let mut acc = CompensatedSum::new();
    for m in 1..=n {
        let c = chi(m);
        if c != 0 {
            let mf = m as f64;
            acc.add(c as f64 * (-a * mf * mf).exp());
        }
    }
    acc.value()
}

pub fn theta(d: &Discriminant, t: f64) -> Result<ThetaSample> {
    check_t(t)?;
    Ok(theta_with_truncation(d, t, truncation_for(d.value(), t)))
}

/// theta summed over exactly `n` terms; the tail bound is reported for that n.
pub fn theta_with_truncation(d: &Discriminant, t: f64, n: u64) -> ThetaSample {
    let dv = d.value();
    ThetaSample {
        d: dv,
        t,
        truncation: n,
        value: sum_terms(dv, t, n, |m| kronecker(dv as i64, m)),
        tail_bound: tail_majorant(dv, t, n),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaMoment {
    #[serde(rename = "X")]
    pub x: u64,
    pub k: u32,
    pub t: f64,
    pub moment: f64,
    /// moment / (X^{1 + k/4} (ln X)^{k(k-1)/2}).
    pub ratio: f64,
    /// Bound on truncation plus rounding error of `moment`.
    pub error_bound: f64,
    pub count: u64,
}

#[derive(Debug, Clone)]
pub struct ThetaConfig {
    pub segment_size: u64,
    /// Ceiling on the total number of theta terms summed.
    pub budget: u128,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            segment_size: DEFAULT_SEGMENT_SIZE,
            budget: crate::moments::DEFAULT_BUDGET,
        }
    }
}

/// Visits theta(t, chi_d) for every fundamental d <= X, segment by segment,
/// with character tables built from one shared smallest-prime-factor table.
fn map_thetas<T, F>(x: u64, t: f64, config: &ThetaConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut dyn Iterator<Item = ThetaSample>) -> T + Sync + Send,
{
    check_t(t)?;
    let sieve = FundamentalSieve::new(x, config.segment_size)?;
    let n_max = truncation_for(x, t);
    let cost = n_max as u128 * x as u128;
    if cost > config.budget {
        return Err(Error::Budget {
            estimated: cost,
            budget: config.budget,
        });
    }
    let spf = SmallestPrimeFactor::new(n_max as usize);
    Ok(sieve.map_segments(|seg| {
        f(&mut seg.iter().map(|&d| {
            let n = truncation_for(d, t);
            let chi = character_table(d as i64, n as usize, &spf);
            ThetaSample {
                d,
                t,
                truncation: n,
                value: sum_terms(d, t, n, |m| chi[m as usize]),
                tail_bound: tail_majorant(d, t, n),
            }
        }))
    }))
}

/// sum over fundamental d <= X of |theta(t, chi_d)|^k.
pub fn theta_moment(x: u64, k: u32, t: f64, config: &ThetaConfig) -> Result<ThetaMoment> {
    if x < 5 {
        return Err(Error::validation(format!("X must be >= 5, got {x}")));
    }
    if !(1..=MAX_MOMENT_K).contains(&k) {
        return Err(Error::validation(format!("k must be in 1..={MAX_MOMENT_K}, got {k}")));
    }
    let kf = k as f64;
    let parts = map_thetas(x, t, config, |samples| {
        let mut acc = CompensatedSum::new();
        let mut err = 0.0;
        let mut count = 0u64;
        for s in samples {
            let v = s.value.abs();
            // truncation plus a generous per-term rounding allowance
            let e = s.tail_bound + 1e-15 * (s.truncation as f64);
            let term = v.powi(k as i32);
            acc.add(term);
            err += kf * (v + e).powi(k as i32 - 1) * e + kf * f64::EPSILON * term;
            count += 1;
        }
        (acc, err, count)
    })?;
    let mut total = CompensatedSum::new();
    let mut err = 0.0;
    let mut count = 0;
    for (p, e, c) in &parts {
        total.merge(p);
        err += e;
        count += c;
    }
    let xf = x as f64;
    let norm = xf.powf(1.0 + kf / 4.0) * xf.ln().powi((k * (k - 1) / 2) as i32);
    Ok(ThetaMoment {
        x,
        k,
        t,
        moment: total.value(),
        ratio: total.value() / norm,
        error_bound: err + total.rounding_bound(),
        count,
    })
}

/// sum_d |theta(1, chi_d)|^2 / (X^{3/2} ln X).
pub fn second_moment_ratio(x: u64, config: &ThetaConfig) -> Result<f64> {
    if x < 100 {
        return Err(Error::validation(format!("X must be >= 100, got {x}")));
    }
    Ok(theta_moment(x, 2, 1.0, config)?.ratio)
}

#[derive(Debug, Clone, Serialize)]
pub struct Census {
    #[serde(rename = "X")]
    pub x: u64,
    pub threshold: f64,
    /// Discriminants with |theta(1, chi_d)| > threshold.
    pub count: u64,
    pub total: u64,
    pub fraction: f64,
    /// Smallest |theta(1, chi_d)| observed.
    pub min_abs: f64,
}

/// Smallest admissible census threshold: ten times the largest tail
/// tolerance used for d <= X at t = 1, so any value above it is certifiably
/// nonzero.
pub fn census_floor(x: u64) -> f64 {
    10.0 * tail_tolerance(x, 1.0)
}

pub fn nonvanishing_census(x: u64, threshold: f64, config: &ThetaConfig) -> Result<Census> {
    let floor = census_floor(x);
    if !(threshold >= floor) {
        return Err(Error::validation(format!(
            "threshold {threshold:e} is below the certifiable floor {floor:e}"
        )));
    }
    let parts = map_thetas(x, 1.0, config, |samples| {
        let mut count = 0u64;
        let mut total = 0u64;
        let mut min_abs = f64::INFINITY;
        for s in samples {
            total += 1;
            let v = s.value.abs();
            min_abs = min_abs.min(v);
            if v > threshold {
                count += 1;
            }
        }
        (count, total, min_abs)
    })?;
    let (count, total, min_abs) = parts
        .into_iter()
        .fold((0, 0, f64::INFINITY), |(c, t, m), (c2, t2, m2)| (c + c2, t + t2, m.min(m2)));
    Ok(Census {
        x,
        threshold,
        count,
        total,
        fraction: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        min_abs,
    })
}
