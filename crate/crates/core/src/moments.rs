//! Moments of character sums over the fundamental discriminants d <= X:
//! sum_d S_d(Y)^k and sum_d |S_d(Y)|^k, exact, plus smoothed variants.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{FundamentalSieve, SmallestPrimeFactor, DEFAULT_SEGMENT_SIZE};
use crate::charsum::{char_sum, char_sum_with_table, smoothed_sum_detailed, BumpWeight};
use crate::constants::{predicted_constant, PredictConfig};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

pub const DEFAULT_BUDGET: u128 = 1 << 40;
pub const MAX_K: u32 = 12;

/// Y at or above which character sums use a shared smallest-prime-factor
/// table instead of evaluating every symbol.
const TABLE_THRESHOLD: u64 = 256;

#[derive(Debug, Clone)]
pub struct MomentConfig {
    /// Ceiling on X * Y, the number of character evaluations.
    pub budget: u128,
    pub segment_size: u64,
    /// Settings for the predicted constant; `None` skips it (reported as NaN).
    pub predict: Option<PredictConfig>,
}

impl Default for MomentConfig {
    fn default() -> Self {
        MomentConfig {
            budget: DEFAULT_BUDGET,
            segment_size: DEFAULT_SEGMENT_SIZE,
            predict: Some(PredictConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRecord {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "Y")]
    pub y: u64,
    pub k: u32,
    #[serde(serialize_with = "crate::report::big_as_string")]
    pub signed_sum: BigInt,
    #[serde(serialize_with = "crate::report::big_as_string")]
    pub abs_sum: BigInt,
    /// abs_sum / (X Y^{k/2} (ln Y)^{k(k-1)/2}); absent when ln Y = 0 and the
    /// log exponent is positive.
    pub normalized_ratio: Option<f64>,
    pub predicted: f64,
    pub runtime_seconds: f64,
}

/// Exact running sum that stays in i128 until it would overflow.
#[derive(Debug, Clone, Default)]
struct ExactAccumulator {
    small: i128,
    big: BigInt,
}

impl ExactAccumulator {
    fn add_power(&mut self, base: i64, k: u32) {
        match (base as i128).checked_pow(k) {
            Some(v) => match self.small.checked_add(v) {
                Some(s) => self.small = s,
                None => {
                    self.big += self.small;
                    self.small = v;
                }
            },
            None => self.big += BigInt::from(base).pow(k),
        }
    }

    fn merge(&mut self, other: ExactAccumulator) {
        self.big += other.big;
        self.big += other.small;
    }

    fn total(self) -> BigInt {
        self.big + self.small
    }
}

fn check_moment_args(x: u64, y: u64, k: u32, budget: u128) -> Result<()> {
    if x < 5 {
        return Err(Error::validation(format!("X must be >= 5, got {x}")));
    }
    if y < 1 {
        return Err(Error::validation("Y must be >= 1"));
    }
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::validation(format!("k must be in 1..={MAX_K}, got {k}")));
    }
    let cost = x as u128 * y as u128;
    if cost > budget {
        return Err(Error::Budget {
            estimated: cost,
            budget,
        });
    }
    Ok(())
}

/// Exact character sums S_d(Y) for every fundamental d <= X, per segment.
fn map_char_sums<T, F>(sieve: &FundamentalSieve, y: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut dyn Iterator<Item = i64>) -> T + Sync + Send,
{
    if y >= TABLE_THRESHOLD {
        let spf = SmallestPrimeFactor::new(y as usize);
        sieve.map_segments(|seg| f(&mut seg.iter().map(|&d| char_sum_with_table(d, y as usize, &spf))))
    } else {
        sieve.map_segments(|seg| {
            f(&mut seg
                .iter()
                .map(|&d| char_sum(&crate::arith::Discriminant::from_sieve(d), y as f64)))
        })
    }
}

pub fn normalized_ratio(abs_sum: &BigInt, x: u64, y: u64, k: u32) -> Option<f64> {
    let log_exp = (k * (k - 1) / 2) as i32;
    let ln_y = (y as f64).ln();
    if ln_y == 0.0 && log_exp > 0 {
        return None;
    }
    let denom = x as f64 * (y as f64).powf(k as f64 / 2.0) * ln_y.powi(log_exp);
    Some(abs_sum.to_f64()? / denom)
}

/// Signed and absolute k-th moments of S_d(Y) over fundamental d <= X.
pub fn moment(x: u64, y: u64, k: u32, config: &MomentConfig) -> Result<MomentRecord> {
    let predicted = match &config.predict {
        Some(p) => predicted_constant(k, p)?.predicted,
        None => f64::NAN,
    };
    moment_with_prediction(x, y, k, config, predicted)
}

fn moment_with_prediction(x: u64, y: u64, k: u32, config: &MomentConfig, predicted: f64) -> Result<MomentRecord> {
    check_moment_args(x, y, k, config.budget)?;
    let start = Instant::now();
    let sieve = FundamentalSieve::new(x, config.segment_size)?;
    let parts = map_char_sums(&sieve, y, |sums| {
        let mut signed = ExactAccumulator::default();
        let mut abs = ExactAccumulator::default();
        for s in sums {
            signed.add_power(s, k);
            abs.add_power(s.abs(), k);
        }
        (signed, abs)
    });
    let mut signed = ExactAccumulator::default();
    let mut abs = ExactAccumulator::default();
    for (s, a) in parts {
        signed.merge(s);
        abs.merge(a);
    }
    let signed_sum = signed.total();
    let abs_sum = abs.total();
    Ok(MomentRecord {
        x,
        y,
        k,
        normalized_ratio: normalized_ratio(&abs_sum, x, y, k),
        signed_sum,
        abs_sum,
        predicted,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One record per (X, Y) pair; the predicted constant is computed once.
pub fn ratio_scan(k: u32, pairs: &[(u64, u64)], config: &MomentConfig) -> Result<Vec<MomentRecord>> {
    for &(x, y) in pairs {
        check_moment_args(x, y, k, config.budget)?;
    }
    let predicted = match &config.predict {
        Some(p) => predicted_constant(k, p)?.predicted,
        None => f64::NAN,
    };
    pairs
        .iter()
        .map(|&(x, y)| moment_with_prediction(x, y, k, config, predicted))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothedMoment {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "Y")]
    pub y: u64,
    pub k: u32,
    pub value: f64,
    /// Bound on the accumulated floating-point error of `value`.
    pub error_bound: f64,
    pub runtime_seconds: f64,
}

/// sum_d |sum_n chi_d(n) W(n/Y)|^k with the reference bump weight.
pub fn moment_smoothed(x: u64, y: u64, k: u32, config: &MomentConfig) -> Result<SmoothedMoment> {
    check_moment_args(x, y, k, config.budget)?;
    let start = Instant::now();
    let sieve = FundamentalSieve::new(x, config.segment_size)?;
    let kf = k as f64;
    let eps = f64::EPSILON;
    let parts = sieve.map_segments(|seg| {
        let mut acc = CompensatedSum::new();
        let mut err = 0.0;
        for &d in seg {
            let inner = smoothed_sum_detailed(&crate::arith::Discriminant::from_sieve(d), y as f64, |t| {
                BumpWeight.eval(t)
            });
            let s = inner.value().abs();
            // the weight itself is accurate to a few ulps per term
            let e = inner.rounding_bound() + 4.0 * eps * inner.abs_sum();
            let term = s.powi(k as i32);
            acc.add(term);
            err += kf * (s + e).powi(k as i32 - 1) * e + kf * eps * term;
        }
        (acc, err)
    });
    let mut total = CompensatedSum::new();
    let mut err = 0.0;
    for (p, e) in &parts {
        total.merge(p);
        err += e;
    }
    Ok(SmoothedMoment {
        x,
        y,
        k,
        value: total.value(),
        error_bound: err + total.rounding_bound(),
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Empirical density of fundamental discriminants: #{d <= X} / X.
pub fn discriminant_density(x: u64) -> Result<f64> {
    let sieve = FundamentalSieve::new(x, DEFAULT_SEGMENT_SIZE)?;
    let count: usize = sieve.map_segments(|s| s.len()).into_iter().sum();
    Ok(count as f64 / x as f64)
}

impl MomentRecord {
    /// True when abs_sum >= |signed_sum|, equality for even k.
    pub fn is_consistent(&self) -> bool {
        let abs_signed = if self.signed_sum < BigInt::zero() {
            -self.signed_sum.clone()
        } else {
            self.signed_sum.clone()
        };
        self.abs_sum >= abs_signed && (self.k % 2 == 1 || self.abs_sum == self.signed_sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{enumerate_fundamental, kronecker};

    fn quick() -> MomentConfig {
        MomentConfig {
            predict: None,
            ..Default::default()
        }
    }

    #[test]
    fn y_one_counts_discriminants() {
        for k in 1..=12 {
            let r = moment(12, 1, k, &quick()).unwrap();
            assert_eq!(r.signed_sum, BigInt::from(3));
            assert_eq!(r.abs_sum, BigInt::from(3));
        }
        assert_eq!(moment(12, 1, 2, &quick()).unwrap().normalized_ratio, None);
        assert!(moment(12, 1, 1, &quick()).unwrap().normalized_ratio.is_some());
    }

    #[test]
    fn double_loop_oracle() {
        let expected: i64 = enumerate_fundamental(100, 64)
            .unwrap()
            .iter()
            .map(|d| (1 + kronecker(d.value() as i64, 2) as i64).pow(2))
            .sum();
        let r = moment(100, 2, 2, &quick()).unwrap();
        assert_eq!(r.signed_sum, BigInt::from(expected));
    }

    #[test]
    fn table_path_agrees_with_direct() {
        let y = TABLE_THRESHOLD + 17;
        let r = moment(3000, y, 3, &quick()).unwrap();
        let direct: i128 = enumerate_fundamental(3000, 64)
            .unwrap()
            .iter()
            .map(|d| (char_sum(d, y as f64) as i128).pow(3))
            .sum();
        assert_eq!(r.signed_sum, BigInt::from(direct));
        assert!(r.is_consistent());
    }

    #[test]
    fn accumulator_spills_to_bigint() {
        let mut acc = ExactAccumulator::default();
        let mut expect = BigInt::zero();
        for _ in 0..1000 {
            acc.add_power(1_000_000_000, 4);
            expect += BigInt::from(1_000_000_000i64).pow(4);
        }
        acc.add_power(-3_000_000_000_000, 12);
        expect += BigInt::from(-3_000_000_000_000i64).pow(12);
        assert_eq!(acc.total(), expect);
    }

    #[test]
    fn budget_and_preconditions() {
        let tight = MomentConfig {
            budget: 1000,
            ..quick()
        };
        assert!(matches!(moment(1000, 10, 2, &tight), Err(Error::Budget { estimated: 10_000, .. })));
        assert!(moment(4, 1, 2, &quick()).is_err());
        assert!(moment(10, 0, 2, &quick()).is_err());
        assert!(moment(10, 1, 13, &quick()).is_err());
    }

    #[test]
    fn smoothed_examples() {
        // no integer in (Y, 2Y) with nonzero weight when Y = 1: n would have to lie in (1, 2)
        let r = moment_smoothed(1000, 1, 2, &quick()).unwrap();
        assert_eq!(r.value, 0.0);
        let a = moment_smoothed(10_000, 50, 2, &quick()).unwrap();
        let b = moment_smoothed(20_000, 50, 2, &quick()).unwrap();
        assert!(b.value >= a.value);
    }

    #[test]
    fn density_is_about_three_over_pi_squared() {
        let kappa = discriminant_density(1_000_000).unwrap();
        assert!((kappa - 3.0 / std::f64::consts::PI.powi(2)).abs() < 0.01);
    }
}
