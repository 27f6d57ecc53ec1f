//! Character sums S(Y) = sum_{n <= Y} chi_d(n) and their smoothed variants.

use crate::arith::{character_table, kronecker, Discriminant, SmallestPrimeFactor};
use crate::numeric::CompensatedSum;

/// Reference smooth weight supported on (1, 2):
/// W(x) = exp(1 - 1/(1 - (2x-3)^2)), peak W(3/2) = 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BumpWeight;

impl BumpWeight {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 || x >= 2.0 {
            return 0.0;
        }
        let z = 2.0 * x - 3.0;
        let denom = 1.0 - z * z;
        if denom <= 0.0 {
            return 0.0;
        }
        (1.0 - 1.0 / denom).exp()
    }
}

/// Exact S_{chi_d}(Y); empty (zero) for Y < 1.
pub fn char_sum(d: &Discriminant, y: f64) -> i64 {
    if !(y >= 1.0) {
        return 0;
    }
    let top = y.floor() as u64;
    let dv = d.value() as i64;
    (1..=top).map(|n| kronecker(dv, n) as i64).sum()
}

/// Prefix sums `[S(1), S(2), ..., S(y_max)]` in a single pass.
pub fn char_sum_profile(d: &Discriminant, y_max: usize) -> Vec<i64> {
    let dv = d.value() as i64;
    let mut acc = 0i64;
    (1..=y_max as u64)
        .map(|n| {
            acc += kronecker(dv, n) as i64;
            acc
        })
        .collect()
}

/// S_{chi_d}(y) using a shared smallest-prime-factor table covering `y`.
pub fn char_sum_with_table(d: u64, y: usize, spf: &SmallestPrimeFactor) -> i64 {
    if y == 0 {
        return 0;
    }
    character_table(d as i64, y, spf)[1..]
        .iter()
        .map(|&c| c as i64)
        .sum()
}

/// sum_{n >= 1} chi_d(n) W(n/Y) with the reference bump weight.
pub fn smoothed_sum(d: &Discriminant, y: f64) -> f64 {
    smoothed_sum_detailed(d, y, |x| BumpWeight.eval(x)).value()
}

/// Smoothed sum with an arbitrary weight supported in (1, 2), returning the
/// compensated accumulator so callers can read its rounding bound.
pub fn smoothed_sum_detailed(d: &Discriminant, y: f64, weight: impl Fn(f64) -> f64) -> CompensatedSum {
    let mut acc = CompensatedSum::new();
    if !(y > 0.0) {
        return acc;
    }
    let lo = y.floor() as u64 + 1;
    let hi = (2.0 * y).ceil() as u64; // exclusive
    let dv = d.value() as i64;
    for n in lo..hi {
        let x = n as f64 / y;
        let w = weight(x);
        if w != 0.0 {
            acc.add(kronecker(dv, n) as f64 * w);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::enumerate_fundamental;

    fn disc(d: u64) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    #[test]
    fn bump_weight_shape() {
        let w = BumpWeight;
        assert_eq!(w.eval(1.5), 1.0);
        assert_eq!(w.eval(1.0), 0.0);
        assert_eq!(w.eval(2.0), 0.0);
        assert_eq!(w.eval(0.3), 0.0);
        assert_eq!(w.eval(7.0), 0.0);
        for i in 1..1000 {
            let x = 1.0 + i as f64 / 1000.0;
            let v = w.eval(x);
            assert!((0.0..=1.0).contains(&v));
            assert!(v > 0.0 || (x - 1.0).abs() < 0.02 || (x - 2.0).abs() < 0.02);
        }
        // symmetric about 3/2
        assert!((w.eval(1.2) - w.eval(1.8)).abs() < 1e-15);
    }

    #[test]
    fn char_sum_examples() {
        // residues mod 5: chi_5 = (1, -1, -1, 1, 0)
        assert_eq!(char_sum(&disc(5), 4.0), 0);
        assert_eq!(char_sum(&disc(5), 0.5), 0);
        assert_eq!(char_sum(&disc(5), 1.0), 1);
        assert_eq!(char_sum(&disc(5), 2.9), 0);
    }

    #[test]
    fn profile_examples() {
        assert_eq!(char_sum_profile(&disc(5), 5), vec![1, 0, -1, 0, 0]);
        for d in [8u64, 12, 13, 21, 97] {
            let dd = disc(d);
            let p = char_sum_profile(&dd, d as usize);
            assert_eq!(*p.last().unwrap(), 0, "full period d={d}");
            for y in 2..=d as usize {
                assert_eq!(p[y - 1], p[y - 2] + kronecker(d as i64, y as u64) as i64);
                assert_eq!(p[y - 1], char_sum(&dd, y as f64));
            }
        }
    }

    #[test]
    fn table_path_matches_direct() {
        let spf = SmallestPrimeFactor::new(500);
        for d in enumerate_fundamental(300, 64).unwrap() {
            for y in [1usize, 10, 31, 500] {
                assert_eq!(char_sum_with_table(d.value(), y, &spf), char_sum(&d, y as f64));
            }
        }
    }

    #[test]
    fn smoothed_examples() {
        assert_eq!(smoothed_sum(&disc(5), 0.4), 0.0);
        // only n = 3 lies in (2, 4) with nonzero weight W(3/2) = 1, chi_5(3) = -1
        assert_eq!(smoothed_sum(&disc(5), 2.0), -1.0);
        assert_eq!(smoothed_sum_detailed(&disc(5), 50.0, |_| 0.0).value(), 0.0);
    }

    #[test]
    fn smoothed_bounded_by_support_count() {
        for d in enumerate_fundamental(200, 64).unwrap() {
            for y in [1.0, 2.5, 10.0, 33.3, 100.0] {
                let s = smoothed_sum(&d, y);
                let support = ((2.0 * y).ceil() as u64).saturating_sub(y.floor() as u64 + 1);
                assert!(s.abs() <= support as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn polya_vinogradov_and_periodicity() {
        for d in enumerate_fundamental(10_000, 4096).unwrap() {
            if d.value() < 5 {
                continue;
            }
            let dv = d.value() as usize;
            let profile = char_sum_profile(&d, 2 * dv);
            let bound = (dv as f64).sqrt() * (dv as f64).ln();
            for y in 1..=dv {
                assert!(
                    (profile[y - 1] as f64).abs() <= bound,
                    "Polya-Vinogradov envelope violated at d={dv} y={y}"
                );
                assert_eq!(profile[y - 1 + dv], profile[y - 1]);
            }
        }
    }
}
