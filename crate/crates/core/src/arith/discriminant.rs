//! Positive fundamental discriminants and their segmented enumeration.

use rayon::prelude::*;
use serde::Serialize;

use super::sieve::{is_squarefree, primes_up_to, squarefree_flags};
use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiscriminantKind {
    /// d = 1 (mod 4) and squarefree.
    OneModFourSquarefree,
    /// d = 4m with m = 2 or 3 (mod 4) squarefree.
    FourTimesM,
}

/// A positive fundamental discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Discriminant {
    value: u64,
    kind: DiscriminantKind,
}

impl Discriminant {
    /// Validates `d` as a fundamental discriminant (d = 1 rejected).
    pub fn new(d: u64) -> Result<Self> {
        classify(d)
            .filter(|_| d > 1)
            .map(|kind| Discriminant::from_parts(d, kind))
            .ok_or_else(|| Error::validation(format!("{d} is not a fundamental discriminant > 1")))
    }

    /// The trivial discriminant d = 1; only produced when explicitly requested.
    pub fn trivial() -> Self {
        Discriminant::from_parts(1, DiscriminantKind::OneModFourSquarefree)
    }

    fn from_parts(value: u64, kind: DiscriminantKind) -> Self {
        Discriminant { value, kind }
    }

    /// Skips validation; callers guarantee `d` came from the sieve.
    pub(crate) fn from_sieve(d: u64) -> Self {
        let kind = if d.is_multiple_of(4) {
            DiscriminantKind::FourTimesM
        } else {
            DiscriminantKind::OneModFourSquarefree
        };
        Discriminant::from_parts(d, kind)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn kind(&self) -> DiscriminantKind {
        self.kind
    }

    /// chi_d(n).
    pub fn chi(&self, n: u64) -> i8 {
        super::kronecker(self.value as i64, n)
    }
}

/// Kind of `d` if it is a fundamental discriminant, counting d = 1.
pub fn classify(d: u64) -> Option<DiscriminantKind> {
    match d % 4 {
        1 if is_squarefree(d) => Some(DiscriminantKind::OneModFourSquarefree),
        0 => {
            let m = d / 4;
            if (m % 4 == 2 || m % 4 == 3) && is_squarefree(m) {
                Some(DiscriminantKind::FourTimesM)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// True iff `d > 1` is a positive fundamental discriminant.
pub fn is_fundamental(d: u64) -> bool {
    is_fundamental_with(d, false)
}

pub fn is_fundamental_with(d: u64, include_trivial: bool) -> bool {
    (d > 1 || (include_trivial && d == 1)) && classify(d).is_some()
}

/// Segmented squarefree sieve over `1..=max` yielding fundamental discriminants.
///
/// Memory is O(segment + sqrt(max)). Segments are independent, so they can
/// be processed concurrently and concatenated in index order.
#[derive(Debug, Clone)]
pub struct FundamentalSieve {
    max: u64,
    segment_size: u64,
    include_trivial: bool,
    primes: Vec<u64>,
}

impl FundamentalSieve {
    pub fn new(max: u64, segment_size: u64) -> Result<Self> {
        if max < 2 {
            return Err(Error::validation(format!("enumeration bound must be >= 2, got {max}")));
        }
        if segment_size == 0 {
            return Err(Error::validation("segment size must be positive"));
        }
        if max.checked_add(segment_size).is_none() {
            return Err(Error::Overflow(format!(
                "bound {max} plus segment size {segment_size} exceeds 64 bits"
            )));
        }
        let root = max.isqrt();
        if root > u32::MAX as u64 {
            return Err(Error::Overflow(format!("sqrt({max}) exceeds 32 bits")));
        }
        Ok(FundamentalSieve {
            max,
            segment_size,
            include_trivial: false,
            primes: primes_up_to(root),
        })
    }

    pub fn with_trivial(mut self, include: bool) -> Self {
        self.include_trivial = include;
        self
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn segment_count(&self) -> u64 {
        self.max.div_ceil(self.segment_size)
    }

    /// Fundamental discriminants in segment `index`, ascending.
    pub fn segment(&self, index: u64) -> Vec<u64> {
        let lo = 1 + index * self.segment_size;
        let hi = (lo + self.segment_size).min(self.max + 1);
        if lo >= hi {
            return Vec::new();
        }
        let sf = squarefree_flags(lo, hi, &self.primes);
        // m = d/4 for multiples of 4 in [lo, hi)
        let m_lo = lo.div_ceil(4);
        let m_hi = (hi - 1) / 4 + 1;
        let sf_m = squarefree_flags(m_lo, m_hi.max(m_lo), &self.primes);
        let mut out = Vec::new();
        for d in lo..hi {
            let keep = match d % 4 {
                1 => sf[(d - lo) as usize] && (d > 1 || self.include_trivial),
                0 => {
                    let m = d / 4;
                    (m % 4 == 2 || m % 4 == 3) && sf_m[(m - m_lo) as usize]
                }
                _ => false,
            };
            if keep {
                out.push(d);
            }
        }
        out
    }

    /// Streaming ascending iterator, one segment buffered at a time.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.segment_count()).flat_map(move |i| self.segment(i))
    }

    /// Applies `f` to every segment on the rayon pool; results come back in
    /// segment order.
    pub fn map_segments<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[u64]) -> T + Sync + Send,
    {
        (0..self.segment_count())
            .into_par_iter()
            .map(|i| f(&self.segment(i)))
            .collect()
    }

    pub fn collect(&self) -> Vec<u64> {
        self.map_segments(|s| s.to_vec()).concat()
    }
}

/// All fundamental discriminants `d <= x` (d = 1 excluded), ascending.
pub fn enumerate_fundamental(x: u64, segment_size: u64) -> Result<Vec<Discriminant>> {
    let sieve = FundamentalSieve::new(x, segment_size)?;
    Ok(sieve.collect().into_iter().map(Discriminant::from_sieve).collect())
}

/// Exact sum of chi_d(n) over fundamental `d <= x`.
pub fn char_sum_over_discriminants(n: u64, x: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::validation("n must be >= 1"));
    }
    let sieve = FundamentalSieve::new(x, DEFAULT_SEGMENT_SIZE)?;
    let partials = sieve.map_segments(|seg| {
        seg.iter()
            .map(|&d| super::kronecker(d as i64, n) as i64)
            .sum::<i64>()
    });
    Ok(partials.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn definition_filter(x: u64) -> Vec<u64> {
        (1..=x)
            .filter(|&d| {
                let a = d % 4 == 1 && is_squarefree(d) && d > 1;
                let b = d % 4 == 0 && {
                    let m = d / 4;
                    is_squarefree(m) && (m % 4 == 2 || m % 4 == 3)
                };
                a || b
            })
            .collect()
    }

    #[test]
    fn is_fundamental_examples() {
        assert!(is_fundamental(5));
        assert!(!is_fundamental(9));
        assert!(!is_fundamental(4));
        assert!(is_fundamental(8));
        assert!(is_fundamental(12));
        assert!(!is_fundamental(1));
        assert!(is_fundamental_with(1, true));
        assert!(!is_fundamental(16));
        assert!(!is_fundamental(20));
        assert!(is_fundamental(28));
    }

    #[test]
    fn discriminant_kinds() {
        assert_eq!(Discriminant::new(5).unwrap().kind(), DiscriminantKind::OneModFourSquarefree);
        assert_eq!(Discriminant::new(8).unwrap().kind(), DiscriminantKind::FourTimesM);
        assert!(Discriminant::new(1).is_err());
        assert!(Discriminant::new(9).is_err());
        assert_eq!(Discriminant::from_sieve(12), Discriminant::new(12).unwrap());
    }

    #[test]
    fn enumerate_small() {
        let v: Vec<u64> = enumerate_fundamental(12, 5).unwrap().iter().map(|d| d.value()).collect();
        assert_eq!(v, vec![5, 8, 12]);
        assert!(enumerate_fundamental(4, 64).unwrap().is_empty());
        assert!(enumerate_fundamental(1, 64).is_err());
        assert!(FundamentalSieve::new(10, 0).is_err());
    }

    #[test]
    fn overflow_reported() {
        assert!(matches!(
            FundamentalSieve::new(u64::MAX - 3, 1 << 16),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn trivial_flag() {
        let s = FundamentalSieve::new(12, 7).unwrap().with_trivial(true);
        assert_eq!(s.collect(), vec![1, 5, 8, 12]);
    }

    #[test]
    fn segment_size_invariance() {
        let oracle = definition_filter(10_000);
        for seg in [1u64, 64, 4096, 3, 100_000] {
            let s = FundamentalSieve::new(10_000, seg).unwrap();
            assert_eq!(s.collect(), oracle, "segment size {seg}");
            assert_eq!(s.iter().collect::<Vec<_>>(), oracle);
        }
    }

    #[test]
    fn count_at_one_million_matches_filter() {
        let oracle = definition_filter(1_000_000);
        let got = FundamentalSieve::new(1_000_000, 4096).unwrap().collect();
        assert_eq!(got.len(), oracle.len());
        assert_eq!(got, oracle);
    }

    #[test]
    fn char_sum_at_one_counts_discriminants() {
        let count = FundamentalSieve::new(50_000, 999).unwrap().collect().len() as i64;
        assert_eq!(char_sum_over_discriminants(1, 50_000).unwrap(), count);
    }
}
