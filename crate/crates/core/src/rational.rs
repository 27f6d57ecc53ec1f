//! Exact rationals backed by `num-rational`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Reduced arbitrary-precision fraction with a positive denominator.
///
/// Displays as `p/q` in every case, including integers (`3/1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    /// Balanced pairwise sum; keeps operand sizes similar, which matters when
    /// many terms have unrelated denominators.
    pub fn tree_sum(mut terms: Vec<ExactRational>) -> ExactRational {
        if terms.is_empty() {
            return ExactRational::zero();
        }
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            let mut it = terms.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a + b),
                    None => next.push(a),
                }
            }
            terms = next;
        }
        terms.pop().unwrap()
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        ExactRational(r)
    }
}

impl Add for ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a ExactRational> for ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: &'a ExactRational) -> ExactRational {
        ExactRational(self.0 + &rhs.0)
    }
}

impl AddAssign for ExactRational {
    fn add_assign(&mut self, rhs: ExactRational) {
        self.0 += rhs.0;
    }
}

impl Mul for ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 * rhs.0)
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        ExactRational::tree_sum(iter.collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displays_as_fraction() {
        assert_eq!(ExactRational::new(6, 4).to_string(), "3/2");
        assert_eq!(ExactRational::from_integer(3).to_string(), "3/1");
        assert_eq!(ExactRational::new(-2, 4).to_string(), "-1/2");
    }

    #[test]
    fn tree_sum_matches_fold() {
        let terms: Vec<_> = (1..50).map(|i| ExactRational::new(1, i)).collect();
        let folded = terms.iter().fold(ExactRational::zero(), |a, b| a + b);
        assert_eq!(ExactRational::tree_sum(terms), folded);
    }
}
