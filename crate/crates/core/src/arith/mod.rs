//! Exact elementary number theory: Kronecker symbols, sieves, fundamental
//! discriminants and the radical weights prod_{p | n} p/(p+1).

pub mod cache;
pub mod discriminant;
pub mod kronecker;
pub mod sieve;

pub use discriminant::{
    char_sum_over_discriminants, classify, enumerate_fundamental, is_fundamental,
    is_fundamental_with, Discriminant, DiscriminantKind, FundamentalSieve, DEFAULT_SEGMENT_SIZE,
};
pub use kronecker::{character_table, jacobi, kronecker};
pub use sieve::{primes_up_to, SmallestPrimeFactor};

use crate::rational::ExactRational;

/// prod over distinct primes p | n of p/(p+1); 1 for n = 1.
pub fn radical_weight(n: u64) -> ExactRational {
    assert!(n >= 1, "radical_weight needs n >= 1");
    let primes = sieve::distinct_prime_factors(n);
    radical_weight_of_primes(&primes)
}

pub(crate) fn radical_weight_of_primes(primes: &[u64]) -> ExactRational {
    let mut num = num_bigint::BigInt::from(1u32);
    let mut den = num_bigint::BigInt::from(1u32);
    for &p in primes {
        num *= p;
        den *= p + 1;
    }
    ExactRational::new(num, den)
}

/// Floating-point radical weight.
pub fn radical_weight_f64(n: u64) -> f64 {
    sieve::distinct_prime_factors(n)
        .into_iter()
        .map(|p| p as f64 / (p as f64 + 1.0))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights() {
        assert_eq!(radical_weight(1), ExactRational::one());
        assert_eq!(radical_weight(12), ExactRational::new(1, 2));
        assert_eq!(radical_weight(30), ExactRational::new(5, 12));
        assert_eq!(radical_weight(8), ExactRational::new(2, 3));
        assert!((radical_weight_f64(30) - 5.0 / 12.0).abs() < 1e-15);
    }
}
