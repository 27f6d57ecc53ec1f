//! Prime, smallest-prime-factor and segmented squarefree sieves.

/// Primes `p <= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Smallest prime factor table for `0..=limit`.
#[derive(Debug, Clone)]
pub struct SmallestPrimeFactor {
    spf: Vec<u32>,
}

impl SmallestPrimeFactor {
    pub fn new(limit: usize) -> Self {
        assert!(limit < u32::MAX as usize, "table limit exceeds u32");
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        if limit >= 1 {
            spf[1] = 1;
        }
        SmallestPrimeFactor { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    /// Smallest prime factor of `n` (1 for n = 1).
    #[inline]
    pub fn get(&self, n: usize) -> usize {
        self.spf[n] as usize
    }

    /// Distinct prime divisors of `n`, ascending.
    pub fn distinct_primes(&self, mut n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.get(n);
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        out
    }

    /// (squarefree kernel, radical) of `n`: n = kernel * s^2 with kernel
    /// squarefree; radical is the product of the distinct primes.
    pub fn kernel_and_radical(&self, mut n: usize) -> (usize, usize) {
        let mut kernel = 1;
        let mut radical = 1;
        while n > 1 {
            let p = self.get(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            radical *= p;
            if e % 2 == 1 {
                kernel *= p;
            }
        }
        (kernel, radical)
    }

    pub fn is_squarefree(&self, mut n: usize) -> bool {
        while n > 1 {
            let p = self.get(n);
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        true
    }
}

/// Squarefree flags for the integers in `[lo, hi)`; `primes` must contain
/// every prime up to `sqrt(hi - 1)`.
pub fn squarefree_flags(lo: u64, hi: u64, primes: &[u64]) -> Vec<bool> {
    if hi <= lo {
        return Vec::new();
    }
    let mut flags = vec![true; (hi - lo) as usize];
    if lo == 0 {
        flags[0] = false;
    }
    for &p in primes {
        let q = match p.checked_mul(p) {
            Some(q) if q < hi => q,
            _ => break,
        };
        let mut m = lo.div_ceil(q) * q;
        while m < hi {
            flags[(m - lo) as usize] = false;
            m += q;
        }
    }
    flags
}

/// Squarefree test by trial division; for one-off checks on arbitrary `u64`.
pub fn is_squarefree(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    if n.is_multiple_of(4) {
        return false;
    }
    if n.is_multiple_of(2) {
        n /= 2;
    }
    let mut p = 3u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// Distinct prime divisors of `n` by trial division.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_small() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(primes_up_to(1).is_empty());
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
    }

    #[test]
    fn spf_kernel_radical() {
        let spf = SmallestPrimeFactor::new(1000);
        assert_eq!(spf.kernel_and_radical(1), (1, 1));
        assert_eq!(spf.kernel_and_radical(12), (3, 6));
        assert_eq!(spf.kernel_and_radical(72), (2, 6));
        assert_eq!(spf.kernel_and_radical(49), (1, 7));
        assert_eq!(spf.distinct_primes(360), vec![2, 3, 5]);
        for n in 1..=1000 {
            assert_eq!(spf.is_squarefree(n), is_squarefree(n as u64), "n={n}");
        }
    }

    #[test]
    fn segmented_matches_trial_division() {
        let primes = primes_up_to(100);
        for (lo, hi) in [(0u64, 50u64), (1, 2), (7, 1000), (9000, 10000)] {
            let flags = squarefree_flags(lo, hi, &primes);
            for (i, &f) in flags.iter().enumerate() {
                assert_eq!(f, is_squarefree(lo + i as u64), "n={}", lo + i as u64);
            }
        }
    }

    #[test]
    fn trial_division_factors() {
        assert_eq!(distinct_prime_factors(1), Vec::<u64>::new());
        assert_eq!(distinct_prime_factors(30), vec![2, 3, 5]);
        assert_eq!(distinct_prime_factors(1 << 40), vec![2]);
        assert_eq!(distinct_prime_factors(999_999_937), vec![999_999_937]);
    }
}
