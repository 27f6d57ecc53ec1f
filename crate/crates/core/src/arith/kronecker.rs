//! Kronecker symbol by quadratic reciprocity, no factoring.

use super::sieve::SmallestPrimeFactor;

/// Kronecker symbol (d/n) for any integer `d` and `n >= 0`.
///
/// Values are in {-1, 0, 1}. For a positive fundamental discriminant `d`
/// this is the primitive real character modulo `d`.
pub fn kronecker(d: i64, n: u64) -> i8 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let twos = n.trailing_zeros();
    if twos > 0 && d % 2 == 0 {
        return 0;
    }
    let odd = n >> twos;
    let mut sign = 1i8;
    if twos % 2 == 1 {
        sign = kronecker_two(d);
    }
    // (d/odd) is the Jacobi symbol of d reduced mod odd
    let a = if odd <= i64::MAX as u64 {
        d.rem_euclid(odd as i64) as u64
    } else {
        (d as i128).rem_euclid(odd as i128) as u64
    };
    sign * jacobi(a, odd)
}

/// (d/2): 0 for even d, +1 for d = ±1 (mod 8), -1 for d = ±3 (mod 8).
pub fn kronecker_two(d: i64) -> i8 {
    match d.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// Jacobi symbol (a/n) for odd positive `n`.
pub fn jacobi(mut a: u64, mut n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    a %= n;
    let mut result = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Values chi_d(0..=n_max) of the character n -> (d/n).
///
/// Evaluates the symbol only at primes and fills the rest by complete
/// multiplicativity. `spf` must cover `n_max`.
pub fn character_table(d: i64, n_max: usize, spf: &SmallestPrimeFactor) -> Vec<i8> {
    assert!(
        n_max <= spf.limit(),
        "smallest-prime-factor table too small: {} < {}",
        spf.limit(),
        n_max
    );
    let mut chi = vec![0i8; n_max + 1];
    chi[0] = kronecker(d, 0);
    if n_max == 0 {
        return chi;
    }
    chi[1] = 1;
    for n in 2..=n_max {
        let p = spf.get(n);
        chi[n] = if p == n {
            kronecker(d, n as u64)
        } else {
            chi[p] * chi[n / p]
        };
    }
    chi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
        let mut r = 1u128;
        let mut b128 = (b % m) as u128;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b128 % m as u128;
            }
            b128 = b128 * b128 % m as u128;
            e >>= 1;
        }
        r as u64
    }

    fn euler_criterion(a: u64, p: u64) -> i8 {
        match pow_mod(a, (p - 1) / 2, p) {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn examples() {
        assert_eq!(kronecker(5, 1), 1);
        assert_eq!(kronecker(12, 1), 1);
        // (5/3): Euler criterion 5^1 = 2 = -1 mod 3
        assert_eq!(euler_criterion(5, 3), -1);
        assert_eq!(kronecker(5, 3), -1);
        // (12/5) = (2/5) = 2^2 mod 5 = 4 = -1
        assert_eq!(euler_criterion(12 % 5, 5), -1);
        assert_eq!(kronecker(12, 5), -1);
    }

    #[test]
    fn zero_and_two() {
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(8, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(17, 2), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn negative_d_matches_euler_criterion() {
        for p in [3u64, 5, 7, 11, 13, 101] {
            for d in -60i64..60 {
                let a = d.rem_euclid(p as i64) as u64;
                assert_eq!(kronecker(d, p), euler_criterion(a, p), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn huge_modulus_does_not_overflow() {
        let n = u64::MAX; // odd
        let v = kronecker(-3, n);
        assert!((-1..=1).contains(&v));
        assert_eq!(kronecker(1, n), 1);
    }

    #[test]
    fn table_matches_direct() {
        let spf = SmallestPrimeFactor::new(2000);
        for d in [5i64, 8, 12, 13, 21, 24, 28, 1001, -4] {
            let t = character_table(d, 2000, &spf);
            for (n, &v) in t.iter().enumerate() {
                assert_eq!(v, kronecker(d, n as u64), "d={d} n={n}");
            }
        }
    }
}
