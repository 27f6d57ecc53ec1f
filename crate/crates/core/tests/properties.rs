use proptest::prelude::*;
use quadmoments::analysis::{abel_bound_check, g, GParams};
use quadmoments::arith::{enumerate_fundamental, is_fundamental, kronecker, Discriminant};
use quadmoments::charsum::{char_sum, smoothed_sum};
use quadmoments::squarecount::count_fast;
use quadmoments::theta::{theta, theta_with_truncation};

fn fundamental_up_to(max: u64) -> impl Strategy<Value = u64> {
    (5..=max).prop_filter("fundamental", |&d| is_fundamental(d))
}

proptest! {
    #[test]
    fn kronecker_completely_multiplicative(d in fundamental_up_to(500), m in 1u64..=200, n in 1u64..=200) {
        let d = d as i64;
        prop_assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
    }

    #[test]
    fn kronecker_periodic_and_even(d in fundamental_up_to(500), n in 1u64..1500) {
        let di = d as i64;
        prop_assume!(n <= 3 * d);
        prop_assert_eq!(kronecker(di, n + d), kronecker(di, n));
        if n < d {
            prop_assert_eq!(kronecker(di, d - n), kronecker(di, n));
        }
        prop_assert_eq!(kronecker(di, n) == 0, num_integer::gcd(n, d) > 1);
    }

    #[test]
    fn full_period_sums_to_zero(d in fundamental_up_to(10_000)) {
        let disc = Discriminant::new(d).unwrap();
        prop_assert_eq!(char_sum(&disc, d as f64), 0);
    }

    #[test]
    fn smoothed_sum_bounded(d in fundamental_up_to(2000), y in 1.0f64..500.0) {
        let disc = Discriminant::new(d).unwrap();
        let support = ((2.0 * y).ceil() as u64).saturating_sub(y.floor() as u64 + 1);
        prop_assert!(smoothed_sum(&disc, y).abs() <= support as f64 + 1e-9);
    }

    #[test]
    fn square_count_symmetric(mut b in proptest::collection::vec(1u64..=25, 3), rot in 0usize..3) {
        let base = count_fast(3, &b).unwrap();
        b.rotate_left(rot);
        prop_assert_eq!(&count_fast(3, &b).unwrap().value, &base.value);
        b.swap(0, 1);
        prop_assert_eq!(count_fast(3, &b).unwrap().value, base.value);
    }

    #[test]
    fn square_count_monotone(b in proptest::collection::vec(1u64..=40, 2), i in 0usize..2) {
        let base = count_fast(2, &b).unwrap();
        let mut bigger = b.clone();
        bigger[i] += 1;
        let up = count_fast(2, &bigger).unwrap();
        prop_assert!(up.value >= base.value);
        prop_assert!(base.value.to_f64() <= base.tuple_count as f64);
    }

    #[test]
    fn theta_certified_truncation(d in fundamental_up_to(5000), t in 1e-3f64..1e3) {
        let disc = Discriminant::new(d).unwrap();
        let s = theta(&disc, t).unwrap();
        let wide = theta_with_truncation(&disc, t, 4 * s.truncation);
        let rounding = 1e-15 * s.truncation as f64;
        prop_assert!((wide.value - s.value).abs() <= s.tail_bound + rounding);
    }

    #[test]
    fn abel_bound_holds(pairs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..100)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!(abel_bound_check(&a, &b).unwrap().holds);
    }

    #[test]
    fn g_nonincreasing_on_middle_branch(log_x in 2.0f64..1e6, x in 0.0f64..10.0, h in 0.0f64..1.0) {
        let p = GParams::with_log_x(log_x).unwrap();
        let y = (x + h).min(10.0 - 1e-12);
        prop_assert!(g(y, &p) <= g(x.min(y), &p));
    }
}

#[test]
fn legendre_agreement_for_primes_one_mod_four() {
    for p in quadmoments::arith::primes_up_to(999).into_iter().filter(|p| p % 4 == 1) {
        for n in 1..p {
            let mut r = 1u64;
            for _ in 0..(p - 1) / 2 {
                r = r * n % p;
            }
            let euler = if r == 1 { 1 } else { -1 };
            assert_eq!(kronecker(p as i64, n), euler, "p={p} n={n}");
        }
    }
}

#[test]
fn segment_sizes_give_identical_streams() {
    let a = enumerate_fundamental(50_000, 1).unwrap();
    assert_eq!(a, enumerate_fundamental(50_000, 64).unwrap());
    assert_eq!(a, enumerate_fundamental(50_000, 4096).unwrap());
}
