//! Weighted counts of k-tuples with square product,
//!
//!   T(b_1, ..., b_k) = sum over n_i <= b_i with n_1 ... n_k a square of w(n_1 ... n_k),
//!
//! where w(n) = prod_{p | n} p/(p+1), and least-squares extraction of the
//! leading log-polynomial coefficient of T(Y, ..., Y) / Y^{k/2}.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::sieve::distinct_prime_factors;
use crate::arith::SmallestPrimeFactor;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::rational::ExactRational;

pub const ORACLE_MAX_K: usize = 5;
pub const ORACLE_MAX_TUPLES: u128 = 10_000_000_000;
pub const FAST_MAX_K: usize = 6;
pub const FAST_MAX_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareCountResult {
    pub k: usize,
    pub bounds: Vec<u64>,
    pub value: ExactRational,
    /// Number of tuples with square product.
    pub tuple_count: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxCount {
    pub k: usize,
    pub bounds: Vec<u64>,
    pub value: f64,
    pub tuple_count: u128,
    /// Bound on the accumulated rounding error of `value`.
    pub error_bound: f64,
}

/// Limits for the kernel-class enumerator.
#[derive(Debug, Clone, Copy)]
pub struct CountConfig {
    /// Maximum number of (state, bucket-entry) combinations visited.
    pub work_budget: u128,
    /// Maximum number of distinct weight denominators summed exactly.
    pub max_denominators: usize,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            work_budget: 1 << 36,
            max_denominators: 1 << 16,
        }
    }
}

fn check_shape(k: usize, bounds: &[u64], max_k: usize) -> Result<()> {
    if bounds.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: bounds.len(),
        });
    }
    if k == 0 || k > max_k {
        return Err(Error::validation(format!("k must be in 1..={max_k}, got {k}")));
    }
    if bounds.contains(&0) {
        return Err(Error::validation("bounds must be >= 1"));
    }
    Ok(())
}

/// Sum over (R, count) of count * R / prod_{p | R}(p + 1), grouping equal
/// denominators before the exact tree sum.
fn exact_weighted_sum(by_radical: impl IntoIterator<Item = (u128, u128, u128)>, limit: usize) -> Result<ExactRational> {
    let mut by_denom: HashMap<u128, BigInt> = HashMap::new();
    for (radical, denom, count) in by_radical {
        *by_denom.entry(denom).or_default() += BigInt::from(radical) * BigInt::from(count);
        if by_denom.len() > limit {
            return Err(Error::Budget {
                estimated: by_denom.len() as u128,
                budget: limit as u128,
            });
        }
    }
    let mut terms: Vec<(u128, BigInt)> = by_denom.into_iter().collect();
    terms.sort_unstable_by_key(|(d, _)| *d);
    Ok(ExactRational::tree_sum(
        terms.into_iter().map(|(d, n)| ExactRational::new(n, d)).collect(),
    ))
}

/// Brute force over every tuple; the square test is an integer square root of
/// the exact product.
pub fn count_oracle(k: usize, bounds: &[u64]) -> Result<SquareCountResult> {
    check_shape(k, bounds, ORACLE_MAX_K)?;
    let tuples = bounds
        .iter()
        .try_fold(1u128, |acc, &b| acc.checked_mul(b as u128))
        .unwrap_or(u128::MAX);
    if tuples > ORACLE_MAX_TUPLES {
        return Err(Error::Budget {
            estimated: tuples,
            budget: ORACLE_MAX_TUPLES,
        });
    }

    fn walk(rest: &[u64], prod: u64, hits: &mut HashMap<u64, u128>) {
        match rest.split_first() {
            None => {
                let s = prod.isqrt();
                if s * s == prod {
                    let radical: u64 = distinct_prime_factors(s).iter().product();
                    *hits.entry(radical).or_default() += 1;
                }
            }
            Some((&b, tail)) => {
                for n in 1..=b {
                    walk(tail, prod * n, hits);
                }
            }
        }
    }

    let hits = (1..=bounds[0])
        .into_par_iter()
        .fold(HashMap::new, |mut hits, n1| {
            walk(&bounds[1..], n1, &mut hits);
            hits
        })
        .reduce(HashMap::new, merge_counts);
    let tuple_count = hits.values().sum();
    let value = exact_weighted_sum(
        hits.into_iter().map(|(r, c)| {
            let denom: u64 = distinct_prime_factors(r).iter().map(|p| p + 1).product();
            (r as u128, denom as u128, c)
        }),
        usize::MAX,
    )?;
    Ok(SquareCountResult {
        k,
        bounds: bounds.to_vec(),
        value,
        tuple_count,
    })
}

fn merge_counts<K: std::hash::Hash + Eq>(mut a: HashMap<K, u128>, b: HashMap<K, u128>) -> HashMap<K, u128> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (key, c) in b {
        *a.entry(key).or_default() += c;
    }
    a
}

/// Integers n <= bound grouped by squarefree kernel a(n), each group holding
/// (radical, multiplicity) sorted by radical.
struct KernelBuckets {
    by_kernel: HashMap<u64, Vec<(u64, u64)>>,
    kernels: Vec<u64>,
    entries: usize,
}

impl KernelBuckets {
    fn new(bound: u64, spf: &SmallestPrimeFactor) -> Self {
        let mut pairs: Vec<(u64, u64)> = (1..=bound as usize)
            .map(|n| {
                let (a, r) = spf.kernel_and_radical(n);
                (a as u64, r as u64)
            })
            .collect();
        pairs.sort_unstable();
        let mut by_kernel: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
        let mut entries = 0;
        for chunk in pairs.chunk_by(|x, y| x == y) {
            let (a, r) = chunk[0];
            by_kernel.entry(a).or_default().push((r, chunk.len() as u64));
            entries += 1;
        }
        let mut kernels: Vec<u64> = by_kernel.keys().copied().collect();
        kernels.sort_unstable();
        KernelBuckets {
            by_kernel,
            kernels,
            entries,
        }
    }
}

/// Running state of a partial tuple: squarefree part K of the product so far
/// and the radical R of the product so far.
type StateKey = (u128, u128);

/// Per-state data: multiplicity and prod_{p | R}(p + 1).
#[derive(Clone, Copy)]
struct StateVal {
    count: u128,
    denom: u128,
}

struct Enumerator {
    k: usize,
    bounds: Vec<u64>,
    /// prod_{p | n}(p + 1) for n <= max bound.
    denom_table: Vec<u64>,
    buckets: Vec<std::sync::Arc<KernelBuckets>>,
    states: Vec<(StateKey, StateVal)>,
}

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} exceeds 128 bits"))
}

impl Enumerator {
    fn new(k: usize, bounds: &[u64], config: &CountConfig) -> Result<Self> {
        check_shape(k, bounds, FAST_MAX_K)?;
        let max = *bounds.iter().max().unwrap();
        if max > FAST_MAX_BOUND {
            return Err(Error::validation(format!(
                "largest bound must be <= {FAST_MAX_BOUND}, got {max}"
            )));
        }
        let spf = SmallestPrimeFactor::new(max as usize);
        let mut denom_table = vec![1u64; max as usize + 1];
        for (n, slot) in denom_table.iter_mut().enumerate().skip(2) {
            *slot = spf.distinct_primes(n).iter().map(|&p| p as u64 + 1).product();
        }
        let mut cache: HashMap<u64, std::sync::Arc<KernelBuckets>> = HashMap::new();
        let buckets = bounds
            .iter()
            .map(|&b| {
                cache
                    .entry(b)
                    .or_insert_with(|| std::sync::Arc::new(KernelBuckets::new(b, &spf)))
                    .clone()
            })
            .collect();
        let mut e = Enumerator {
            k,
            bounds: bounds.to_vec(),
            denom_table,
            buckets,
            states: vec![((1, 1), StateVal { count: 1, denom: 1 })],
        };
        e.advance(config)?;
        Ok(e)
    }

    /// Combined radical and its denominator after multiplying in a number
    /// with radical `r`.
    fn join(&self, radical: u128, denom: u128, r: u64) -> Result<(u128, u128)> {
        let g = radical.gcd(&(r as u128)) as u64;
        let new_r = (radical / g as u128).checked_mul(r as u128).ok_or_else(|| overflow("radical"))?;
        let new_d = (denom / self.denom_table[g as usize] as u128)
            .checked_mul(self.denom_table[r as usize] as u128)
            .ok_or_else(|| overflow("weight denominator"))?;
        Ok((new_r, new_d))
    }

    /// Pushes the state set through every coordinate except the last.
    fn advance(&mut self, config: &CountConfig) -> Result<()> {
        let mut work: u128 = 0;
        for i in 0..self.k - 1 {
            let buckets = self.buckets[i].clone();
            // kernels still completable by the remaining coordinates
            let cap = self.bounds[i + 1..]
                .iter()
                .fold(1u128, |acc, &b| acc.saturating_mul(b as u128));
            work = work.saturating_add(self.states.len() as u128 * buckets.entries as u128);
            if work > config.work_budget {
                return Err(Error::Budget {
                    estimated: work,
                    budget: config.work_budget,
                });
            }
            let this = &*self;
            let next = this
                .states
                .par_iter()
                .try_fold(HashMap::new, |mut acc: HashMap<StateKey, StateVal>, &((kernel, radical), val)| {
                    for &a in &buckets.kernels {
                        let g = kernel.gcd(&(a as u128));
                        let new_k = (kernel / g) * (a as u128 / g);
                        if new_k > cap {
                            continue;
                        }
                        for &(r, c) in &buckets.by_kernel[&a] {
                            let (new_r, new_d) = this.join(radical, val.denom, r)?;
                            let count = val.count.checked_mul(c as u128).ok_or_else(|| overflow("tuple count"))?;
                            acc.entry((new_k, new_r))
                                .and_modify(|v| v.count += count)
                                .or_insert(StateVal { count, denom: new_d });
                        }
                    }
                    Ok::<_, Error>(acc)
                })
                .try_reduce(HashMap::new, |a, b| Ok(merge_states(a, b)))?;
            let mut states: Vec<(StateKey, StateVal)> = next.into_iter().collect();
            states.sort_unstable_by_key(|(key, _)| *key);
            self.states = states;
        }
        let last = &self.buckets[self.k - 1];
        let joins: u128 = self
            .states
            .iter()
            .filter_map(|((kernel, _), _)| u64::try_from(*kernel).ok())
            .filter_map(|kernel| last.by_kernel.get(&kernel))
            .map(|v| v.len() as u128)
            .sum();
        work = work.saturating_add(joins);
        if work > config.work_budget {
            return Err(Error::Budget {
                estimated: work,
                budget: config.work_budget,
            });
        }
        Ok(())
    }

    /// Calls `f(radical, denom, multiplicity)` for every completed square
    /// tuple class originating from `state`.
    fn complete<F: FnMut(u128, u128, u128) -> Result<()>>(&self, state: &(StateKey, StateVal), mut f: F) -> Result<()> {
        let ((kernel, radical), val) = *state;
        let Ok(kernel) = u64::try_from(kernel) else {
            return Ok(());
        };
        if let Some(entries) = self.buckets[self.k - 1].by_kernel.get(&kernel) {
            for &(r, c) in entries {
                let (new_r, new_d) = self.join(radical, val.denom, r)?;
                f(new_r, new_d, val.count * c as u128)?;
            }
        }
        Ok(())
    }
}

fn merge_states(mut a: HashMap<StateKey, StateVal>, mut b: HashMap<StateKey, StateVal>) -> HashMap<StateKey, StateVal> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (key, v) in b {
        a.entry(key).and_modify(|x| x.count += v.count).or_insert(v);
    }
    a
}

/// Exact count via squarefree-kernel classes: n_i = a_i s_i^2 and the product
/// is a square iff the kernels multiply to a square.
pub fn count_fast(k: usize, bounds: &[u64]) -> Result<SquareCountResult> {
    count_fast_with(k, bounds, &CountConfig::default())
}

pub fn count_fast_with(k: usize, bounds: &[u64], config: &CountConfig) -> Result<SquareCountResult> {
    let e = Enumerator::new(k, bounds, config)?;
    let finals = e
        .states
        .par_iter()
        .try_fold(HashMap::new, |mut acc: HashMap<(u128, u128), u128>, state| {
            e.complete(state, |r, d, c| {
                *acc.entry((r, d)).or_default() += c;
                Ok(())
            })?;
            Ok::<_, Error>(acc)
        })
        .try_reduce(HashMap::new, |a, b| Ok(merge_counts(a, b)))?;
    let tuple_count = finals.values().sum();
    let value = exact_weighted_sum(
        finals.into_iter().map(|((r, d), c)| (r, d, c)),
        config.max_denominators,
    )?;
    Ok(SquareCountResult {
        k,
        bounds: bounds.to_vec(),
        value,
        tuple_count,
    })
}

/// Floating-point twin of [`count_fast`] for sizes where the exact rational
/// would have millions of bits. Deterministic: partial sums are merged in a
/// fixed order.
pub fn count_fast_f64(k: usize, bounds: &[u64]) -> Result<ApproxCount> {
    count_fast_f64_with(k, bounds, &CountConfig::default())
}

pub fn count_fast_f64_with(k: usize, bounds: &[u64], config: &CountConfig) -> Result<ApproxCount> {
    let e = Enumerator::new(k, bounds, config)?;
    let parts: Vec<(CompensatedSum, u128)> = e
        .states
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = CompensatedSum::new();
            let mut tuples = 0u128;
            for state in chunk {
                e.complete(state, |r, d, c| {
                    acc.add(c as f64 * (r as f64 / d as f64));
                    tuples += c;
                    Ok(())
                })?;
            }
            Ok((acc, tuples))
        })
        .collect::<Result<_>>()?;
    let mut total = CompensatedSum::new();
    let mut tuple_count = 0;
    for (p, t) in &parts {
        total.merge(p);
        tuple_count += t;
    }
    Ok(ApproxCount {
        k,
        bounds: bounds.to_vec(),
        value: total.value(),
        tuple_count,
        // each weight carries a relative error of a few ulps from the division
        error_bound: total.rounding_bound() + 4.0 * f64::EPSILON * total.abs_sum(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub k: usize,
    pub degree: usize,
    /// Coefficient of (ln Y)^j at index j.
    pub coefficients: Vec<f64>,
    pub leading: f64,
    /// Root-mean-square residual of T(Y) / Y^{k/2}.
    pub residual: f64,
    pub grid: Vec<u64>,
    pub values: Vec<f64>,
}

/// Degree of the log-polynomial for k coordinates: k(k-1)/2.
pub fn fit_degree(k: usize) -> usize {
    k * (k - 1) / 2
}

/// Evaluates T(Y, ..., Y) on the grid and fits T / Y^{k/2} to a polynomial of
/// degree k(k-1)/2 in ln Y.
pub fn fit_leading(k: usize, grid: &[u64]) -> Result<FitResult> {
    validate_grid(k, grid)?;
    let values = grid
        .iter()
        .map(|&y| count_fast_f64(k, &vec![y; k]).map(|c| c.value))
        .collect::<Result<Vec<f64>>>()?;
    let samples: Vec<(u64, f64)> = grid.iter().copied().zip(values).collect();
    fit_from_values(k, &samples)
}

fn validate_grid(k: usize, grid: &[u64]) -> Result<()> {
    if k == 0 {
        return Err(Error::validation("k must be >= 1"));
    }
    let need = fit_degree(k) + 2;
    if grid.len() < need {
        return Err(Error::validation(format!(
            "grid needs at least {need} points for k = {k}, got {}",
            grid.len()
        )));
    }
    if let Some(&y) = grid.iter().find(|&&y| y < 100) {
        return Err(Error::validation(format!("grid values must be >= 100, got {y}")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::validation("grid values must be distinct"));
    }
    Ok(())
}

/// Least-squares fit on precomputed (Y, T(Y)) samples.
pub fn fit_from_values(k: usize, samples: &[(u64, f64)]) -> Result<FitResult> {
    let grid: Vec<u64> = samples.iter().map(|s| s.0).collect();
    validate_grid(k, &grid)?;
    let degree = fit_degree(k);
    let half_k = k as f64 / 2.0;
    let rows = samples.len();
    let ys: Vec<f64> = samples.iter().map(|&(y, t)| t / (y as f64).powf(half_k)).collect();
    let mut a = DMatrix::from_fn(rows, degree + 1, |i, j| (samples[i].0 as f64).ln().powi(j as i32));
    // column scaling keeps the normal equations well conditioned
    let scales: Vec<f64> = (0..=degree)
        .map(|j| a.column(j).amax().max(f64::MIN_POSITIVE))
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_vec(ys.clone());
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > smax * 1e-12) {
        return Err(Error::Numeric(format!(
            "design matrix is rank deficient (singular values {smin:e} / {smax:e})"
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
    let coefficients: Vec<f64> = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let fitted = &a * &x;
    let residual = ((&b - fitted).norm_squared() / rows as f64).sqrt();
    Ok(FitResult {
        k,
        degree,
        leading: coefficients[degree],
        coefficients,
        residual,
        grid,
        values: samples.iter().map(|s| s.1).collect(),
    })
}

/// Log-spaced integer grid from 10^lo to 10^hi with `per_decade` steps per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: u32) -> Vec<u64> {
    let steps = ((hi - lo) * per_decade as f64).round() as u32;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| 10f64.powf(lo + i as f64 / per_decade as f64).round() as u64)
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::radical_weight;

    #[test]
    fn oracle_examples() {
        for k in 1..=5 {
            let r = count_oracle(k, &vec![1; k]).unwrap();
            assert_eq!(r.value, ExactRational::one());
            assert_eq!(r.tuple_count, 1);
        }
        // (1,1) and (2,2)
        assert_eq!(count_oracle(2, &[2, 2]).unwrap().value, ExactRational::new(5, 3));
        assert!(matches!(count_oracle(2, &[100_000, 200_000]), Err(Error::Budget { .. })));
        assert!(count_oracle(6, &[1; 6]).is_err());
        assert!(matches!(count_oracle(2, &[3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn double_loop_cross_check() {
        let mut expected = ExactRational::zero();
        for a in 1..=9u64 {
            for b in 1..=7u64 {
                let p = a * b;
                if p.isqrt().pow(2) == p {
                    expected += radical_weight(p);
                }
            }
        }
        assert_eq!(count_oracle(2, &[9, 7]).unwrap().value, expected);
        assert_eq!(count_fast(2, &[9, 7]).unwrap().value, expected);
    }

    #[test]
    fn fast_matches_oracle() {
        assert_eq!(count_fast(2, &[4, 4]).unwrap(), count_oracle(2, &[4, 4]).unwrap());
        assert_eq!(count_fast(3, &[10, 10, 10]).unwrap(), count_oracle(3, &[10, 10, 10]).unwrap());
        assert_eq!(count_fast(4, &[5, 9, 12, 3]).unwrap(), count_oracle(4, &[5, 9, 12, 3]).unwrap());
        assert_eq!(count_fast(1, &[50]).unwrap(), count_oracle(1, &[50]).unwrap());
    }

    #[test]
    fn second_coordinate_one() {
        let y = 200u64;
        let expected: ExactRational = (1..=y.isqrt()).map(|s| radical_weight(s * s)).sum();
        assert_eq!(count_fast(2, &[y, 1]).unwrap().value, expected);
    }

    #[test]
    fn float_twin_matches_exact() {
        for bounds in [vec![30u64, 30], vec![12, 20, 7], vec![6, 6, 6, 6]] {
            let k = bounds.len();
            let exact = count_fast(k, &bounds).unwrap();
            let approx = count_fast_f64(k, &bounds).unwrap();
            assert_eq!(exact.tuple_count, approx.tuple_count);
            assert!((exact.value.to_f64() - approx.value).abs() <= approx.error_bound.max(1e-12));
        }
    }

    #[test]
    fn denominator_limit_is_a_budget_refusal() {
        let tight = CountConfig {
            max_denominators: 3,
            ..Default::default()
        };
        assert!(matches!(count_fast_with(2, &[100, 100], &tight), Err(Error::Budget { .. })));
        let tiny = CountConfig {
            work_budget: 10,
            ..Default::default()
        };
        assert!(matches!(count_fast_with(3, &[100; 3], &tiny), Err(Error::Budget { .. })));
        assert!(count_fast(2, &[2_000_000, 1]).is_err());
    }

    #[test]
    fn synthetic_polynomial_recovery() {
        let (a, b) = (0.37, -1.25);
        let samples: Vec<(u64, f64)> = [100u64, 1000, 10_000, 100_000]
            .iter()
            .map(|&y| {
                let l = (y as f64).ln();
                (y, y as f64 * (a * l + b))
            })
            .collect();
        let fit = fit_from_values(2, &samples).unwrap();
        assert_eq!(fit.degree, 1);
        assert!((fit.coefficients[1] - a).abs() < 1e-12);
        assert!((fit.coefficients[0] - b).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_preconditions() {
        assert!(fit_leading(2, &[100, 200]).is_err());
        assert!(fit_leading(2, &[100, 200, 50]).is_err());
        assert!(fit_leading(2, &[100, 200, 200]).is_err());
    }

    #[test]
    fn log_grid_spacing() {
        let g = log_grid(3.0, 6.0, 2);
        assert_eq!(g, vec![1000, 3162, 10_000, 31_623, 100_000, 316_228, 1_000_000]);
    }
}
