//! Pair-form polytope A_beta and Monte-Carlo estimates of its volume.
//!
//! Coordinates are indexed by the pairs (i, j), i < j, of `0..k` in
//! lexicographic order; a point u lies in the polytope when u >= 0 and, for
//! every j, the sum of u over pairs touching j is at most beta_j. With
//! beta = (1, ..., 1) the volume is gamma_k.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Samples per deterministic work unit. Chunk `c` draws from stream `c` of a
/// ChaCha8 generator keyed by the master seed, so estimates do not depend on
/// the number of worker threads.
pub const CHUNK: u64 = 1 << 16;

pub const MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFormSystem {
    k: usize,
    pairs: Vec<(usize, usize)>,
    beta: Vec<f64>,
}

impl PairFormSystem {
    pub fn new(k: usize, beta: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::validation(format!("pair-form system needs k >= 2, got {k}")));
        }
        if beta.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: beta.len(),
            });
        }
        if beta.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::validation("beta entries must be finite and > 0"));
        }
        let pairs = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        Ok(PairFormSystem { k, pairs, beta })
    }

    pub fn all_ones(k: usize) -> Result<Self> {
        PairFormSystem::new(k, vec![1.0; k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension k(k-1)/2.
    pub fn r(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// 0/1 constraint matrix, one row per coordinate j, one column per pair.
    pub fn constraint_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|j| {
                self.pairs
                    .iter()
                    .map(|&(a, b)| u8::from(a == j || b == j))
                    .collect()
            })
            .collect()
    }

    /// Side of the sampling box along each pair coordinate.
    pub fn box_sides(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(a, b)| self.beta[a].min(self.beta[b]))
            .collect()
    }

    pub fn box_volume(&self) -> f64 {
        self.box_sides().iter().product()
    }

    pub fn contains(&self, u: &[f64]) -> Result<bool> {
        if u.len() != self.r() {
            return Err(Error::DimensionMismatch {
                expected: self.r(),
                got: u.len(),
            });
        }
        if u.iter().any(|&x| x < 0.0) {
            return Ok(false);
        }
        Ok((0..self.k).all(|j| {
            let load: f64 = self
                .pairs
                .iter()
                .zip(u)
                .filter(|(&(a, b), _)| a == j || b == j)
                .map(|(_, &x)| x)
                .sum();
            load <= self.beta[j]
        }))
    }

    fn is_all_ones(&self) -> bool {
        self.beta.iter().all(|&b| b == 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeEstimate {
    pub k: usize,
    pub beta: Vec<f64>,
    pub r: usize,
    pub samples: u64,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactRational>,
}

impl VolumeEstimate {
    /// |estimate - exact| when an exact value is known.
    pub fn exact_gap(&self) -> Option<f64> {
        self.exact.as_ref().map(|e| (self.estimate - e.to_f64()).abs())
    }
}

#[inline]
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random mantissa bits, uniform on [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct ChunkResult {
    hits: u64,
    witnesses: Vec<Vec<f64>>,
}

fn run_chunk(system: &PairFormSystem, sides: &[f64], seed: u64, chunk: u64, n: u64, keep: usize) -> ChunkResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let r = system.r();
    let mut u = vec![0.0; r];
    let mut load = vec![0.0; system.k];
    let mut hits = 0;
    let mut witnesses = Vec::new();
    for _ in 0..n {
        load.iter_mut().for_each(|l| *l = 0.0);
        for (i, &(a, b)) in system.pairs.iter().enumerate() {
            let x = unit_f64(&mut rng) * sides[i];
            u[i] = x;
            load[a] += x;
            load[b] += x;
        }
        if load.iter().zip(&system.beta).all(|(l, b)| l <= b) {
            hits += 1;
            if witnesses.len() < keep {
                witnesses.push(u.clone());
            }
        }
    }
    ChunkResult { hits, witnesses }
}

/// Hit-or-miss estimate of the polytope volume inside its bounding box.
pub fn volume_mc(system: &PairFormSystem, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    volume_mc_with_witnesses(system, samples, seed, 0).map(|(v, _)| v)
}

/// Like [`volume_mc`], also returning up to `keep` accepted sample points
/// (taken from the lowest-numbered chunks) for re-verification.
pub fn volume_mc_with_witnesses(
    system: &PairFormSystem,
    samples: u64,
    seed: u64,
    keep: usize,
) -> Result<(VolumeEstimate, Vec<Vec<f64>>)> {
    if samples < MIN_SAMPLES {
        return Err(Error::validation(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let sides = system.box_sides();
    let chunks = samples.div_ceil(CHUNK);
    let results: Vec<ChunkResult> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(samples - c * CHUNK);
            run_chunk(system, &sides, seed, c, n, keep)
        })
        .collect();
    let hits: u64 = results.iter().map(|c| c.hits).sum();
    let witnesses: Vec<Vec<f64>> = results
        .into_iter()
        .flat_map(|c| c.witnesses)
        .take(keep)
        .collect();
    let box_vol: f64 = sides.iter().product();
    let p = hits as f64 / samples as f64;
    let exact = if system.is_all_ones() {
        volume_exact_small(system.k).ok()
    } else {
        None
    };
    let est = VolumeEstimate {
        k: system.k,
        beta: system.beta.clone(),
        r: system.r(),
        samples,
        seed,
        estimate: p * box_vol,
        stderr: box_vol * (p * (1.0 - p) / samples as f64).sqrt(),
        exact,
    };
    Ok((est, witnesses))
}

/// Known closed forms: gamma_2 = 1, gamma_3 = 1/4.
pub fn volume_exact_small(k: usize) -> Result<ExactRational> {
    match k {
        2 => Ok(ExactRational::one()),
        3 => Ok(ExactRational::new(1, 4)),
        _ => Err(Error::Unsupported(format!("no exact volume fixture for k = {k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure() {
        let s = PairFormSystem::all_ones(4).unwrap();
        assert_eq!(s.r(), 6);
        assert_eq!(s.pairs()[0], (0, 1));
        assert_eq!(s.pairs()[5], (2, 3));
        let m = s.constraint_matrix();
        for row in &m {
            assert_eq!(row.iter().filter(|&&x| x == 1).count(), 3);
        }
        for col in 0..s.r() {
            assert_eq!(m.iter().map(|row| row[col]).sum::<u8>(), 2);
        }
        assert!(PairFormSystem::all_ones(1).is_err());
        assert!(PairFormSystem::new(3, vec![1.0, 0.0, 1.0]).is_err());
        assert!(PairFormSystem::new(3, vec![1.0; 2]).is_err());
    }

    #[test]
    fn contains_examples() {
        let s = PairFormSystem::all_ones(3).unwrap();
        assert!(s.contains(&[0.0, 0.0, 0.0]).unwrap());
        assert!(s.contains(&[1.0, 0.0, 0.0]).unwrap());
        assert!(!s.contains(&[0.6, 0.6, 0.0]).unwrap());
        assert!(!s.contains(&[-0.1, 0.0, 0.0]).unwrap());
        assert!(matches!(
            s.contains(&[0.0; 2]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn k2_is_exact() {
        let s = PairFormSystem::all_ones(2).unwrap();
        let v = volume_mc(&s, 20_000, 7).unwrap();
        assert_eq!(v.estimate, 1.0);
        assert_eq!(v.stderr, 0.0);
        assert_eq!(v.exact_gap(), Some(0.0));
    }

    #[test]
    fn k3_near_quarter() {
        let s = PairFormSystem::all_ones(3).unwrap();
        let v = volume_mc(&s, 1_000_000, 1).unwrap();
        assert!((v.estimate - 0.25).abs() <= 3.0 * v.stderr, "{v:?}");
    }

    #[test]
    fn seed_determinism_and_thread_independence() {
        let s = PairFormSystem::all_ones(4).unwrap();
        let a = volume_mc(&s, 300_000, 42).unwrap();
        let b = volume_mc(&s, 300_000, 42).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| volume_mc(&s, 300_000, 42).unwrap());
        assert_eq!(a.estimate.to_bits(), c.estimate.to_bits());
        let d = volume_mc(&s, 300_000, 43).unwrap();
        assert_ne!(a.estimate.to_bits(), d.estimate.to_bits());
    }

    #[test]
    fn k4_two_seeds_agree() {
        let s = PairFormSystem::all_ones(4).unwrap();
        let a = volume_mc(&s, 2_000_000, 1).unwrap();
        let b = volume_mc(&s, 2_000_000, 2).unwrap();
        let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.estimate - b.estimate).abs() <= 4.0 * combined);
        assert!(a.estimate > 0.0 && a.estimate < 1.0);
        assert!(a.exact.is_none());
    }

    #[test]
    fn witnesses_satisfy_contains() {
        let s = PairFormSystem::new(4, vec![1.0, 0.7, 1.3, 0.9]).unwrap();
        let (_, w) = volume_mc_with_witnesses(&s, 200_000, 9, 1000).unwrap();
        assert_eq!(w.len(), 1000);
        for u in &w {
            assert!(s.contains(u).unwrap());
        }
    }

    #[test]
    fn monotone_in_beta_with_common_numbers() {
        let base = PairFormSystem::new(3, vec![1.0, 1.0, 1.0]).unwrap();
        let bigger = PairFormSystem::new(3, vec![1.0, 1.0, 1.4]).unwrap();
        let a = volume_mc(&base, 500_000, 11).unwrap();
        let b = volume_mc(&bigger, 500_000, 11).unwrap();
        assert!(b.estimate >= a.estimate - 2.0 * a.stderr.max(b.stderr));
    }

    #[test]
    fn scaling_law() {
        // k = 2: volume = min(beta) = lambda exactly
        for lambda in [0.5, 2.0, 3.5] {
            let s = PairFormSystem::new(2, vec![lambda; 2]).unwrap();
            assert_eq!(volume_mc(&s, 10_000, 3).unwrap().estimate, lambda);
        }
        // k = 3: lambda^3 / 4
        let lambda: f64 = 1.7;
        let s = PairFormSystem::new(3, vec![lambda; 3]).unwrap();
        let v = volume_mc(&s, 1_000_000, 5).unwrap();
        assert!((v.estimate - lambda.powi(3) / 4.0).abs() <= 3.0 * v.stderr);
    }

    #[test]
    fn exact_fixtures() {
        assert_eq!(volume_exact_small(2).unwrap(), ExactRational::one());
        assert_eq!(volume_exact_small(3).unwrap(), ExactRational::new(1, 4));
        assert!(matches!(volume_exact_small(4), Err(Error::Unsupported(_))));
        assert!(volume_mc(&PairFormSystem::all_ones(3).unwrap(), 100, 1).is_err());
    }
}
