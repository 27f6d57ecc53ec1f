//! The Euler product c_k, zeta(2) and the predicted main-term constant
//! c_k * gamma_k / zeta(2).

use serde::Serialize;

use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::polytope::{volume_exact_small, volume_mc, PairFormSystem};

pub const MIN_CUTOFF: u64 = 100;

pub fn zeta2() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI / 6.0
}

/// Natural log of the local factor at p:
/// (1-1/p)^{k(k+1)/2} / (1+1/p) * (1/p + ((1-1/sqrt p)^{-k} + (1+1/sqrt p)^{-k}) / 2).
pub fn log_local_factor(k: u32, p: u64) -> f64 {
    let inv_p = 1.0 / p as f64;
    let x = inv_p.sqrt();
    let kf = k as f64;
    let tri = kf * (kf + 1.0) / 2.0;
    let minus = (-kf * (-x).ln_1p()).exp();
    let plus = (-kf * x.ln_1p()).exp();
    let bracket = inv_p + 0.5 * (minus + plus);
    tri * (-inv_p).ln_1p() - inv_p.ln_1p() + bracket.ln()
}

/// Local Euler factor of c_k at the prime p; always positive.
pub fn local_factor(k: u32, p: u64) -> f64 {
    log_local_factor(k, p).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct EulerProductEstimate {
    pub k: u32,
    pub prime_cutoff: u64,
    pub partial: f64,
    /// |partial(cutoff) - partial(cutoff / 2)|.
    pub tail_gap: f64,
}

/// Product of local factors over primes p <= cutoff, no lower bound on the
/// cutoff.
pub fn partial_product(k: u32, cutoff: u64) -> f64 {
    primes_up_to(cutoff)
        .into_iter()
        .map(|p| log_local_factor(k, p))
        .collect::<CompensatedSum>()
        .value()
        .exp()
}

pub fn euler_ck(k: u32, prime_cutoff: u64) -> Result<EulerProductEstimate> {
    if k == 0 {
        return Err(Error::validation("k must be >= 1"));
    }
    if prime_cutoff < MIN_CUTOFF {
        return Err(Error::validation(format!(
            "prime cutoff must be >= {MIN_CUTOFF}, got {prime_cutoff}"
        )));
    }
    let half = prime_cutoff / 2;
    let mut acc = CompensatedSum::new();
    let mut at_half = None;
    for p in primes_up_to(prime_cutoff) {
        if p > half && at_half.is_none() {
            at_half = Some(acc.value());
        }
        acc.add(log_local_factor(k, p));
    }
    let partial = acc.value().exp();
    let at_half = at_half.unwrap_or(acc.value());
    Ok(EulerProductEstimate {
        k,
        prime_cutoff,
        partial,
        tail_gap: (partial - at_half.exp()).abs(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PredictConfig {
    pub prime_cutoff: u64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            prime_cutoff: 1_000_000,
            samples: 4_000_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub k: u32,
    pub cutoff: u64,
    pub c_k: f64,
    pub tail_gap: f64,
    pub zeta2: f64,
    pub gamma_k: f64,
    pub gamma_k_stderr: f64,
    pub predicted: f64,
    pub predicted_stderr: f64,
}

/// gamma_k with its standard error: exact for k <= 3, Monte-Carlo beyond.
/// k = 1 has no pair forms; its volume is the empty product 1.
pub fn gamma(k: u32, samples: u64, seed: u64) -> Result<(f64, f64)> {
    match k {
        0 => Err(Error::validation("k must be >= 1")),
        1 => Ok((1.0, 0.0)),
        2 | 3 => Ok((volume_exact_small(k as usize)?.to_f64(), 0.0)),
        _ => {
            let v = volume_mc(&PairFormSystem::all_ones(k as usize)?, samples, seed)?;
            Ok((v.estimate, v.stderr))
        }
    }
}

pub fn predicted_constant(k: u32, config: &PredictConfig) -> Result<Prediction> {
    let ck = euler_ck(k, config.prime_cutoff)?;
    let (gamma_k, gamma_k_stderr) = gamma(k, config.samples, config.seed)?;
    let z = zeta2();
    Ok(Prediction {
        k,
        cutoff: config.prime_cutoff,
        c_k: ck.partial,
        tail_gap: ck.tail_gap,
        zeta2: z,
        gamma_k,
        gamma_k_stderr,
        predicted: ck.partial * gamma_k / z,
        predicted_stderr: ck.partial * gamma_k_stderr / z,
    })
}
