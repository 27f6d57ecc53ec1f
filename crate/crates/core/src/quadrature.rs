//! Globally adaptive 15-point Gauss-Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over [a, b], bisecting the worst segment until the summed
/// error estimate is below max(abs_tol, rel_tol * |value|).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_segments: usize) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::validation("integration limits must be finite"));
    }
    if b <= a {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if !total.is_finite() {
            return Err(Error::Numeric("integrand produced a non-finite value".into()));
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        if heap.len() >= max_segments {
            return Err(Error::Numeric(format!(
                "quadrature did not converge: error estimate {total_err:e} after {} segments",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed the drift of the running updates
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(QuadResult {
        value: segs.iter().map(|s| s.value).sum(),
        error: segs.iter().map(|s| s.error).sum(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7) + 1.0, -1.0, 2.0, 1e-12, 0.0, 100).unwrap();
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0 + 3.0;
        assert!((r.value - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10, 10_000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn empty_and_failure() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-9, 0.0, 10).unwrap().value, 0.0);
        assert!(matches!(
            integrate(|x| (1.0 / x).sin() / x, 1e-8, 1.0, 1e-14, 0.0, 4),
            Err(Error::Numeric(_))
        ));
    }
}
