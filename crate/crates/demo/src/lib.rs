//! Browser bindings: a character-sum walk, a theta curve and a polytope
//! volume estimate. The plain functions are native and tested; the
//! `#[wasm_bindgen]` wrappers only convert types and errors.

use quadmoments::arith::Discriminant;
use quadmoments::charsum::char_sum_profile;
use quadmoments::polytope::{volume_mc, PairFormSystem};
use quadmoments::theta::{theta, T_MAX, T_MIN};
use wasm_bindgen::prelude::*;

/// Keeps the page responsive.
pub const MAX_WALK: u32 = 1_000_000;
pub const MAX_CURVE_POINTS: u32 = 2000;
pub const MAX_SAMPLES: u32 = 20_000_000;

/// Prefix sums S(1), ..., S(y_max) of chi_d.
pub fn char_sum_walk(d: u32, y_max: u32) -> Result<Vec<i64>, String> {
    if y_max == 0 || y_max > MAX_WALK {
        return Err(format!("length must be in 1..={MAX_WALK}"));
    }
    let disc = Discriminant::new(d as u64).map_err(|e| e.to_string())?;
    Ok(char_sum_profile(&disc, y_max as usize))
}

/// theta(t, chi_d) on `points` log-spaced values of t in [t_lo, t_hi],
/// as interleaved (t, value) pairs.
pub fn theta_curve(d: u32, t_lo: f64, t_hi: f64, points: u32) -> Result<Vec<f64>, String> {
    if !(T_MIN <= t_lo && t_lo < t_hi && t_hi <= T_MAX) {
        return Err(format!("need {T_MIN} <= t_lo < t_hi <= {T_MAX}"));
    }
    if !(2..=MAX_CURVE_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_CURVE_POINTS}"));
    }
    let disc = Discriminant::new(d as u64).map_err(|e| e.to_string())?;
    let (a, b) = (t_lo.ln(), t_hi.ln());
    let mut out = Vec::with_capacity(2 * points as usize);
    for i in 0..points {
        // pin the endpoints; exp(ln t) does not round-trip exactly
        let t = match i {
            0 => t_lo,
            i if i == points - 1 => t_hi,
            i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        };
        out.push(t);
        out.push(theta(&disc, t).map_err(|e| e.to_string())?.value);
    }
    Ok(out)
}

/// [estimate, stderr, exact or NaN] for the all-ones pair-form polytope.
pub fn polytope_volume(k: u32, samples: u32, seed: u32) -> Result<Vec<f64>, String> {
    if samples > MAX_SAMPLES {
        return Err(format!("at most {MAX_SAMPLES} samples"));
    }
    let system = PairFormSystem::all_ones(k as usize).map_err(|e| e.to_string())?;
    let v = volume_mc(&system, samples as u64, seed as u64).map_err(|e| e.to_string())?;
    let exact = v.exact.as_ref().map_or(f64::NAN, |e| e.to_f64());
    Ok(vec![v.estimate, v.stderr, exact])
}

#[wasm_bindgen(js_name = charSumWalk)]
pub fn char_sum_walk_js(d: u32, y_max: u32) -> Result<Vec<f64>, JsError> {
    char_sum_walk(d, y_max)
        .map(|v| v.into_iter().map(|s| s as f64).collect())
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = thetaCurve)]
pub fn theta_curve_js(d: u32, t_lo: f64, t_hi: f64, points: u32) -> Result<Vec<f64>, JsError> {
    theta_curve(d, t_lo, t_hi, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = polytopeVolume)]
pub fn polytope_volume_js(k: u32, samples: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    polytope_volume(k, samples, seed).map_err(|e| JsError::new(&e))
}
