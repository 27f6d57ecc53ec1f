//! Argument parsers. Integer flags accept scientific notation ("1e6") as
//! long as the value is a whole number in range.

pub fn parse_u64(s: &str) -> Result<u64, String> {
    parse_u128(s).and_then(|v| u64::try_from(v).map_err(|_| format!("{s} does not fit in 64 bits")))
}

pub fn parse_u32(s: &str) -> Result<u32, String> {
    parse_u128(s).and_then(|v| u32::try_from(v).map_err(|_| format!("{s} does not fit in 32 bits")))
}

pub fn parse_u128(s: &str) -> Result<u128, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u128>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if !(f.is_finite() && f >= 0.0 && f.fract() == 0.0) {
        return Err(format!("{s:?} is not a nonnegative whole number"));
    }
    // powers of ten stay exact in f64 up to 1e22; past that a literal like
    // "3e30" would silently round
    if f > 1e22 {
        return Err(format!("{s} is too large for float notation; write it out in full"));
    }
    Ok(f as u128)
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}
