//! Floating-point accumulation helpers.

/// Neumaier (improved Kahan) compensated accumulator.
///
/// Also tracks the sum of absolute values so callers can report an
/// a-posteriori rounding bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
    terms: u64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        self.terms += 1;
    }

    /// Folds another partial sum into this one.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
        // the two adds above counted as terms; restore bookkeeping
        self.terms = self.terms - 2 + other.terms;
        self.abs_sum = self.abs_sum - other.sum.abs() - other.compensation.abs() + other.abs_sum;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// Rounding bound of the compensated sum: 2u|S| + O(n u^2) sum|x_i|.
    pub fn rounding_bound(&self) -> f64 {
        let u = f64::EPSILON / 2.0;
        let n = self.terms as f64;
        2.0 * u * self.value().abs() + 4.0 * n * u * u * self.abs_sum
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let acc: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
        assert_eq!(acc.terms(), 4);
    }

    #[test]
    fn merge_matches_serial() {
        let xs: Vec<f64> = (1..1000).map(|i| 1.0 / i as f64).collect();
        let serial: CompensatedSum = xs.iter().copied().collect();
        let mut left: CompensatedSum = xs[..400].iter().copied().collect();
        let right: CompensatedSum = xs[400..].iter().copied().collect();
        left.merge(&right);
        assert!((left.value() - serial.value()).abs() <= 1e-15);
        assert_eq!(left.terms(), serial.terms());
        assert!((left.abs_sum() - serial.abs_sum()).abs() < 1e-12);
    }
}
