/// A nonnegative running sum of terms given as logarithms.
///
/// The sum is `exp(shift) * (sum + comp)` with Neumaier compensation. While
/// every term fits comfortably in an f64 the shift stays 0 and this is plain
/// compensated linear summation; a term above `exp(shift + LINEAR_LIMIT)`
/// moves the shift up to that term's log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockSum {
    shift: f64,
    sum: f64,
    comp: f64,
}

impl ClockSum {
    pub const LINEAR_LIMIT: f64 = 600.0;

    pub fn zero() -> Self {
        Self { shift: 0.0, sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add_log(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term - self.shift > Self::LINEAR_LIMIT {
            let factor = (self.shift - log_term).exp();
            self.sum *= factor;
            self.comp *= factor;
            self.shift = log_term;
        }
        self.add_linear((log_term - self.shift).exp());
    }

    #[inline]
    fn add_linear(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn add(&mut self, term: f64) {
        self.add_term(term, term.ln());
    }

    /// Adds a term known both linearly and as a log. The linear value is
    /// used while no shift is active, so small sums stay exact.
    #[inline]
    pub fn add_term(&mut self, term: f64, log_term: f64) {
        if self.shift == 0.0 && log_term <= Self::LINEAR_LIMIT {
            self.add_linear(term);
        } else {
            self.add_log(log_term);
        }
    }

    /// `ln` of the sum; `-inf` for an empty sum.
    #[inline]
    pub fn ln(&self) -> f64 {
        self.shift + (self.sum + self.comp).ln()
    }

    pub fn value(&self) -> f64 {
        self.ln().exp()
    }

    pub fn is_linear(&self) -> bool {
        self.shift == 0.0
    }
}

impl Default for ClockSum {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sums_are_linear() {
        let mut c = ClockSum::zero();
        assert_eq!(c.ln(), f64::NEG_INFINITY);
        c.add(1.5);
        c.add(2.0);
        assert_eq!(c.value(), 3.5);
        assert!(c.is_linear());
    }

    #[test]
    fn compensation_keeps_tiny_terms() {
        let mut c = ClockSum::zero();
        c.add(1.0);
        for _ in 0..1000 {
            c.add(1e-16);
        }
        assert!((c.value() - (1.0 + 1e-13)).abs() < 1e-15);
    }

    #[test]
    fn huge_terms_shift_into_log_space() {
        let mut c = ClockSum::zero();
        c.add_log(1.0);
        c.add_log(1000.0);
        c.add_log(1000.0);
        assert!(!c.is_linear());
        assert!((c.ln() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        c.add_log(1700.0);
        assert!((c.ln() - 1700.0).abs() < 1e-12);
        assert!(c.value().is_infinite());
    }
}
