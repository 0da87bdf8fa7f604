/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Error count over a number of observed bits, with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub errors: u64,
    pub symbols: u64,
    pub ber: f64,
    pub ci95_halfwidth: f64,
}

impl BerEstimate {
    pub fn new(errors: u64, symbols: u64) -> Self {
        let (lo, hi) = wilson_interval(errors, symbols, Z95);
        let ber = if symbols == 0 { 0.0 } else { errors as f64 / symbols as f64 };
        Self { errors, symbols, ber, ci95_halfwidth: 0.5 * (hi - lo) }
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.symbols, Z95)
    }

    /// True when the two 95% intervals do not overlap.
    pub fn separated_from(&self, other: &BerEstimate) -> bool {
        let (a_lo, a_hi) = self.interval();
        let (b_lo, b_hi) = other.interval();
        a_hi < b_lo || b_hi < a_lo
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}
