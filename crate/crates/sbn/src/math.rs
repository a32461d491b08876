//! Shared numerical primitives: the logistic function, a stable softplus,
//! two-term log-sum-exp, and log-moments of Bernoulli variables.
//!
//! All probability arithmetic in this crate goes through these helpers so
//! that intermediate exponentials never overflow.

/// Logistic function `1 / (1 + e^{-z})`, stable over the full f64 range.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` with branches at |z| = 30 to avoid overflow and wasted work.
pub fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z + (-z).exp()
    } else if z < -30.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)` shifted by the larger argument.
///
/// Tolerates `-inf` in either slot (degenerate Bernoulli factors produce it).
pub fn log_sum_exp_2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Streaming log-sum-exp with a running maximum; O(1) memory over any
/// sequence of finite terms.
#[derive(Debug, Clone)]
pub struct StreamingLogSumExp {
    max: f64,
    sum: f64,
}

impl StreamingLogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for StreamingLogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// `ln(1 - mu + mu * e^c)` — the log-moment `ln <e^{c S}>` of a Bernoulli
/// variable S with mean `mu`.
///
/// Computed as a two-term log-sum-exp of `ln(1 - mu)` and `ln(mu) + c`, which
/// stays finite for any `c` and degenerates correctly at `mu` = 0 or 1.
pub fn bernoulli_log_moment(mu: f64, c: f64) -> f64 {
    log_sum_exp_2((1.0 - mu).ln(), mu.ln() + c)
}

/// `e^c / (1 - mu + mu e^c)` with a log-space fallback when the direct
/// denominator leaves the normal range.
pub fn exp_over_moment(mu: f64, c: f64) -> f64 {
    if c.abs() < 500.0 {
        let den = 1.0 - mu + mu * c.exp();
        if den.is_normal() {
            return c.exp() / den;
        }
    }
    (c - bernoulli_log_moment(mu, c)).exp()
}

/// `(1 - e^c) / (1 - mu + mu e^c)` with a log-space fallback.
///
/// The numerator uses `exp_m1` so small |c| keeps full precision.
pub fn one_minus_exp_over_moment(mu: f64, c: f64) -> f64 {
    if c.abs() < 500.0 {
        let den = 1.0 - mu + mu * c.exp();
        if den.is_normal() {
            return -c.exp_m1() / den;
        }
    }
    let log_den = bernoulli_log_moment(mu, c);
    if c > 0.0 {
        // ln(e^c - 1) = c + ln(1 - e^{-c})
        -((c + (-(-c).exp()).ln_1p() - log_den).exp())
    } else {
        ((-c.exp()).ln_1p() - log_den).exp()
    }
}

/// `-[x ln x + (1-x) ln(1-x)]` with the 0·ln 0 := 0 convention.
pub fn bernoulli_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
    -(term(x) + term(1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_fixed_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_symmetry_and_monotonicity() {
        for k in 0..200 {
            let z = -10.0 + 0.1 * k as f64;
            assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
            assert!(sigmoid(z + 0.1) > sigmoid(z));
        }
    }

    #[test]
    fn sigmoid_extreme_arguments() {
        let p = sigmoid(700.0);
        let q = sigmoid(-700.0);
        assert!(p > 0.0 && p <= 1.0);
        assert!((0.0..1.0).contains(&q));
        assert!(q >= 0.0); // must not be NaN
        assert!(!p.is_nan() && !q.is_nan());
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for k in 0..60 {
            let z = -29.0 + k as f64;
            let naive = (1.0 + z.exp()).ln();
            assert!((softplus(z) - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn softplus_large_arguments() {
        assert!((softplus(700.0) - 700.0).abs() < 1e-10);
        assert!(softplus(-700.0) >= 0.0);
        assert!(softplus(-700.0) < 1e-300);
    }

    #[test]
    fn log_sum_exp_handles_spread_and_infinities() {
        let x = log_sum_exp_2(1000.0, 1000.0 + 2f64.ln());
        assert!((x - (1000.0 + 3f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp_2(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(log_sum_exp_2(3.0, f64::NEG_INFINITY), 3.0);
    }

    #[test]
    fn streaming_log_sum_exp_matches_two_pass() {
        let xs = [-700.0, -1.5, 0.25, 3.0, -100.0, 2.9];
        let mut s = StreamingLogSumExp::new();
        for &x in &xs {
            s.push(x);
        }
        let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let two_pass = m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        assert!((s.value() - two_pass).abs() < 1e-13);
    }

    #[test]
    fn bernoulli_log_moment_degenerate_means() {
        assert_eq!(bernoulli_log_moment(0.0, 5.0), 0.0);
        assert!((bernoulli_log_moment(1.0, 5.0) - 5.0).abs() < 1e-15);
        let direct = (1.0 - 0.3 + 0.3 * (1.7f64).exp()).ln();
        assert!((bernoulli_log_moment(0.3, 1.7) - direct).abs() < 1e-14);
    }

    #[test]
    fn moment_ratios_match_direct_evaluation() {
        for &(mu, c) in &[(0.3, 1.2), (0.9, -2.0), (0.5, 0.0), (0.01, 4.0)] {
            let den = 1.0 - mu + mu * f64::exp(c);
            assert!((exp_over_moment(mu, c) - c.exp() / den).abs() < 1e-12);
            assert!((one_minus_exp_over_moment(mu, c) - (1.0 - c.exp()) / den).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_ratios_survive_extreme_exponents() {
        // denominator underflows directly; log-space path must hold
        let r = one_minus_exp_over_moment(1.0, -600.0);
        assert!((r.ln() - 600.0).abs() < 1e-9);
        let r = exp_over_moment(0.25, 800.0);
        assert!((r - 4.0).abs() < 1e-9);
        let r = one_minus_exp_over_moment(0.25, 800.0);
        assert!((r + 4.0).abs() < 1e-9);
    }

    #[test]
    fn entropy_convention() {
        assert_eq!(bernoulli_entropy(0.0), 0.0);
        assert_eq!(bernoulli_entropy(1.0), 0.0);
        assert!((bernoulli_entropy(0.5) - 2f64.ln()).abs() < 1e-15);
    }
}
