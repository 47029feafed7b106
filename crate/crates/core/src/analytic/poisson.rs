//! Poisson weights and truncated series over them.
//!
//! All sums are accumulated from positive terms. Upper tails are summed
//! directly unless they are known to be large, so probabilities of order
//! `1e-19` keep full relative precision.

use serde::{Deserialize, Serialize};

/// Truncation policy for the infinite Poisson series.
///
/// A series stops once it is past the mode and the geometric bound on the
/// remaining Poisson mass, times the largest factor attached to a term, is at
/// most `epsilon` relative to the running sum, or when the index reaches the
/// hard cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonTruncation {
    pub epsilon: f64,
    /// Absolute bound on the summation index. `None` uses
    /// `ceil(alpha + 40 * sqrt(alpha + 1) + 60)` for each rate.
    pub hard_cap: Option<usize>,
}

impl Default for PoissonTruncation {
    fn default() -> Self {
        PoissonTruncation {
            epsilon: 1e-16,
            hard_cap: None,
        }
    }
}

impl PoissonTruncation {
    pub fn with_epsilon(epsilon: f64) -> Self {
        PoissonTruncation {
            epsilon,
            ..Self::default()
        }
    }

    /// Highest summation index for rate `alpha`; never below `min_len`.
    pub fn cap_for(&self, alpha: f64, min_len: usize) -> usize {
        let cap = self
            .hard_cap
            .unwrap_or_else(|| (alpha + 40.0 * (alpha + 1.0).sqrt() + 60.0).ceil() as usize);
        cap.max(min_len)
    }

    pub fn is_valid(&self) -> bool {
        self.epsilon > 0.0 && self.epsilon.is_finite() && self.hard_cap.is_none_or(|c| c >= 1)
    }
}

/// `ln(m!)`; exact summation for small `m`, Stirling series beyond.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 16 {
        return (2..=m).map(|k| (k as f64).ln()).sum();
    }
    let x = m as f64;
    (x + 0.5) * x.ln() - x + HALF_LN_TWO_PI + stirling_error(m)
}

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// `ln(m!) - ((m + 1/2) ln m - m + ln sqrt(2 pi))`.
fn stirling_error(m: u64) -> f64 {
    let x = m as f64;
    if m < 16 {
        let direct: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
        return direct - ((x + 0.5) * x.ln() - x + HALF_LN_TWO_PI);
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))))
}

/// Deviance term `x ln(x / mu) + mu - x`, accurate when `x` is close to `mu`.
fn deviance(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let v = (x - mu) / (x + mu);
        let mut sum = (x - mu) * v;
        let mut term = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1;
        loop {
            term *= v2;
            let next = sum + term / (2 * j + 1) as f64;
            if next == sum {
                return sum;
            }
            sum = next;
            j += 1;
        }
    }
    x * (x / mu).ln() + mu - x
}

/// `alpha^m e^{-alpha} / m!` via the saddle-point form
/// `exp(-stirling_error(m) - deviance(m, alpha)) / sqrt(2 pi m)`, which keeps
/// full relative precision for large rates. `poisson_weight(0, 0) = 1`.
pub fn poisson_weight(alpha: f64, m: u64) -> f64 {
    debug_assert!(alpha >= 0.0);
    if alpha == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if m == 0 {
        return (-alpha).exp();
    }
    let x = m as f64;
    (-stirling_error(m) - deviance(x, alpha)).exp() / (std::f64::consts::TAU * x).sqrt()
}

/// `P(X < below)` for `X ~ Poisson(alpha)`.
pub fn poisson_lower_sum(alpha: f64, below: u64) -> f64 {
    (0..below).map(|m| poisson_weight(alpha, m)).sum()
}

/// `sum_{m >= from} poisson_weight(alpha, m) * factor(m)` for a factor in `[0, 1]`.
pub fn poisson_series_from<F>(alpha: f64, from: u64, trunc: &PoissonTruncation, factor: F) -> f64
where
    F: Fn(u64) -> f64,
{
    if alpha == 0.0 {
        return if from == 0 { factor(0) } else { 0.0 };
    }
    let cap = trunc.cap_for(alpha, from as usize + 1) as u64;
    let mut sum = 0.0;
    let mut m = from;
    loop {
        // evaluated per term: a running product drifts for large alpha
        let weight = poisson_weight(alpha, m);
        sum += weight * factor(m);
        let next = m + 1;
        if next > cap {
            break;
        }
        let ratio = alpha / next as f64;
        if ratio < 1.0 {
            let rest = weight * ratio / (1.0 - ratio);
            if rest <= trunc.epsilon * sum || (sum == 0.0 && rest == 0.0) {
                break;
            }
        }
        m = next;
    }
    sum
}

/// `P(X >= from)` for `X ~ Poisson(alpha)`.
pub fn poisson_upper_tail(alpha: f64, from: u64, trunc: &PoissonTruncation) -> f64 {
    if from == 0 {
        return 1.0;
    }
    if alpha == 0.0 {
        return 0.0;
    }
    if (from as f64) <= alpha {
        // the tail holds at least about half the mass here
        (1.0 - poisson_lower_sum(alpha, from)).max(0.0)
    } else {
        poisson_series_from(alpha, from, trunc, |_| 1.0)
    }
}

/// `C(r, k) p^k (1 - p)^(r - k)`.
pub fn binomial_pmf(r: usize, k: usize, p: f64) -> f64 {
    if k > r {
        return 0.0;
    }
    let mut coeff = 1.0;
    for j in 0..k {
        coeff *= (r - j) as f64 / (j + 1) as f64;
    }
    coeff * p.powi(k as i32) * (1.0 - p).powi((r - k) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_matches_pmf() {
        assert!((poisson_weight(1.0, 0) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(poisson_weight(0.0, 0), 1.0);
        assert_eq!(poisson_weight(0.0, 3), 0.0);
        assert!((poisson_weight(2.0, 2) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn weight_approximates_binomial_occupancy() {
        // (M n choose m) (1/n)^m (1 - 1/n)^(M n - m) for M = 2, n = 10^6
        let n = 1e6f64;
        let trials = 2.0 * n;
        let m = 2.0;
        let ln_choose = (trials.ln() + (trials - 1.0).ln()) - 2f64.ln();
        let binom = (ln_choose - m * n.ln() + (trials - m) * (-1.0 / n).ln_1p()).exp();
        let pois = poisson_weight(2.0, 2);
        assert!((binom - pois).abs() / pois < 1e-5, "{binom} vs {pois}");
    }

    #[test]
    fn large_rate_does_not_underflow_at_mode() {
        let w = poisson_weight(900.0, 900);
        assert!(w > 0.0 && w < 0.02);
        let total = poisson_series_from(900.0, 0, &PoissonTruncation::default(), |_| 1.0);
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn tails_partition_unit_mass() {
        let t = PoissonTruncation::default();
        for &alpha in &[0.01, 0.5, 1.0, 2.0, 5.0, 20.0, 200.0] {
            for from in 0..8 {
                let s = poisson_lower_sum(alpha, from) + poisson_upper_tail(alpha, from, &t);
                assert!((s - 1.0).abs() < 1e-13, "alpha={alpha} from={from}: {s}");
            }
        }
    }

    #[test]
    fn tiny_tail_keeps_relative_precision() {
        // P(X >= 3) for alpha = 1e-4 is alpha^3/6 * (1 - 3 alpha / 4 + ...)
        let alpha: f64 = 1e-4;
        let tail = poisson_upper_tail(alpha, 3, &PoissonTruncation::default());
        let leading = alpha.powi(3) / 6.0 * (-alpha).exp();
        let next = alpha.powi(4) / 24.0 * (-alpha).exp();
        assert!((tail - (leading + next)).abs() / tail < 1e-7);
    }

    #[test]
    fn stirling_branch_is_continuous() {
        let exact: f64 = (2..=40u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(40) - exact).abs() < 1e-12);
        let exact16: f64 = (2..=16u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(16) - exact16).abs() < 1e-13);
    }

    #[test]
    fn binomial_sums_to_one() {
        for r in 0..6 {
            let s: f64 = (0..=r).map(|k| binomial_pmf(r, k, 0.3)).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert_eq!(binomial_pmf(2, 3, 0.5), 0.0);
        assert!((binomial_pmf(2, 1, 0.5) - 0.5).abs() < 1e-16);
    }
}
