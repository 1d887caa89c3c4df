//! Poisson probabilities and the capacity-utilization ratio `g(s, b)`.
//!
//! Everything is evaluated in log space through `lgamma`, so capacities in
//! the thousands do not overflow.

use crate::error::{Error, Result};

/// Tolerance above 1 at which an LP objective is still accepted as `s <= 1`.
pub const S_UPPER_SLACK: f64 = 1e-9;
/// Objective values at or below this are treated as degenerate (policy undefined).
pub const S_DEGENERATE: f64 = 1e-12;

/// Arguments of `g`: the LP value `s` in `(0, 1]` and an integer capacity `b >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GArgs {
    s: f64,
    b: u32,
}

impl GArgs {
    pub fn new(s: f64, b: u32) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("g requires 0 < s <= 1, got s = {s}")));
        }
        if b == 0 {
            return Err(Error::Domain("g requires b >= 1".into()));
        }
        Ok(Self { s, b })
    }

    /// Builds arguments from a solved LP value, absorbing round-off above 1.
    ///
    /// Values above `1 + 1e-9` mean the LP solve went wrong; values at or
    /// below `1e-12` leave the ratio undefined. Both are reported as errors.
    pub fn from_lp_value(s_star: f64, b: u32) -> Result<Self> {
        if s_star > 1.0 + S_UPPER_SLACK {
            return Err(Error::Domain(format!(
                "LP value {s_star} exceeds 1; the solve is inconsistent"
            )));
        }
        if s_star <= S_DEGENERATE {
            return Err(Error::Domain(format!(
                "LP value {s_star} is degenerate (<= {S_DEGENERATE})"
            )));
        }
        Self::new(s_star.min(1.0), b)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn b(&self) -> u32 {
        self.b
    }
}

fn ln_factorial(k: u64) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `P[Pois(mean) = k]`.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    debug_assert!(mean >= 0.0);
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let log_p = -mean + k as f64 * mean.ln() - ln_factorial(k);
    log_p.exp()
}

/// `P[Pois(mean) < k]`.
pub fn poisson_cdf_below(mean: f64, k: u64) -> f64 {
    (0..k).map(|i| poisson_pmf(mean, i)).sum::<f64>().min(1.0)
}

/// `E[min(Pois(mean), cap)]`, through the finite identity
/// `cap - sum_{k < cap} (cap - k) P[Pois(mean) = k]`.
pub fn truncated_poisson_mean(mean: f64, cap: u32) -> f64 {
    debug_assert!(cap >= 1);
    let cap_f = f64::from(cap);
    let deficit: f64 = (0..u64::from(cap))
        .map(|k| (cap_f - k as f64) * poisson_pmf(mean, k))
        .sum();
    (cap_f - deficit).clamp(0.0, cap_f)
}

/// `g(s, b) = E[min(Pois(b/s), b)] / b`.
pub fn g(args: GArgs) -> f64 {
    let b = f64::from(args.b);
    truncated_poisson_mean(b / args.s, args.b) / b
}

/// Closed form of `g(1, b) = 1 - e^{-b} b^b / b!`.
pub fn g_closed_form_s1(b: u32) -> f64 {
    assert!(b >= 1, "g_closed_form_s1 requires b >= 1");
    let b_f = f64::from(b);
    1.0 - (b_f * b_f.ln() - b_f - ln_factorial(u64::from(b))).exp()
}

/// Lower bound `max(1 - 1/e, 1 - 1/sqrt(2 pi b))` on `g(1, b)`.
pub fn g_s1_floor(b: u32) -> f64 {
    let stirling = 1.0 - 1.0 / (2.0 * std::f64::consts::PI * f64::from(b)).sqrt();
    (1.0 - (-1.0f64).exp()).max(stirling)
}

/// Lower-tail bound `1 - exp(-(b/s)(1 - s)^2 / 2)` on `g(s, b)`.
pub fn g_tail_floor(args: GArgs) -> f64 {
    let s = args.s;
    let mean = f64::from(args.b) / s;
    1.0 - (-mean * (1.0 - s).powi(2) / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::ToPrimitive;

    const INV_E: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn pmf_trivial_values() {
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
        assert!((poisson_pmf(1.0, 0) - INV_E).abs() < 1e-15);
    }

    #[test]
    fn pmf_matches_exact_rational_evaluation() {
        // 20^20 / 20! evaluated exactly, then scaled by e^{-20}.
        let num = BigInt::from(20).pow(20u32);
        let den: BigInt = (1..=20u32).map(BigInt::from).product();
        let ratio = BigRational::new(num, den).to_f64().unwrap();
        let exact = ratio * (-20.0f64).exp();
        let got = poisson_pmf(20.0, 20);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn truncated_mean_examples() {
        assert!((truncated_poisson_mean(1.0, 1) - (1.0 - INV_E)).abs() < 1e-15);
        assert_eq!(truncated_poisson_mean(0.0, 5), 0.0);

        // Direct series sum_{k <= 200} min(k, 4) pmf(k), pmf built by recurrence.
        let mean = 3.7f64;
        let mut pmf = (-mean).exp();
        let mut oracle = 0.0;
        for k in 0..=200u32 {
            oracle += f64::from(k.min(4)) * pmf;
            pmf *= mean / f64::from(k + 1);
        }
        assert!((truncated_poisson_mean(mean, 4) - oracle).abs() < 1e-12);
    }

    #[test]
    fn g_examples() {
        let g11 = g(GArgs::new(1.0, 1).unwrap());
        assert!((g11 - (1.0 - INV_E)).abs() < 1e-12);
        let g12 = g(GArgs::new(1.0, 2).unwrap());
        assert!((g12 - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-12);
        assert!(g(GArgs::new(0.01, 5).unwrap()) >= 0.999);
    }

    #[test]
    fn closed_form_examples() {
        assert!((g_closed_form_s1(1) - (1.0 - INV_E)).abs() < 1e-12);
        assert!((g_closed_form_s1(2) - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-12);
        assert!(g_closed_form_s1(100) >= 1.0 - 1.0 / (200.0 * std::f64::consts::PI).sqrt());
    }

    #[test]
    fn large_capacity_stays_finite() {
        let v = g(GArgs::new(1.0, 1822).unwrap());
        assert!(v.is_finite() && v > 0.99 && v < 1.0);
        assert!((v - g_closed_form_s1(1822)).abs() < 1e-9);
    }

    #[test]
    fn gargs_rejects_out_of_domain() {
        assert!(GArgs::new(0.0, 1).is_err());
        assert!(GArgs::new(1.1, 1).is_err());
        assert!(GArgs::new(0.5, 0).is_err());
        assert!(GArgs::from_lp_value(1.0 + 1e-10, 3).is_ok());
        assert!(GArgs::from_lp_value(1.0 + 1e-6, 3).is_err());
        assert!(GArgs::from_lp_value(1e-13, 3).is_err());
    }

    #[test]
    fn floors_hold_on_small_grid() {
        for b in 1..=50 {
            let v = g(GArgs::new(1.0, b).unwrap());
            assert!(v >= g_s1_floor(b) - 1e-12);
        }
    }
}
