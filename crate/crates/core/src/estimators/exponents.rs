//! Exponent bookkeeping: the epsilon schedule balancing the coupling error
//! against the kernel term, predicted regularity exponents, and feasibility
//! arithmetic for rough drifts and stable drivers.
//!
//! Conventions. A method instance is summarized by `(alpha, m, theta, a0,
//! K0, delta)`: the functional obeys
//! `E[D_h^m phi(X_t)] <= K0^(alpha/theta) (eps^((alpha/theta)(1+a0)) + (|h| / eps^(1/theta))^m) ||phi||`,
//! and the schedule picks `eps` from `|h|` and `t`. The free parameters
//! `delta_1, delta_2` derive from the single knob `delta` as
//! `delta_1 = 2 theta a0 delta / (2 + a0)` and
//! `delta_2 = delta_1 / (2 alpha (1 + a0))`.

use crate::error::{Error, Result};
use crate::numerics::ensure;
use serde::{Deserialize, Serialize};

/// The exponent bookkeeping of one method instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    /// Test-function Hoelder exponent, in (0, 1).
    pub alpha: f64,
    /// Difference order.
    pub m: usize,
    /// Kernel time-scaling: 2 for Brownian auxiliaries, the stability index
    /// for stable ones, 2/3 for the two-block hypoelliptic pair.
    pub theta: f64,
    /// Coupling-error gain over the kernel exponent; must be positive for
    /// the method to apply.
    pub a0: f64,
    /// Prefactor bound, at least 1.
    pub k0: f64,
    /// The single slack knob; small and nonnegative.
    pub delta: f64,
    /// Declared coefficient Hoelder exponent, when one exists.
    pub beta: Option<f64>,
}

impl ExponentParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.alpha > 0.0 && self.alpha < 1.0, || {
            format!("alpha must lie in (0, 1), got {}", self.alpha)
        })?;
        ensure(self.m >= 1, || "m must be at least 1".into())?;
        ensure(self.theta > 0.0 && self.theta.is_finite(), || {
            format!("theta must be positive, got {}", self.theta)
        })?;
        if self.a0 <= 0.0 || !self.a0.is_finite() {
            return Err(Error::Parameter(format!(
                "the method needs a0 > 0, got {}",
                self.a0
            )));
        }
        ensure(self.k0 >= 1.0, || {
            format!("K0 must be at least 1, got {}", self.k0)
        })?;
        ensure(self.delta >= 0.0 && self.delta < 0.5, || {
            format!("delta must be small and nonnegative, got {}", self.delta)
        })?;
        Ok(())
    }

    fn delta2(&self) -> f64 {
        let delta1 = 2.0 * self.theta * self.a0 * self.delta / (2.0 + self.a0);
        delta1 / (2.0 * self.alpha * (1.0 + self.a0))
    }
}

/// Converts measured rates into `(theta, a0)`: a coupling error of order
/// `eps^(alpha q)` against a kernel term `(|h| / eps^s)^m` gives
/// `theta = 1/s` and `a0 = q/s - 1`.
pub fn exponents_from_rates(coupling_rate_q: f64, kernel_singularity_s: f64) -> Result<(f64, f64)> {
    ensure(coupling_rate_q > 0.0, || {
        format!("coupling rate must be positive, got {coupling_rate_q}")
    })?;
    ensure(kernel_singularity_s > 0.0, || {
        format!("kernel singularity must be positive, got {kernel_singularity_s}")
    })?;
    Ok((
        1.0 / kernel_singularity_s,
        coupling_rate_q / kernel_singularity_s - 1.0,
    ))
}

/// Balancing choice of the window length.
///
/// Two cases, both capped by `t/2`: when `|h|^(theta (1 - delta_2)) < t` the
/// window is half that power of `|h|`; otherwise it is `t/2`.
pub fn epsilon_schedule(h_norm: f64, t: f64, params: &ExponentParams) -> Result<f64> {
    params.validate()?;
    ensure(h_norm > 0.0 && h_norm <= 1.0, || {
        format!("|h| must lie in (0, 1], got {h_norm}")
    })?;
    ensure(t > 0.0 && t.is_finite(), || {
        format!("t must be positive, got {t}")
    })?;
    let d2 = params.delta2();
    if d2 > 0.5 {
        return Err(Error::Parameter(format!(
            "delta = {} is too large for these exponents (delta_2 = {d2} exceeds 1/2)",
            params.delta
        )));
    }
    let hpow = h_norm.powf(params.theta * (1.0 - d2));
    if hpow < t {
        Ok(0.5 * hpow)
    } else {
        Ok(0.5 * t)
    }
}

/// Predicted regularity and prefactor exponents for one method instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityPrediction {
    /// Exponent of `|h|` in the functional bound:
    /// `alpha m (1 + a0) / (m + alpha (1 + a0))`.
    pub h_exponent: f64,
    /// Supremum of reachable regularity indices (open).
    pub a_max: f64,
    /// Exponent of `(1 and t)` in the density bound at the requested index.
    pub time_exponent: f64,
    /// Exponent of `K0` in the density bound at the requested index.
    pub k0_exponent: f64,
    /// `K0^k0_exponent * (1 and t)^time_exponent`, the bound's shape without
    /// its unknowable constant.
    pub norm_bound_factor: f64,
}

/// Evaluates the predicted exponents at a requested regularity index `a`.
pub fn predicted_regularity(
    params: &ExponentParams,
    a: f64,
    t: f64,
) -> Result<RegularityPrediction> {
    params.validate()?;
    ensure(t > 0.0 && t.is_finite(), || {
        format!("t must be positive, got {t}")
    })?;
    ensure(a > 0.0, || format!("a must be positive, got {a}"))?;
    if a >= params.a0 {
        return Err(Error::Parameter(format!(
            "requested index a = {a} must stay below a0 = {}",
            params.a0
        )));
    }
    let alpha = params.alpha;
    let m = params.m as f64;
    let gain = 1.0 + params.a0;
    let h_exponent = alpha * m * gain / (m + alpha * gain);
    let time_exponent = -(gain / (params.theta * params.a0)) * a - params.delta;
    let k0_exponent = a / (params.theta * params.a0) + params.delta;
    Ok(RegularityPrediction {
        h_exponent,
        a_max: params.a0,
        time_exponent,
        k0_exponent,
        norm_bound_factor: params.k0.powf(k0_exponent) * t.min(1.0).powf(time_exponent),
    })
}

/// Lower bound for the time-singularity exponent with a drift in
/// `L^q(0,T; L^p)`: `(1 - 1/q) / (1 - 2/q - d/p) * gamma`, under the
/// standing hypothesis `2/q + d/p < 1`.
pub fn rough_drift_exponent(p: f64, q: f64, d: usize, gamma: f64) -> Result<f64> {
    ensure(p > 1.0 && q > 1.0, || {
        format!("p and q must exceed 1, got p = {p}, q = {q}")
    })?;
    ensure(gamma >= 0.0, || {
        format!("gamma must be nonnegative, got {gamma}")
    })?;
    let deficit = 1.0 - 2.0 / q - d as f64 / p;
    if deficit <= 0.0 {
        return Err(Error::Infeasible(format!(
            "2/q + d/p = {} must stay below 1",
            2.0 / q + d as f64 / p
        )));
    }
    Ok((1.0 - 1.0 / q) / deficit * gamma)
}

/// Feasibility verdict for the stable-driver rough-drift regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyFeasibility {
    /// The binding coupling exponent at the admissible window's lower edge.
    pub kappa: f64,
    /// Open interval of admissible singularity exponents `e`, when any.
    pub e_window: Option<(f64, f64)>,
    pub feasible: bool,
}

/// Admissible window of the time-singularity exponent `e` for a stable
/// driver of index `alpha > 1`, drift in `L^q(L^p)` and diffusion of
/// Hoelder exponent `beta` (`None` for constant diffusion).
///
/// `kappa(e) = min(1/q', (1+beta)/alpha, 1/alpha + beta/q' - beta e / 2)`
/// couples to `e` through its last term; the window is resolved by
/// bisection with `kappa` recomputed per candidate, with the constant-kappa
/// closed form `(kappa d / (p (alpha kappa - 1) - d), 1/q')` as a fast path.
pub fn levy_feasibility(
    alpha: f64,
    beta: Option<f64>,
    p: f64,
    q: f64,
    d: usize,
) -> Result<LevyFeasibility> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Parameter(format!(
            "stability index must lie in (1, 2), got {alpha}"
        )));
    }
    if let Some(b) = beta {
        ensure(b > 0.0 && b < 1.0, || {
            format!("beta must lie in (0, 1), got {b}")
        })?;
    }
    ensure(p > 1.0 && q > 1.0, || {
        format!("p and q must exceed 1, got p = {p}, q = {q}")
    })?;
    let qp = q / (q - 1.0);
    let e_max = 1.0 / qp;
    let dd = d as f64;

    let kappa_at = |e: f64| -> f64 {
        match beta {
            None => e_max,
            Some(b) => e_max
                .min((1.0 + b) / alpha)
                .min(1.0 / alpha + b / qp - 0.5 * b * e),
        }
    };
    let lower_bound = |kappa: f64| -> Option<f64> {
        let denom = p * (alpha * kappa - 1.0) - dd;
        if alpha * kappa > 1.0 && dd / p < alpha * kappa - 1.0 && denom > 0.0 {
            Some(kappa * dd / denom)
        } else {
            None
        }
    };
    let ok = |e: f64| -> bool {
        let k = kappa_at(e);
        match lower_bound(k) {
            Some(lo) => e > lo,
            None => false,
        }
    };

    // Constant diffusion: kappa = 1/q' with no e-dependence, and the
    // e-conditions drop (no diffusion increments, hence no second-moment
    // bound needing e q' < 1). Feasibility reduces to d/p < alpha kappa - 1,
    // i.e. d/p + alpha/q < alpha - 1. The window, when nonempty, is the
    // range over which the general bookkeeping closes as well.
    if beta.is_none() {
        let kappa = e_max;
        let feasible = alpha * kappa > 1.0 && dd / p < alpha * kappa - 1.0;
        let e_window = match lower_bound(kappa) {
            Some(lo) if lo < e_max => Some((lo, e_max)),
            _ => None,
        };
        return Ok(LevyFeasibility {
            kappa,
            e_window,
            feasible,
        });
    }

    // Fast path: kappa does not vary over (0, e_max).
    let kappa_const = (kappa_at(0.0) - kappa_at(e_max)).abs() < 1e-15;
    if kappa_const {
        let kappa = kappa_at(0.0);
        return Ok(match lower_bound(kappa) {
            Some(lo) if lo < e_max => LevyFeasibility {
                kappa,
                e_window: Some((lo, e_max)),
                feasible: true,
            },
            _ => LevyFeasibility {
                kappa,
                e_window: None,
                feasible: false,
            },
        });
    }

    // Generic path: scan for a feasible candidate, then bisect both edges.
    const SCAN: usize = 4096;
    let mut first_ok = None;
    let mut last_ok = None;
    for i in 1..SCAN {
        let e = e_max * i as f64 / SCAN as f64;
        if ok(e) {
            if first_ok.is_none() {
                first_ok = Some(e);
            }
            last_ok = Some(e);
        }
    }
    let (Some(first), Some(last)) = (first_ok, last_ok) else {
        return Ok(LevyFeasibility {
            kappa: kappa_at(e_max),
            e_window: None,
            feasible: false,
        });
    };
    let bisect = |mut bad: f64, mut good: f64| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (bad + good);
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let lo = bisect(0.0, first);
    // the upper edge is e_max itself unless feasibility dies earlier
    let hi = if ok(e_max * (1.0 - 1e-12)) {
        e_max
    } else {
        bisect(e_max, last)
    };
    Ok(LevyFeasibility {
        kappa: kappa_at(lo),
        e_window: Some((lo, hi)),
        feasible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, m: usize, theta: f64, a0: f64, delta: f64) -> ExponentParams {
        ExponentParams {
            alpha,
            m,
            theta,
            a0,
            k0: 1.0,
            delta,
            beta: None,
        }
    }

    #[test]
    fn schedule_case_one_hand_value() {
        // theta = 2, delta = 0, h = 0.1, t = 1: eps = 0.5 * 0.01
        let p = params(0.5, 2, 2.0, 0.5, 0.0);
        let eps = epsilon_schedule(0.1, 1.0, &p).unwrap();
        assert!((eps - 0.005).abs() < 1e-15);
    }

    #[test]
    fn schedule_case_two_small_t() {
        let p = params(0.5, 2, 2.0, 0.5, 0.01);
        let eps = epsilon_schedule(0.1, 1e-6, &p).unwrap();
        assert_eq!(eps, 5e-7);
    }

    #[test]
    fn schedule_never_exceeds_half_t() {
        let mut stream = crate::drivers::make_stream(crate::drivers::SeedSpec::new(900, 0));
        let mut checked = 0usize;
        for _ in 0..2000 {
            let p = params(
                0.05 + 0.9 * stream.next_open01(),
                1 + (stream.next_u64() % 4) as usize,
                0.2 + 3.0 * stream.next_open01(),
                0.05 + 2.0 * stream.next_open01(),
                0.1 * stream.next_open01(),
            );
            let h = stream.next_open01();
            let t = 4.0 * stream.next_open01() + 1e-9;
            match epsilon_schedule(h, t, &p) {
                Ok(eps) => {
                    assert!(eps <= t / 2.0 + 1e-18);
                    assert!(eps < 1.0);
                    assert!(eps > 0.0);
                    checked += 1;
                }
                // oversize delta for these exponents is a legal rejection
                Err(Error::Parameter(_)) => {}
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert!(checked > 1000, "only {checked} admissible draws");
    }

    #[test]
    fn schedule_rejects_nonpositive_a0() {
        let mut p = params(0.5, 2, 2.0, 0.5, 0.0);
        p.a0 = 0.0;
        assert!(epsilon_schedule(0.1, 1.0, &p).is_err());
        p.a0 = -0.2;
        assert!(epsilon_schedule(0.1, 1.0, &p).is_err());
    }

    #[test]
    fn prediction_rejects_a_at_or_above_a0() {
        let p = params(0.5, 2, 2.0, 0.5, 0.01);
        assert!(predicted_regularity(&p, 0.5, 1.0).is_err());
        assert!(predicted_regularity(&p, 0.7, 1.0).is_err());
        assert!(predicted_regularity(&p, 0.4, 1.0).is_ok());
    }

    #[test]
    fn h_exponent_limit_is_one_plus_a0() {
        let p = ExponentParams {
            alpha: 1.0 - 1e-9,
            m: 1_000_000,
            theta: 2.0,
            a0: 0.5,
            k0: 1.0,
            delta: 0.0,
            beta: Some(0.5),
        };
        let r = predicted_regularity(&p, 0.25, 1.0).unwrap();
        assert!((r.h_exponent - 1.5).abs() < 1e-5);
    }

    #[test]
    fn hypoelliptic_rates_give_a0_beta_over_three() {
        // coupling eps^(alpha (3+beta)/2), kernel (|h|/eps^{3/2})^m
        let beta = 0.3;
        let (theta, a0) = exponents_from_rates((3.0 + beta) / 2.0, 1.5).unwrap();
        assert!((theta - 2.0 / 3.0).abs() < 1e-15);
        assert!((a0 - beta / 3.0).abs() < 1e-15);
    }

    #[test]
    fn brownian_rates_give_a0_beta() {
        let beta = 0.5;
        let (theta, a0) = exponents_from_rates((1.0 + beta) / 2.0, 0.5).unwrap();
        assert_eq!(theta, 2.0);
        assert!((a0 - beta).abs() < 1e-15);
    }

    #[test]
    fn h_exponent_specializes_symbol_for_symbol() {
        // at theta = 2 and a0 = beta the |h| exponent must read
        // alpha m (1+beta) / (m + alpha (1+beta)) literally
        for &beta in &[0.2, 0.5, 0.8] {
            for &alpha in &[0.3, 0.6, 0.9] {
                for m in 1..=4usize {
                    let p = params(alpha, m, 2.0, beta, 0.0);
                    let r = predicted_regularity(&p, beta / 2.0, 1.0).unwrap();
                    let expect =
                        alpha * m as f64 * (1.0 + beta) / (m as f64 + alpha * (1.0 + beta));
                    assert!((r.h_exponent - expect).abs() < 1e-15);
                    assert_eq!(r.a_max, beta);
                }
            }
        }
    }

    #[test]
    fn rough_drift_hand_value() {
        let e = rough_drift_exponent(2.0, 8.0, 1, 0.1).unwrap();
        assert!((e - 0.35).abs() < 1e-15);
        assert_eq!(rough_drift_exponent(4.0, 16.0, 2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rough_drift_infeasible_when_exponents_too_small() {
        // q = 2 makes 2/q = 1 already critical
        assert!(rough_drift_exponent(4.0, 2.0, 2, 0.1).is_err());
    }

    #[test]
    fn levy_constant_sigma_example() {
        let f = levy_feasibility(1.5, None, 10.0, 20.0, 1).unwrap();
        assert!(f.feasible);
        assert!((f.kappa - 0.95).abs() < 1e-15);
        let (lo, hi) = f.e_window.unwrap();
        assert!((lo - 19.0 / 65.0).abs() < 1e-14);
        assert!((hi - 0.95).abs() < 1e-15);
    }

    #[test]
    fn levy_constant_sigma_feasible_even_with_empty_general_window() {
        // d/p + alpha/q = 1/3 + 0.075 < 0.5 makes the constant-sigma
        // conditions hold, while the general e-window (needing
        // 2d/p + alpha/q < alpha - 1) is empty.
        let f = levy_feasibility(1.5, None, 3.0, 20.0, 1).unwrap();
        assert!(f.feasible);
        assert!(f.e_window.is_none());
        assert!((f.kappa - 0.95).abs() < 1e-15);
        // and a genuinely infeasible constant-sigma case
        let f = levy_feasibility(1.2, None, 4.0, 8.0, 2).unwrap();
        assert!(!f.feasible); // d/p + alpha/q = 0.65 > alpha - 1 = 0.2
    }

    #[test]
    fn levy_infeasible_when_alpha_kappa_below_one() {
        let f = levy_feasibility(1.01, Some(0.01), 2.0, 2.0, 3).unwrap();
        assert!(!f.feasible);
        assert!(f.e_window.is_none());
    }

    #[test]
    fn levy_rejects_alpha_at_most_one() {
        assert!(levy_feasibility(1.0, Some(0.5), 4.0, 4.0, 1).is_err());
        assert!(levy_feasibility(0.8, Some(0.5), 4.0, 4.0, 1).is_err());
    }

    #[test]
    fn levy_bisection_agrees_with_closed_form_when_kappa_constant_on_window() {
        // kappa varies near e_max here, but the binding edge still sits in
        // the constant region; bisection must match the closed form.
        let f = levy_feasibility(1.9, Some(0.9), 60.0, 50.0, 1).unwrap();
        assert!(f.feasible);
        let (lo, hi) = f.e_window.unwrap();
        let qp: f64 = 50.0 / 49.0;
        let kappa = 1.0 / qp;
        let expect_lo = kappa / (60.0 * (1.9 * kappa - 1.0) - 1.0);
        assert!((lo - expect_lo).abs() < 1e-12, "lo {lo} vs {expect_lo}");
        assert!((hi - 0.98).abs() < 1e-12, "hi {hi}");
    }
}
