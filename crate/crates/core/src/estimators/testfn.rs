//! Certified test functions for difference probes.
//!
//! Each family comes with an analytic bound on its Hoelder norm
//! `||phi||_inf + [phi]_alpha`. For a function with `||phi||_inf <= 1` and
//! Lipschitz constant `L`, increments obey
//! `|D_h phi| <= min(2, L |h|)`, so over `|h| <= 1` the seminorm is at most
//! `min(L, 2^(1-alpha) L^alpha)`.

use crate::besov::{DifferenceProbe, PhiFn};
use crate::error::Result;
use crate::numerics::ensure;
use std::sync::Arc;

/// Available analytic test-function families.
#[derive(Clone, Debug)]
pub enum TestFamily {
    /// `cos(<omega, x> + phase)`; phase `-pi/2` gives the odd member, which
    /// matters when the sampled law is symmetric and an even probe would
    /// cancel the leading difference term.
    Cosine { omega: Vec<f64>, phase: f64 },
    /// `min(1, |x - c|^alpha)`: Hoelder seminorm exactly 1 near the kink.
    Kink { center: Vec<f64> },
    /// Smooth bump supported on the ball of the given radius.
    Bump { center: Vec<f64>, radius: f64 },
}

impl TestFamily {
    pub fn cosine(omega: Vec<f64>) -> Self {
        TestFamily::Cosine { omega, phase: 0.0 }
    }

    pub fn sine(omega: Vec<f64>) -> Self {
        TestFamily::Cosine {
            omega,
            phase: -std::f64::consts::FRAC_PI_2,
        }
    }
}

/// A test function with its certified Hoelder-norm bound.
#[derive(Clone)]
pub struct TestFunction {
    pub phi: Arc<PhiFn>,
    pub alpha: f64,
    /// Upper bound for `||phi||_inf + [phi]_alpha`.
    pub norm_bound: f64,
    pub family: &'static str,
}

impl TestFunction {
    /// Bundles the function into a probe with the given difference order
    /// and displacement set.
    pub fn probe(&self, m: usize, h_set: Vec<Vec<f64>>) -> Result<DifferenceProbe> {
        DifferenceProbe::new(m, h_set, self.phi.clone(), self.alpha, self.norm_bound)
    }
}

fn holder_seminorm_from_lipschitz(lip: f64, alpha: f64) -> f64 {
    lip.min(2.0_f64.powf(1.0 - alpha) * lip.powf(alpha))
}

/// Builds a test function from a family, certified at exponent `alpha`.
pub fn make_test_function(family: &TestFamily, alpha: f64) -> Result<TestFunction> {
    ensure(alpha > 0.0 && alpha < 1.0, || {
        format!("alpha must lie in (0, 1), got {alpha}")
    })?;
    match family {
        TestFamily::Cosine { omega, phase } => {
            ensure(!omega.is_empty(), || "omega must be nonempty".into())?;
            let lip = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
            ensure(lip > 0.0, || "omega must be nonzero".into())?;
            let w = omega.clone();
            let ph = *phase;
            let phi: Arc<PhiFn> = Arc::new(move |x: &[f64]| {
                (x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + ph).cos()
            });
            Ok(TestFunction {
                phi,
                alpha,
                norm_bound: 1.0 + holder_seminorm_from_lipschitz(lip, alpha),
                family: "cosine",
            })
        }
        TestFamily::Kink { center } => {
            ensure(!center.is_empty(), || "center must be nonempty".into())?;
            let c = center.clone();
            let a = alpha;
            let phi: Arc<PhiFn> = Arc::new(move |x: &[f64]| {
                let r = x
                    .iter()
                    .zip(&c)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                r.powf(a).min(1.0)
            });
            // | |x|^a - |y|^a | <= |x - y|^a for a in (0, 1]
            Ok(TestFunction {
                phi,
                alpha,
                norm_bound: 2.0,
                family: "kink",
            })
        }
        TestFamily::Bump { center, radius } => {
            ensure(!center.is_empty(), || "center must be nonempty".into())?;
            ensure(*radius > 0.0 && radius.is_finite(), || {
                format!("radius must be positive, got {radius}")
            })?;
            let c = center.clone();
            let r0 = *radius;
            let phi: Arc<PhiFn> = Arc::new(move |x: &[f64]| {
                let r2: f64 = x
                    .iter()
                    .zip(&c)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    / (r0 * r0);
                if r2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                }
            });
            // radial derivative of exp(1 - 1/(1 - u^2)) is bounded by 8/e
            let lip = 8.0 / (std::f64::consts::E * r0);
            Ok(TestFunction {
                phi,
                alpha,
                norm_bound: 1.0 + holder_seminorm_from_lipschitz(lip, alpha),
                family: "bump",
            })
        }
    }
}
