//! Difference operators, Besov-type seminorms on grid functions, mollified
//! empirical densities and Gaussian kernel difference norms.

mod diff;
mod gauss;
mod grid;
mod kde;

pub use diff::{
    besov_seminorm, delta_m_at, delta_m_fn, delta_m_grid, difference_coefficients, dyadic_h_set,
    lizorkin_maximal, triebel_lizorkin_seminorm,
};
pub use gauss::{fit_envelope_constant, gaussian_difference_l1};
pub use grid::{GridDomain, GridFunction};
pub use kde::{mollified_density, mollify_grid};

use crate::error::Result;
use crate::numerics::ensure;
use std::sync::Arc;

/// Test function handle used by Monte Carlo difference estimators.
pub type PhiFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A difference-order / displacement-set / test-function bundle.
#[derive(Clone)]
pub struct DifferenceProbe {
    /// Difference order, at least 1.
    pub m: usize,
    /// Displacements, all with |h| <= 1.
    pub h_set: Vec<Vec<f64>>,
    pub phi: Arc<PhiFn>,
    /// Declared Hoelder exponent of `phi`, in (0, 1).
    pub alpha: f64,
    /// Certified bound for the Hoelder norm of `phi`.
    pub phi_norm_bound: f64,
}

impl DifferenceProbe {
    pub fn new(
        m: usize,
        h_set: Vec<Vec<f64>>,
        phi: Arc<PhiFn>,
        alpha: f64,
        phi_norm_bound: f64,
    ) -> Result<Self> {
        ensure(m >= 1, || "difference order m must be at least 1".into())?;
        ensure(alpha > 0.0 && alpha < 1.0, || {
            format!("alpha must lie in (0, 1), got {alpha}")
        })?;
        ensure(phi_norm_bound > 0.0 && phi_norm_bound.is_finite(), || {
            "phi_norm_bound must be positive".into()
        })?;
        for h in &h_set {
            let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            ensure(norm <= 1.0, || {
                format!("displacements must satisfy |h| <= 1, got {norm}")
            })?;
        }
        Ok(DifferenceProbe {
            m,
            h_set,
            phi,
            alpha,
            phi_norm_bound,
        })
    }
}
