//! Auxiliary processes coupled to a checkpointed ensemble.
//!
//! Every construction reuses the retained tail noise of the original paths,
//! so the pair `(X_t, Y_t)` is driven by identical increments. The endpoint
//! recursions mirror the Euler update op-for-op; with constant coefficients
//! the coupled endpoints agree bitwise.
//!
//! Kinds:
//! - `Frozen`: diffusion frozen at the checkpoint state, no drift;
//! - `DriftFrozen`: additionally carries the frozen drift;
//! - `Taylor`: drift expanded to first order in the driving noise, which
//!   brings in the integrated-noise correction with the supplied Jacobian;
//! - `HypoTaylor`: the two-block variant for one noisy component feeding a
//!   noiseless one through the drift;
//! - `LevyFrozen`: the frozen construction under a stable driver.

use crate::error::{Error, Result};
use crate::models::{Driver, ModelSpec, PathEnsemble};
use crate::numerics::Matrix;
use std::sync::Arc;

/// Jacobian of the drift at a state: writes a row-major `d x d` block.
pub type JacobianFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
/// Scalar field of the state (directional drift derivatives).
pub type ScalarFieldFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Which auxiliary process to build, with the derivative handles the
/// higher-order kinds need. Derivatives are user-supplied, never finite-
/// differenced, so measured rates are not polluted by differencing error.
#[derive(Clone)]
pub enum AuxKind {
    Frozen,
    DriftFrozen,
    Taylor {
        drift_jacobian: Arc<JacobianFn>,
    },
    HypoTaylor {
        db1_dx1: Arc<ScalarFieldFn>,
        db2_dx1: Arc<ScalarFieldFn>,
    },
    LevyFrozen,
}

impl std::fmt::Debug for AuxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl AuxKind {
    pub fn tag(&self) -> &'static str {
        match self {
            AuxKind::Frozen => "frozen",
            AuxKind::DriftFrozen => "drift_frozen",
            AuxKind::Taylor { .. } => "taylor",
            AuxKind::HypoTaylor { .. } => "hypo_taylor",
            AuxKind::LevyFrozen => "levy_frozen",
        }
    }
}

/// Per-path pairs `(X_t, Y_t)` driven by shared noise.
#[derive(Debug)]
pub struct CoupledEnsemble {
    pub x_end: Matrix,
    pub y_end: Matrix,
    pub checkpoint: Matrix,
    pub epsilon: f64,
    pub t: f64,
    pub aux: AuxKind,
    /// Stability index when the driver is stable; moments of order >= alpha
    /// do not exist and are rejected downstream.
    pub stable_alpha: Option<f64>,
}

impl CoupledEnsemble {
    pub fn n_paths(&self) -> usize {
        self.x_end.rows()
    }

    pub fn dim(&self) -> usize {
        self.x_end.cols()
    }
}

/// Builds the coupled auxiliary endpoints from a checkpointed ensemble.
pub fn build_coupled(
    ensemble: &PathEnsemble,
    model: &ModelSpec,
    aux: &AuxKind,
) -> Result<CoupledEnsemble> {
    let checkpoints = ensemble
        .checkpoints
        .as_ref()
        .ok_or_else(|| Error::State("ensemble has no checkpoints".into()))?;
    let noise = ensemble
        .retained_noise
        .as_ref()
        .ok_or_else(|| Error::State("ensemble has no retained noise".into()))?;
    let coeffs = ensemble
        .checkpoint_coeffs
        .as_ref()
        .ok_or_else(|| Error::State("ensemble has no checkpoint coefficients".into()))?;

    let d = ensemble.dim();
    let dp = noise.dim_noise;
    if model.dim() != d || model.coefficients.dim_noise != dp {
        return Err(Error::Parameter(
            "model dimensions do not match the ensemble".into(),
        ));
    }
    let stable = matches!(ensemble.driver, Driver::Stable(_));
    match aux {
        AuxKind::LevyFrozen if !stable => {
            return Err(Error::Parameter(
                "levy_frozen auxiliary requires a stable driver".into(),
            ))
        }
        AuxKind::Frozen
        | AuxKind::DriftFrozen
        | AuxKind::Taylor { .. }
        | AuxKind::HypoTaylor { .. }
            if stable =>
        {
            return Err(Error::Parameter(
                "Brownian auxiliary kinds require a Brownian driver; use levy_frozen".into(),
            ))
        }
        _ => {}
    }
    if let AuxKind::Taylor { .. } = aux {
        if d != dp {
            return Err(Error::Parameter(
                "taylor auxiliary requires dim_noise == dim_state".into(),
            ));
        }
    }
    if let AuxKind::HypoTaylor { .. } = aux {
        if d != 2 || dp != 1 {
            return Err(Error::Parameter(
                "hypo_taylor applies to the two-block system: two states, one noise".into(),
            ));
        }
    }

    let n = ensemble.n_paths();
    let n_tail = noise.n_tail;
    // Per-step widths rebuilt with the exact float expressions of the
    // simulation grid, so constant-coefficient couplings agree bitwise for
    // any terminal time, not just dyadic ones.
    let head = ensemble.t - ensemble.epsilon;
    let grid_time =
        |k: usize| head + ensemble.epsilon * k as f64 / n_tail as f64;
    let dts: Vec<f64> = (0..n_tail)
        .map(|k| grid_time(k + 1) - grid_time(k))
        .collect();
    let mut y_end = Matrix::zeros(n, d);

    let mut jbuf = vec![0.0; d * d];
    for i in 0..n {
        let ck = checkpoints.row(i);
        let inc = noise.increments.row(i);
        let b_ck = coeffs.drift.row(i);
        let s_ck = coeffs.diffusion.row(i);
        let y = y_end.row_mut(i);
        y.copy_from_slice(ck);

        match aux {
            AuxKind::Frozen | AuxKind::LevyFrozen => {
                for k in 0..n_tail {
                    let dz = &inc[k * dp..(k + 1) * dp];
                    for j in 0..d {
                        // zero drift term kept so the op sequence matches
                        // the Euler update exactly
                        let mut x = y[j] + 0.0 * dts[k];
                        for l in 0..dp {
                            x += s_ck[j * dp + l] * dz[l];
                        }
                        y[j] = x;
                    }
                }
            }
            AuxKind::DriftFrozen => {
                for k in 0..n_tail {
                    let dz = &inc[k * dp..(k + 1) * dp];
                    for j in 0..d {
                        let mut x = y[j] + b_ck[j] * dts[k];
                        for l in 0..dp {
                            x += s_ck[j * dp + l] * dz[l];
                        }
                        y[j] = x;
                    }
                }
            }
            AuxKind::Taylor { drift_jacobian } => {
                drift_jacobian(ck, &mut jbuf);
                // Left-point rule for the integrated-noise correction: at
                // step k the drift sees the noise accumulated strictly
                // before, which keeps the expansion adapted.
                let mut btilde = vec![0.0; dp];
                for k in 0..n_tail {
                    let dz = &inc[k * dp..(k + 1) * dp];
                    for j in 0..d {
                        let mut a = b_ck[j];
                        for l in 0..d {
                            a += jbuf[j * d + l] * btilde[l];
                        }
                        let mut x = y[j] + a * dts[k];
                        for l in 0..dp {
                            x += s_ck[j * dp + l] * dz[l];
                        }
                        y[j] = x;
                    }
                    for l in 0..dp {
                        btilde[l] += dz[l];
                    }
                }
            }
            AuxKind::HypoTaylor { db1_dx1, db2_dx1 } => {
                let j11 = db1_dx1(ck);
                let j21 = db2_dx1(ck);
                let mut btilde = 0.0;
                for (k, &dz) in inc.iter().take(n_tail).enumerate() {
                    let a1 = b_ck[0] + j11 * btilde;
                    let a2 = b_ck[1] + j21 * (y[0] - ck[0]);
                    y[0] = y[0] + a1 * dts[k] + s_ck[0] * dz;
                    y[1] += a2 * dts[k];
                    btilde += dz;
                }
            }
        }
    }

    Ok(CoupledEnsemble {
        x_end: ensemble.endpoints.clone(),
        y_end,
        checkpoint: checkpoints.clone(),
        epsilon: ensemble.epsilon,
        t: ensemble.t,
        aux: aux.clone(),
        stable_alpha: ensemble.driver.stable_alpha(),
    })
}

/// Exact covariance of the pair (noise increment, integrated noise) over a
/// window of length `epsilon`, pushed through the first-order drift
/// expansion with coefficient `b1_deriv`.
///
/// At `b1_deriv = 0` this is the raw covariance of `(B_eps, int_0^eps B_s ds)`:
/// `[[eps, eps^2/2], [eps^2/2, eps^3/3]]`. The (1,1) entry at general
/// `b1_deriv` is the conditional variance
/// `eps + b' eps^2 + b'^2 eps^3 / 3` of the Taylor auxiliary endpoint.
pub fn hypo_conditional_covariance(epsilon: f64, b1_deriv: f64) -> Result<[[f64; 2]; 2]> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let e = epsilon;
    let b = b1_deriv;
    let c11 = e + b * e * e + b * b * e * e * e / 3.0;
    let c12 = e * e / 2.0 + b * e * e * e / 3.0;
    let c22 = e * e * e / 3.0;
    Ok([[c11, c12], [c12, c22]])
}
