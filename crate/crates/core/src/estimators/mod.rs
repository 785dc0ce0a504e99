//! Monte Carlo estimation of difference functionals, the coupled
//! approximation-error / kernel-term split, scaling-law regression and the
//! exponent calculus.
//!
//! All reductions run through fixed-tree pairwise sums, so estimates are
//! bit-stable for any worker count. Standard errors come from batch means
//! over 32 batches.

mod exponents;
mod scaling;
mod testfn;

pub use exponents::{
    epsilon_schedule, exponents_from_rates, levy_feasibility, predicted_regularity,
    rough_drift_exponent, ExponentParams, LevyFeasibility, RegularityPrediction,
};
pub use scaling::{fit_scaling, read_sweep_csv, write_sweep_csv, ScalingFit};
pub use testfn::{make_test_function, TestFamily, TestFunction};

use crate::auxiliary::CoupledEnsemble;
use crate::besov::{delta_m_fn, DifferenceProbe};
use crate::error::{Error, Result};
use crate::numerics::{ensure, pairwise_mean, Matrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Weight applied inside a difference functional, evaluated at the endpoint.
pub type WeightFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A Monte Carlo value with its batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

const BATCHES: usize = 32;

/// Mean and batch-means stderr of a per-path value vector.
pub fn summarize(values: &[f64]) -> EstimateWithError {
    let n = values.len();
    if n == 0 {
        return EstimateWithError {
            value: 0.0,
            stderr: 0.0,
            n: 0,
        };
    }
    let value = pairwise_mean(values);
    let b = BATCHES.min(n);
    if b < 2 {
        return EstimateWithError {
            value,
            stderr: 0.0,
            n,
        };
    }
    let mut batch_means = Vec::with_capacity(b);
    for k in 0..b {
        let lo = k * n / b;
        let hi = (k + 1) * n / b;
        batch_means.push(pairwise_mean(&values[lo..hi]));
    }
    let mb = pairwise_mean(&batch_means);
    let var = batch_means.iter().map(|m| (m - mb) * (m - mb)).sum::<f64>() / (b - 1) as f64;
    EstimateWithError {
        value,
        stderr: (var / b as f64).sqrt(),
        n,
    }
}

fn probe_values(
    endpoints: &Matrix,
    probe: &DifferenceProbe,
    h: &[f64],
    weight: Option<&WeightFn>,
) -> Result<Vec<f64>> {
    let hnorm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    ensure(hnorm <= 1.0, || {
        format!("|h| must not exceed 1, got {hnorm}")
    })?;
    ensure(h.len() == endpoints.cols(), || {
        "displacement dimension does not match endpoints".into()
    })?;
    let phi = probe.phi.clone();
    let m = probe.m;
    let values: Vec<f64> = (0..endpoints.rows())
        .into_par_iter()
        .map(|i| {
            let x = endpoints.row(i);
            let mut buf = vec![0.0; x.len()];
            let dv = delta_m_fn(&*phi, m, h, x, &mut buf);
            match weight {
                Some(w) => dv * w(x),
                None => dv,
            }
        })
        .collect();
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Estimation(format!(
            "difference functional is not finite on path {bad}"
        )));
    }
    Ok(values)
}

/// Sample mean of `D_h^m phi(X) * w(X)` over ensemble endpoints.
pub fn mc_weighted_difference(
    endpoints: &Matrix,
    probe: &DifferenceProbe,
    h: &[f64],
    weight: Option<&WeightFn>,
) -> Result<EstimateWithError> {
    let values = probe_values(endpoints, probe, h, weight)?;
    Ok(summarize(&values))
}

/// Coupled split of the difference functional into the approximation error
/// (estimated pathwise, variance-reduced by the coupling) and the kernel
/// term on the auxiliary endpoints.
pub fn ae_pe_split(
    coupled: &CoupledEnsemble,
    probe: &DifferenceProbe,
    h: &[f64],
) -> Result<(EstimateWithError, EstimateWithError)> {
    let dx = probe_values(&coupled.x_end, probe, h, None)?;
    let dy = probe_values(&coupled.y_end, probe, h, None)?;
    let diff: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| a - b).collect();
    Ok((summarize(&diff), summarize(&dy)))
}

/// The split evaluated over the probe's declared displacement set, keyed by
/// |h|; the raw material of kernel-term slope fits.
pub fn ae_pe_sweep(
    coupled: &CoupledEnsemble,
    probe: &DifferenceProbe,
) -> Result<Vec<(f64, (EstimateWithError, EstimateWithError))>> {
    probe
        .h_set
        .iter()
        .map(|h| {
            let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok((norm, ae_pe_split(coupled, probe, h)?))
        })
        .collect()
}

/// Weighted kernel term `E[w(X_{t-eps}) D_h^m phi(Y_t)]`: the weight is
/// measurable at the checkpoint, so conditioning still applies.
pub fn weighted_pe(
    coupled: &CoupledEnsemble,
    probe: &DifferenceProbe,
    h: &[f64],
    weight: &WeightFn,
) -> Result<EstimateWithError> {
    let dy = probe_values(&coupled.y_end, probe, h, None)?;
    let values: Vec<f64> = dy
        .iter()
        .enumerate()
        .map(|(i, v)| v * weight(coupled.checkpoint.row(i)))
        .collect();
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Estimation(format!(
            "weight is not finite on path {bad}"
        )));
    }
    Ok(summarize(&values))
}

/// Moments `E |X_t - Y_t|^r` of the coupling error for each requested power.
///
/// Under a stable driver, powers at or above the stability index have no
/// finite moment and are rejected.
pub fn coupling_error_moments(
    coupled: &CoupledEnsemble,
    powers: &[f64],
) -> Result<Vec<EstimateWithError>> {
    for &r in powers {
        ensure(r > 0.0, || {
            format!("moment powers must be positive, got {r}")
        })?;
        if let Some(alpha) = coupled.stable_alpha {
            if r >= alpha {
                return Err(Error::Parameter(format!(
                    "moment of order {r} does not exist under a stable driver with index {alpha}"
                )));
            }
        }
    }
    let n = coupled.n_paths();
    let norms: Vec<f64> = (0..n)
        .map(|i| {
            coupled
                .x_end
                .row(i)
                .iter()
                .zip(coupled.y_end.row(i))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(powers
        .iter()
        .map(|&r| {
            let vals: Vec<f64> = norms.iter().map(|v| v.powf(r)).collect();
            summarize(&vals)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxiliary::{build_coupled, AuxKind};
    use crate::besov::DifferenceProbe;
    use crate::drivers::SeedSpec;
    use crate::models::{
        simulate_ensemble, simulate_with_checkpoint, CoefficientSpec, Driver, ModelSpec,
    };
    use std::sync::Arc;

    fn cos_probe(m: usize) -> DifferenceProbe {
        DifferenceProbe::new(
            m,
            vec![vec![0.25]],
            Arc::new(|x: &[f64]| x[0].cos()),
            0.5,
            1.0 + 2.0_f64.powf(0.5),
        )
        .unwrap()
    }

    fn brownian_model() -> ModelSpec {
        let coeff =
            CoefficientSpec::autonomous(1, 1, |_x, out| out[0] = 0.0, |_x, out| out[0] = 1.0);
        ModelSpec::new(coeff, Driver::Brownian, vec![0.0]).unwrap()
    }

    #[test]
    fn constant_phi_gives_zero_with_zero_stderr() {
        let probe = DifferenceProbe::new(2, vec![], Arc::new(|_: &[f64]| 4.2), 0.5, 4.3).unwrap();
        let ens =
            simulate_ensemble(&brownian_model(), 1.0, 4, 10_000, SeedSpec::new(1, 0)).unwrap();
        let est = mc_weighted_difference(&ens.endpoints, &probe, &[0.1], None).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn cosine_functional_matches_characteristic_function() {
        // exact N(0,1) endpoints: E[cos(X + h) - cos X] = e^{-1/2}(cos h - 1)
        let ens =
            simulate_ensemble(&brownian_model(), 1.0, 1, 400_000, SeedSpec::new(2, 0)).unwrap();
        let probe = cos_probe(1);
        let h = 0.25;
        let est = mc_weighted_difference(&ens.endpoints, &probe, &[h], None).unwrap();
        let expect = (-0.5_f64).exp() * (h.cos() - 1.0);
        assert!(
            (est.value - expect).abs() < 4.0 * est.stderr,
            "value {} expect {} stderr {}",
            est.value,
            expect,
            est.stderr
        );
    }

    #[test]
    fn cutoff_weight_beyond_range_equals_unweighted() {
        let ens =
            simulate_ensemble(&brownian_model(), 1.0, 2, 50_000, SeedSpec::new(3, 0)).unwrap();
        let probe = cos_probe(1);
        let weight: Box<WeightFn> = Box::new(|x: &[f64]| if x[0].abs() <= 1e6 { 1.0 } else { 0.0 });
        let a = mc_weighted_difference(&ens.endpoints, &probe, &[0.2], None).unwrap();
        let b = mc_weighted_difference(&ens.endpoints, &probe, &[0.2], Some(&*weight)).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn telescoping_ae_plus_pe() {
        let model = brownian_model();
        let ens =
            simulate_with_checkpoint(&model, 1.0, 0.25, 64, 100_000, SeedSpec::new(4, 0)).unwrap();
        let coupled = build_coupled(&ens, &model, &AuxKind::Frozen).unwrap();
        let probe = cos_probe(2);
        let h = [0.125];
        let (ae, pe) = ae_pe_split(&coupled, &probe, &h).unwrap();
        let direct = mc_weighted_difference(&coupled.x_end, &probe, &h, None).unwrap();
        let lhs = ae.value + pe.value;
        let scale = lhs.abs().max(direct.value.abs()).max(1e-300);
        assert!(
            (lhs - direct.value).abs() / scale < 1e-12,
            "{lhs} vs {}",
            direct.value
        );
    }

    #[test]
    fn frozen_constant_sigma_ae_exactly_zero() {
        let model = brownian_model();
        let ens =
            simulate_with_checkpoint(&model, 1.0, 0.25, 32, 5_000, SeedSpec::new(5, 0)).unwrap();
        let coupled = build_coupled(&ens, &model, &AuxKind::Frozen).unwrap();
        let (ae, _pe) = ae_pe_split(&coupled, &cos_probe(2), &[0.125]).unwrap();
        assert_eq!(ae.value, 0.0);
        assert_eq!(ae.stderr, 0.0);
    }

    #[test]
    fn coupling_moments_zero_when_paths_coincide() {
        let model = brownian_model();
        let ens =
            simulate_with_checkpoint(&model, 1.0, 0.25, 32, 1_000, SeedSpec::new(6, 0)).unwrap();
        let coupled = build_coupled(&ens, &model, &AuxKind::Frozen).unwrap();
        let ms = coupling_error_moments(&coupled, &[1.0, 2.0]).unwrap();
        assert!(ms.iter().all(|m| m.value == 0.0));
    }

    #[test]
    fn stable_moments_above_alpha_rejected() {
        use crate::drivers::StableDriverSpec;
        let coeff =
            CoefficientSpec::autonomous(1, 1, |_x, out| out[0] = 0.0, |_x, out| out[0] = 1.0);
        let model = ModelSpec::new(
            coeff,
            Driver::Stable(StableDriverSpec::new(1.5, 1.0).unwrap()),
            vec![0.0],
        )
        .unwrap();
        let ens =
            simulate_with_checkpoint(&model, 1.0, 0.25, 32, 100, SeedSpec::new(7, 0)).unwrap();
        let coupled = build_coupled(&ens, &model, &AuxKind::LevyFrozen).unwrap();
        assert!(coupling_error_moments(&coupled, &[1.0]).is_ok());
        assert!(coupling_error_moments(&coupled, &[1.5]).is_err());
        assert!(coupling_error_moments(&coupled, &[2.0]).is_err());
    }

    #[test]
    fn stderr_halves_when_paths_quadruple() {
        let probe = cos_probe(1);
        let mut errs = Vec::new();
        for n in [50_000usize, 200_000] {
            let ens = simulate_ensemble(&brownian_model(), 1.0, 2, n, SeedSpec::new(8, 0)).unwrap();
            let est = mc_weighted_difference(&ens.endpoints, &probe, &[0.5], None).unwrap();
            errs.push(est.stderr);
        }
        let ratio = errs[0] / errs[1];
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }
}
