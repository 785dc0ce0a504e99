//! Baseline scenarios: the Gaussian kernel envelope, the Hoelder-diffusion
//! coupling rate, and the improved rates from drift-aware auxiliaries.

use super::config::ScenarioConfig;
use super::report::{CheckKind, CheckRecord};
use super::{
    grid_difference_sweep, lacunary_cos, lacunary_sin_smooth, unit_brownian, ArtifactSink,
};
use crate::auxiliary::{build_coupled, AuxKind};
use crate::besov::{fit_envelope_constant, mollified_density, GridDomain};
use crate::error::Result;
use crate::estimators::{
    ae_pe_split, ae_pe_sweep, coupling_error_moments, fit_scaling, make_test_function,
    EstimateWithError, TestFamily,
};
use crate::models::{
    simulate_ensemble, simulate_with_checkpoint, CoefficientSpec, Driver, ModelSpec,
};
use std::sync::Arc;

/// Coupling-error moment per window length over the dyadic sweep.
pub(crate) fn coupling_moment_sweep(
    model: &ModelSpec,
    aux: &AuxKind,
    config: &ScenarioConfig,
    power: f64,
    seed_label: u64,
) -> Result<Vec<(f64, EstimateWithError)>> {
    let mut pairs = Vec::new();
    for (i, eps) in config.epsilons().into_iter().enumerate() {
        let seed = config.seed.derive(seed_label + i as u64);
        let ens =
            simulate_with_checkpoint(model, config.t, eps, config.n_steps, config.n_paths, seed)?;
        let coupled = build_coupled(&ens, model, aux)?;
        let moment = coupling_error_moments(&coupled, &[power])?[0];
        pairs.push((eps, moment));
    }
    Ok(pairs)
}

pub(super) fn bulk_bm(config: &ScenarioConfig, sink: &ArtifactSink) -> Result<Vec<CheckRecord>> {
    let model = unit_brownian();
    let mut checks = Vec::new();

    // Smooth-density baseline: second differences of the mollified density
    // scale as |h|^2.
    {
        let bandwidth = config.override_or("bandwidth", 0.15);
        let ens = simulate_ensemble(
            &model,
            config.t,
            config.n_steps.min(8),
            config.n_paths,
            config.seed.derive(1),
        )?;
        let kmax = *config.h_exponents.iter().max().unwrap();
        let spacing = 0.5_f64.powi(kmax as i32 + 2);
        let half = 6.5 * config.t.sqrt().max(1.0);
        let dom = GridDomain::symmetric_1d(half, spacing)?;
        let dens = mollified_density(&ens.endpoints, bandwidth, &dom)?;
        sink.write_grid("density", &dens)?;
        let pairs = grid_difference_sweep(&dens, 2, &config.hs())?;
        sink.write_sweep("density_delta2_slope", &pairs)?;
        let fit = fit_scaling(&pairs)?;
        checks.push(CheckRecord::slope(
            "density_delta2_slope",
            2.0,
            fit,
            config.tolerance_or("density_delta2_slope", 0.2),
        ));
    }

    // Kernel-term envelope and the exact zero coupling error, over the full
    // dyadic (h, eps) panel with the frozen auxiliary at m = 2.
    {
        let test_fn = make_test_function(&TestFamily::cosine(vec![1.0]), 0.5)?;
        let probe = test_fn.probe(2, vec![])?;
        let panel: Vec<(Vec<f64>, f64)> = config
            .epsilons()
            .iter()
            .flat_map(|&eps| config.hs().into_iter().map(move |h| (vec![h], eps)))
            .collect();
        let envelope_c = fit_envelope_constant(&[1.0], &panel, 2)?;
        let mut max_ratio = 0.0_f64;
        let mut max_ae = 0.0_f64;
        for (i, eps) in config.epsilons().into_iter().enumerate() {
            let ens = simulate_with_checkpoint(
                &model,
                config.t,
                eps,
                config.n_steps,
                config.n_paths,
                config.seed.derive(100 + i as u64),
            )?;
            let coupled = build_coupled(&ens, &model, &AuxKind::Frozen)?;
            for h in config.hs() {
                let (ae, pe) = ae_pe_split(&coupled, &probe, &[h])?;
                max_ae = max_ae.max(ae.value.abs());
                let env = envelope_c * (h / eps.sqrt()).min(1.0).powi(2);
                let excess = (pe.value.abs() - 4.0 * pe.stderr).max(0.0);
                max_ratio = max_ratio.max(excess / env);
            }
        }
        checks.push(CheckRecord::new(
            "pe_envelope_m2",
            CheckKind::Upper,
            1.0,
            max_ratio,
            config.tolerance_or("pe_envelope_m2", 0.05),
        ));
        checks.push(CheckRecord::new(
            "ae_zero_frozen",
            CheckKind::Exact,
            0.0,
            max_ae,
            config.tolerance_or("ae_zero_frozen", 0.0),
        ));

        // Kernel-term slope in |h| inside the regime |h| <= sqrt(eps)/4.
        let eps0 = config.t * 0.25;
        let ens = simulate_with_checkpoint(
            &model,
            config.t,
            eps0,
            config.n_steps,
            config.n_paths,
            config.seed.derive(200),
        )?;
        let coupled = build_coupled(&ens, &model, &AuxKind::Frozen)?;
        let h_set: Vec<Vec<f64>> = config
            .hs()
            .into_iter()
            .filter(|&h| h <= eps0.sqrt() / 4.0)
            .map(|h| vec![h])
            .collect();
        let slope_probe = test_fn.probe(2, h_set)?;
        let pairs: Vec<(f64, EstimateWithError)> = ae_pe_sweep(&coupled, &slope_probe)?
            .into_iter()
            .map(|(h, (_ae, pe))| {
                (
                    h,
                    EstimateWithError {
                        value: pe.value.abs(),
                        stderr: pe.stderr,
                        n: pe.n,
                    },
                )
            })
            .collect();
        sink.write_sweep("pe_slope_h", &pairs)?;
        let fit = fit_scaling(&pairs)?;
        checks.push(CheckRecord::slope(
            "pe_slope_h",
            2.0,
            fit,
            config.tolerance_or("pe_slope_h", 0.2),
        ));
    }

    Ok(checks)
}

/// Driftless model whose diffusion is beta-rough at every scale:
/// `sigma = 2 + lacunary_cos(beta)`. A one-point kink like
/// `2 + min(1, |x|^beta)` is smooth almost everywhere and measures a
/// near-Lipschitz coupling rate instead of the Hoelder one.
fn holder_sigma_model(beta: f64) -> ModelSpec {
    let rough = super::lacunary_cos(beta, 12, 0.3);
    let coeff = CoefficientSpec::autonomous(
        1,
        1,
        |_x, out| out[0] = 0.0,
        move |x, out| out[0] = 2.0 + rough(x[0]),
    )
    .with_holder_beta(beta)
    .with_drift_bound(0.0)
    .with_diffusion_bound(3.1)
    .with_nondegeneracy_floor(0.9);
    ModelSpec::new(coeff, Driver::Brownian, vec![0.0]).expect("static model")
}

pub(super) fn bulk_holder_sigma(
    config: &ScenarioConfig,
    sink: &ArtifactSink,
) -> Result<Vec<CheckRecord>> {
    let beta = config.override_or("beta", 0.5);
    let model = holder_sigma_model(beta);
    let mut checks = Vec::new();

    // E|X - Y|^2 ~ eps^(1+beta) for the frozen auxiliary.
    let pairs = coupling_moment_sweep(&model, &AuxKind::Frozen, config, 2.0, 10)?;
    sink.write_sweep("ae_moment2_slope", &pairs)?;
    let fit = fit_scaling(&pairs)?;
    checks.push(CheckRecord::slope(
        "ae_moment2_slope",
        1.0 + beta,
        fit,
        config.tolerance_or("ae_moment2_slope", 0.15),
    ));

    // Kernel envelope still holds under the Hoelder diffusion. The kernel
    // ratio grows as the covariance shrinks, so the constant fitted at a
    // floor below sigma_min^2 dominates the whole covariance range.
    {
        let test_fn = make_test_function(&TestFamily::cosine(vec![1.0]), 0.5)?;
        let probe = test_fn.probe(2, vec![])?;
        let panel: Vec<(Vec<f64>, f64)> = config
            .epsilons()
            .iter()
            .flat_map(|&eps| config.hs().into_iter().map(move |h| (vec![h], eps)))
            .collect();
        let envelope_c = fit_envelope_constant(&[0.9], &panel, 2)?;
        let mut max_ratio = 0.0_f64;
        for (i, eps) in config.epsilons().into_iter().enumerate() {
            let ens = simulate_with_checkpoint(
                &model,
                config.t,
                eps,
                config.n_steps,
                config.n_paths,
                config.seed.derive(300 + i as u64),
            )?;
            let coupled = build_coupled(&ens, &model, &AuxKind::Frozen)?;
            for h in config.hs() {
                let (_ae, pe) = ae_pe_split(&coupled, &probe, &[h])?;
                let env = envelope_c * (h / eps.sqrt()).min(1.0).powi(2);
                let excess = (pe.value.abs() - 4.0 * pe.stderr).max(0.0);
                max_ratio = max_ratio.max(excess / env);
            }
        }
        checks.push(CheckRecord::new(
            "pe_envelope_holder",
            CheckKind::Upper,
            1.0,
            max_ratio,
            config.tolerance_or("pe_envelope_holder", 0.05),
        ));
    }

    Ok(checks)
}

/// Levels of the lacunary drifts: roughness reaches scale 2^-12, well below
/// the smallest window in the default sweeps.
const LACUNARY_LEVELS: u32 = 12;

pub(super) fn morereg_drift(
    config: &ScenarioConfig,
    sink: &ArtifactSink,
) -> Result<Vec<CheckRecord>> {
    let beta = config.override_or("beta", 0.5);
    let mut checks = Vec::new();

    // Drift-frozen auxiliary with b in C^beta: E|X - Y| ~ eps^(1 + beta/2),
    // an improvement over the plain frozen auxiliary whose error is the
    // integrated drift itself (slope 1).
    {
        let make_model = || -> Result<ModelSpec> {
            let b = lacunary_cos(beta, LACUNARY_LEVELS, 0.3);
            let coeff = CoefficientSpec::autonomous(
                1,
                1,
                move |x, out| out[0] = b(x[0]),
                |_x, out| out[0] = 1.0,
            )
            .with_holder_beta(beta)
            .with_nondegeneracy_floor(1.0);
            ModelSpec::new(coeff, Driver::Brownian, vec![0.0])
        };
        let model = make_model()?;
        let pairs = coupling_moment_sweep(&model, &AuxKind::DriftFrozen, config, 1.0, 20)?;
        sink.write_sweep("ae_drift_frozen_slope", &pairs)?;
        let fit = fit_scaling(&pairs)?;
        checks.push(CheckRecord::slope(
            "ae_drift_frozen_slope",
            1.0 + beta / 2.0,
            fit,
            config.tolerance_or("ae_drift_frozen_slope", 0.15),
        ));

        let frozen_pairs = coupling_moment_sweep(&model, &AuxKind::Frozen, config, 1.0, 20)?;
        sink.write_sweep("ae_frozen_baseline", &frozen_pairs)?;
        let frozen_fit = fit_scaling(&frozen_pairs)?;
        checks.push(CheckRecord::new(
            "drift_frozen_improves_on_frozen",
            CheckKind::Lower,
            frozen_fit.slope,
            fit.slope,
            config.tolerance_or("drift_frozen_improves_on_frozen", 0.0),
        ));
    }

    // Noise-expanded drift with b in C^(1+beta): E|X - Y| ~ eps^((3+beta)/2).
    {
        let b = lacunary_sin_smooth(beta, LACUNARY_LEVELS, 0.3);
        let db = lacunary_cos(beta, LACUNARY_LEVELS, 0.3);
        let coeff = CoefficientSpec::autonomous(
            1,
            1,
            move |x, out| out[0] = b(x[0]),
            |_x, out| out[0] = 1.0,
        )
        .with_nondegeneracy_floor(1.0);
        let model = ModelSpec::new(coeff, Driver::Brownian, vec![0.0])?;
        let aux = AuxKind::Taylor {
            drift_jacobian: Arc::new(move |x: &[f64], out: &mut [f64]| out[0] = db(x[0])),
        };
        let pairs = coupling_moment_sweep(&model, &aux, config, 1.0, 40)?;
        sink.write_sweep("ae_taylor_slope", &pairs)?;
        let fit = fit_scaling(&pairs)?;
        checks.push(CheckRecord::slope(
            "ae_taylor_slope",
            (3.0 + beta) / 2.0,
            fit,
            config.tolerance_or("ae_taylor_slope", 0.2),
        ));
    }

    Ok(checks)
}
