//! Coefficient specifications and forward simulation.
//!
//! The simulator is explicit Euler-Maruyama on a uniform grid; when a
//! checkpoint at `t - epsilon` is requested the grid is the union of uniform
//! grids on `[0, t - eps]` and `[t - eps, t]`, so the checkpoint is an exact
//! grid point. Coefficients see the path only up to the evaluation time
//! through [`PathView`], which is what keeps path-dependent models adapted.

use crate::drivers::{make_stream, RandomStream, SeedSpec, StableDriverSpec};
use crate::error::{Error, Result};
use crate::numerics::{all_finite, det_small, gram, Matrix};
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

/// Coefficient callback: `(time, path up to now, output slice)`.
///
/// Drift writes a `d` vector, diffusion writes a row-major `d x d'` matrix.
pub type CoeffFn = dyn Fn(f64, &PathView<'_>, &mut [f64]) + Send + Sync;

/// Read-only view of a simulated path up to the evaluation time.
///
/// The slice length enforces adaptedness: states after the current step are
/// not reachable through the view.
pub struct PathView<'a> {
    times: &'a [f64],
    states: &'a [f64],
    dim: usize,
}

impl<'a> PathView<'a> {
    pub fn new(times: &'a [f64], states: &'a [f64], dim: usize) -> Self {
        debug_assert_eq!(times.len() * dim, states.len());
        PathView { times, states, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of recorded instants, including the current one.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &'a [f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn current(&self) -> &'a [f64] {
        self.state(self.len() - 1)
    }

    pub fn current_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Running supremum of the Euclidean norm over the visible path.
    pub fn running_sup_norm(&self) -> f64 {
        let mut sup = 0.0_f64;
        for i in 0..self.len() {
            let s = self.state(i);
            let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            sup = sup.max(norm);
        }
        sup
    }
}

/// Drift/diffusion handles plus declared regularity metadata.
#[derive(Clone)]
pub struct CoefficientSpec {
    pub drift: Arc<CoeffFn>,
    pub diffusion: Arc<CoeffFn>,
    pub dim_state: usize,
    pub dim_noise: usize,
    /// Declared Hoelder exponent of the diffusion coefficient.
    pub holder_beta: Option<f64>,
    pub drift_bound: Option<f64>,
    pub diffusion_bound: Option<f64>,
    /// Lower bound for det(sigma sigma*), spot-checked during simulation.
    pub nondegeneracy_floor: Option<f64>,
}

impl CoefficientSpec {
    pub fn new(
        dim_state: usize,
        dim_noise: usize,
        drift: impl Fn(f64, &PathView<'_>, &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &PathView<'_>, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        CoefficientSpec {
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            dim_state,
            dim_noise,
            holder_beta: None,
            drift_bound: None,
            diffusion_bound: None,
            nondegeneracy_floor: None,
        }
    }

    /// State-dependent (Markov) coefficients: handles read the current state.
    pub fn autonomous(
        dim_state: usize,
        dim_noise: usize,
        drift: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        CoefficientSpec::new(
            dim_state,
            dim_noise,
            move |_t, path, out| drift(path.current(), out),
            move |_t, path, out| diffusion(path.current(), out),
        )
    }

    pub fn with_holder_beta(mut self, beta: f64) -> Self {
        self.holder_beta = Some(beta);
        self
    }

    pub fn with_drift_bound(mut self, b: f64) -> Self {
        self.drift_bound = Some(b);
        self
    }

    pub fn with_diffusion_bound(mut self, b: f64) -> Self {
        self.diffusion_bound = Some(b);
        self
    }

    pub fn with_nondegeneracy_floor(mut self, floor: f64) -> Self {
        self.nondegeneracy_floor = Some(floor);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_state == 0 || self.dim_noise == 0 {
            return Err(Error::Parameter(
                "state and noise dimensions must be at least 1".into(),
            ));
        }
        if let Some(beta) = self.holder_beta {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Parameter(format!(
                    "holder_beta must lie in (0, 1], got {beta}"
                )));
            }
        }
        Ok(())
    }
}

/// Driving noise of a model.
#[derive(Clone, Debug)]
pub enum Driver {
    Brownian,
    Stable(StableDriverSpec),
}

impl Driver {
    pub fn stable_alpha(&self) -> Option<f64> {
        match self {
            Driver::Brownian => None,
            Driver::Stable(s) => Some(s.alpha),
        }
    }
}

/// A complete forward model: coefficients, driver, initial state.
#[derive(Clone)]
pub struct ModelSpec {
    pub coefficients: CoefficientSpec,
    pub driver: Driver,
    pub x0: Vec<f64>,
}

impl ModelSpec {
    pub fn new(coefficients: CoefficientSpec, driver: Driver, x0: Vec<f64>) -> Result<Self> {
        coefficients.validate()?;
        if x0.len() != coefficients.dim_state {
            return Err(Error::Parameter(format!(
                "x0 has length {}, expected {}",
                x0.len(),
                coefficients.dim_state
            )));
        }
        if let Driver::Stable(spec) = &driver {
            spec.validate()?;
            if coefficients.dim_noise != coefficients.dim_state {
                return Err(Error::Parameter(
                    "stable driver requires dim_noise == dim_state".into(),
                ));
            }
        }
        Ok(ModelSpec {
            coefficients,
            driver,
            x0,
        })
    }

    pub fn dim(&self) -> usize {
        self.coefficients.dim_state
    }
}

/// Noise increments retained on the tail window `[t - eps, t]`,
/// one row per path, laid out step-major (`n_tail x dim_noise` per row).
#[derive(Clone, Debug)]
pub struct RetainedNoise {
    pub increments: Matrix,
    pub n_tail: usize,
    pub dim_noise: usize,
    pub dt_tail: f64,
}

/// Adapted coefficient values recorded at the checkpoint state, needed to
/// build auxiliary processes without replaying the path prefix.
#[derive(Clone, Debug)]
pub struct CheckpointCoeffs {
    /// `n x d` drift values at `(t - eps, X_{t-eps})`.
    pub drift: Matrix,
    /// `n x (d * d')` diffusion values at `(t - eps, X_{t-eps})`.
    pub diffusion: Matrix,
}

/// Endpoint (and optionally checkpoint) states of a simulated ensemble.
#[derive(Debug)]
pub struct PathEnsemble {
    pub endpoints: Matrix,
    pub checkpoints: Option<Matrix>,
    pub t: f64,
    /// Zero when no checkpoint was requested.
    pub epsilon: f64,
    /// Total number of Euler steps actually taken.
    pub n_steps: usize,
    pub retained_noise: Option<RetainedNoise>,
    pub checkpoint_coeffs: Option<CheckpointCoeffs>,
    pub driver: Driver,
    pub seed: SeedSpec,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.endpoints.rows()
    }

    pub fn dim(&self) -> usize {
        self.endpoints.cols()
    }
}

/// Tail windows keep at least this many steps so auxiliary couplings stay
/// resolved even for the smallest epsilons in a dyadic sweep.
pub const MIN_TAIL_STEPS: usize = 16;

struct PathOut {
    endpoint: Vec<f64>,
    checkpoint: Option<Vec<f64>>,
    retained: Option<Vec<f64>>,
    coeff_at_ck: Option<(Vec<f64>, Vec<f64>)>,
}

/// Per-worker scratch space, reused across the paths a worker simulates.
struct Scratch {
    states: Vec<f64>,
    bbuf: Vec<f64>,
    sbuf: Vec<f64>,
    dz: Vec<f64>,
    gbuf: Vec<f64>,
}

impl Scratch {
    fn new(d: usize, dp: usize, n_steps: usize) -> Self {
        Scratch {
            states: Vec::with_capacity((n_steps + 1) * d),
            bbuf: vec![0.0; d],
            sbuf: vec![0.0; d * dp],
            dz: vec![0.0; dp],
            gbuf: vec![0.0; d * d],
        }
    }
}

fn fill_increments(driver: &Driver, stream: &mut RandomStream, dt: f64, out: &mut [f64]) {
    match driver {
        Driver::Brownian => {
            let sd = dt.sqrt();
            for v in out.iter_mut() {
                *v = sd * stream.next_gaussian();
            }
        }
        Driver::Stable(spec) => {
            let scale = spec.scale * dt.powf(1.0 / spec.alpha);
            for v in out.iter_mut() {
                *v = scale * stream.next_stable(spec.alpha);
            }
        }
    }
}

fn simulate_one(
    model: &ModelSpec,
    times: &[f64],
    checkpoint_idx: Option<usize>,
    path_id: usize,
    mut stream: RandomStream,
    scratch: &mut Scratch,
) -> Result<PathOut> {
    let d = model.coefficients.dim_state;
    let dp = model.coefficients.dim_noise;
    let n = times.len() - 1;

    let Scratch {
        states,
        bbuf,
        sbuf,
        dz,
        gbuf,
    } = scratch;
    states.clear();
    states.extend_from_slice(&model.x0);

    let mut checkpoint = None;
    let mut coeff_at_ck = None;
    let mut retained: Option<Vec<f64>> = checkpoint_idx.map(|ck| Vec::with_capacity((n - ck) * dp));

    for k in 0..n {
        let view = PathView::new(&times[..k + 1], &states[..(k + 1) * d], d);
        (model.coefficients.drift)(times[k], &view, bbuf);
        (model.coefficients.diffusion)(times[k], &view, sbuf);
        if all_finite(bbuf).is_err() {
            return Err(Error::Simulation {
                path: path_id,
                step: k,
                what: "drift returned a non-finite value".into(),
            });
        }
        if all_finite(sbuf).is_err() {
            return Err(Error::Simulation {
                path: path_id,
                step: k,
                what: "diffusion returned a non-finite value".into(),
            });
        }
        if let Some(floor) = model.coefficients.nondegeneracy_floor {
            if d <= 3 {
                gram(sbuf, d, dp, gbuf);
                let det = det_small(gbuf, d);
                if det < floor {
                    return Err(Error::Simulation {
                        path: path_id,
                        step: k,
                        what: format!(
                            "det(sigma sigma*) = {det} fell below the declared floor {floor}"
                        ),
                    });
                }
            }
        }

        if Some(k) == checkpoint_idx {
            checkpoint = Some(states[k * d..(k + 1) * d].to_vec());
            coeff_at_ck = Some((bbuf.clone(), sbuf.clone()));
        }

        let dt = times[k + 1] - times[k];
        fill_increments(&model.driver, &mut stream, dt, dz);
        if let (Some(r), Some(ck)) = (retained.as_mut(), checkpoint_idx) {
            if k >= ck {
                r.extend_from_slice(dz);
            }
        }

        let base = k * d;
        for j in 0..d {
            let mut x = states[base + j] + bbuf[j] * dt;
            for l in 0..dp {
                x += sbuf[j * dp + l] * dz[l];
            }
            states.push(x);
        }
    }

    Ok(PathOut {
        endpoint: states[n * d..(n + 1) * d].to_vec(),
        checkpoint,
        retained,
        coeff_at_ck,
    })
}

fn run_ensemble(
    model: &ModelSpec,
    times: Vec<f64>,
    t: f64,
    checkpoint_idx: Option<usize>,
    epsilon: f64,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<PathEnsemble> {
    let d = model.dim();
    let dp = model.coefficients.dim_noise;
    let n_steps = times.len() - 1;

    let outs: Vec<Result<PathOut>> = (0..n_paths)
        .into_par_iter()
        .map_init(
            || Scratch::new(d, dp, n_steps),
            |scratch, i| {
                let stream =
                    make_stream(seed.with_stream(seed.stream_id.wrapping_add(i as u64)));
                simulate_one(model, &times, checkpoint_idx, i, stream, scratch)
            },
        )
        .collect();

    let mut endpoints = Matrix::zeros(n_paths, d);
    let mut checkpoints = checkpoint_idx.map(|_| Matrix::zeros(n_paths, d));
    let n_tail = checkpoint_idx.map(|ck| n_steps - ck).unwrap_or(0);
    let mut retained = checkpoint_idx.map(|_| Matrix::zeros(n_paths, n_tail * dp));
    let mut ck_drift = checkpoint_idx.map(|_| Matrix::zeros(n_paths, d));
    let mut ck_diff = checkpoint_idx.map(|_| Matrix::zeros(n_paths, d * dp));

    for (i, out) in outs.into_iter().enumerate() {
        let out = out?;
        endpoints.row_mut(i).copy_from_slice(&out.endpoint);
        if let (Some(m), Some(c)) = (checkpoints.as_mut(), out.checkpoint.as_ref()) {
            m.row_mut(i).copy_from_slice(c);
        }
        if let (Some(m), Some(r)) = (retained.as_mut(), out.retained.as_ref()) {
            m.row_mut(i).copy_from_slice(r);
        }
        if let (Some((b, s)), Some(mb), Some(ms)) = (
            out.coeff_at_ck.as_ref(),
            ck_drift.as_mut(),
            ck_diff.as_mut(),
        ) {
            mb.row_mut(i).copy_from_slice(b);
            ms.row_mut(i).copy_from_slice(s);
        }
    }

    let dt_tail = if n_tail > 0 {
        epsilon / n_tail as f64
    } else {
        0.0
    };
    Ok(PathEnsemble {
        endpoints,
        checkpoints,
        t,
        epsilon,
        n_steps,
        retained_noise: retained.map(|increments| RetainedNoise {
            increments,
            n_tail,
            dim_noise: dp,
            dt_tail,
        }),
        checkpoint_coeffs: match (ck_drift, ck_diff) {
            (Some(drift), Some(diffusion)) => Some(CheckpointCoeffs { drift, diffusion }),
            _ => None,
        },
        driver: model.driver.clone(),
        seed,
    })
}

/// Simulates `n_paths` independent Euler paths of the model up to time `t`.
///
/// Path `i` draws from stream `seed.stream_id + i`, so results are
/// reproducible for any worker count.
pub fn simulate_ensemble(
    model: &ModelSpec,
    t: f64,
    n_steps: usize,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<PathEnsemble> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    if n_steps == 0 {
        return Err(Error::Parameter("n_steps must be at least 1".into()));
    }
    let times: Vec<f64> = (0..=n_steps)
        .map(|k| t * k as f64 / n_steps as f64)
        .collect();
    run_ensemble(model, times, t, None, 0.0, n_paths, seed)
}

/// Simulates with a checkpoint at `t - epsilon` and retains the tail noise,
/// so coupled auxiliary processes can be built afterwards.
///
/// The grid is the union of uniform grids on the head and tail windows; the
/// tail keeps at least [`MIN_TAIL_STEPS`] steps (n_steps is adjusted so the
/// checkpoint is exact and the tail resolved).
pub fn simulate_with_checkpoint(
    model: &ModelSpec,
    t: f64,
    epsilon: f64,
    n_steps: usize,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<PathEnsemble> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    if !(epsilon > 0.0 && epsilon < t) {
        return Err(Error::Parameter(format!(
            "epsilon must lie in (0, t), got epsilon = {epsilon}, t = {t}"
        )));
    }
    if n_steps == 0 {
        return Err(Error::Parameter("n_steps must be at least 1".into()));
    }
    let dt_target = t / n_steps as f64;
    let n_head = (((t - epsilon) / dt_target).round() as usize).max(1);
    let n_tail = ((epsilon / dt_target).round() as usize).max(MIN_TAIL_STEPS.min(n_steps));
    let head = t - epsilon;
    let mut times = Vec::with_capacity(n_head + n_tail + 1);
    for k in 0..=n_head {
        times.push(head * k as f64 / n_head as f64);
    }
    for k in 1..=n_tail {
        times.push(head + epsilon * k as f64 / n_tail as f64);
    }
    run_ensemble(model, times, t, Some(n_head), epsilon, n_paths, seed)
}

/// Full-path simulation for small ensembles: returns the grid, every path,
/// and every increment, for bookkeeping cross-checks.
pub struct FullPaths {
    pub times: Vec<f64>,
    /// One `(n_steps + 1) * d` state record per path.
    pub states: Vec<Vec<f64>>,
    /// One `n_steps * d'` increment record per path.
    pub increments: Vec<Vec<f64>>,
}

pub fn simulate_full(
    model: &ModelSpec,
    t: f64,
    n_steps: usize,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<FullPaths> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    if n_steps == 0 {
        return Err(Error::Parameter("n_steps must be at least 1".into()));
    }
    let d = model.dim();
    let dp = model.coefficients.dim_noise;
    let times: Vec<f64> = (0..=n_steps)
        .map(|k| t * k as f64 / n_steps as f64)
        .collect();
    let mut states = Vec::with_capacity(n_paths);
    let mut increments = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let mut stream = make_stream(seed.with_stream(seed.stream_id.wrapping_add(i as u64)));
        // Mirror simulate_one but record everything; increments are drawn in
        // the same order, so outputs agree bitwise with the ensemble path.
        let mut st = Vec::with_capacity((n_steps + 1) * d);
        st.extend_from_slice(&model.x0);
        let mut inc = Vec::with_capacity(n_steps * dp);
        let mut bbuf = vec![0.0; d];
        let mut sbuf = vec![0.0; d * dp];
        let mut dz = vec![0.0; dp];
        for k in 0..n_steps {
            let view = PathView::new(&times[..k + 1], &st[..(k + 1) * d], d);
            (model.coefficients.drift)(times[k], &view, &mut bbuf);
            (model.coefficients.diffusion)(times[k], &view, &mut sbuf);
            if all_finite(&bbuf).is_err() || all_finite(&sbuf).is_err() {
                return Err(Error::Simulation {
                    path: i,
                    step: k,
                    what: "coefficient returned a non-finite value".into(),
                });
            }
            let dt = times[k + 1] - times[k];
            fill_increments(&model.driver, &mut stream, dt, &mut dz);
            inc.extend_from_slice(&dz);
            let base = k * d;
            for j in 0..d {
                let mut x = st[base + j] + bbuf[j] * dt;
                for l in 0..dp {
                    x += sbuf[j * dp + l] * dz[l];
                }
                st.push(x);
            }
        }
        states.push(st);
        increments.push(inc);
    }
    Ok(FullPaths {
        times,
        states,
        increments,
    })
}

/// Replays the tail window from the checkpoints with the retained noise.
///
/// Exact (bitwise) for coefficients that depend on the path only through the
/// current state; path-functional coefficients would need the discarded
/// prefix.
pub fn reintegrate_tail(model: &ModelSpec, ensemble: &PathEnsemble) -> Result<Matrix> {
    let checkpoints = ensemble
        .checkpoints
        .as_ref()
        .ok_or_else(|| Error::State("ensemble has no checkpoints".into()))?;
    let noise = ensemble
        .retained_noise
        .as_ref()
        .ok_or_else(|| Error::State("ensemble has no retained noise".into()))?;
    let d = ensemble.dim();
    let dp = noise.dim_noise;
    let n_tail = noise.n_tail;
    let head = ensemble.t - ensemble.epsilon;
    let times: Vec<f64> = (0..=n_tail)
        .map(|k| head + ensemble.epsilon * k as f64 / n_tail as f64)
        .collect();

    let mut out = Matrix::zeros(ensemble.n_paths(), d);
    let mut bbuf = vec![0.0; d];
    let mut sbuf = vec![0.0; d * dp];
    for i in 0..ensemble.n_paths() {
        let mut st = Vec::with_capacity((n_tail + 1) * d);
        st.extend_from_slice(checkpoints.row(i));
        let inc = noise.increments.row(i);
        for k in 0..n_tail {
            let view = PathView::new(&times[..k + 1], &st[..(k + 1) * d], d);
            (model.coefficients.drift)(times[k], &view, &mut bbuf);
            (model.coefficients.diffusion)(times[k], &view, &mut sbuf);
            let dt = times[k + 1] - times[k];
            let dz = &inc[k * dp..(k + 1) * dp];
            let base = k * d;
            for j in 0..d {
                let mut x = st[base + j] + bbuf[j] * dt;
                for l in 0..dp {
                    x += sbuf[j * dp + l] * dz[l];
                }
                st.push(x);
            }
        }
        out.row_mut(i)
            .copy_from_slice(&st[n_tail * d..(n_tail + 1) * d]);
    }
    Ok(out)
}

/// Ensemble dump: `path_id, x_1..x_d[, c_1..c_d]` with a mandatory header.
pub fn write_ensemble_csv(ensemble: &PathEnsemble, w: &mut impl Write) -> std::io::Result<()> {
    let d = ensemble.dim();
    let mut header = String::from("path_id");
    for j in 1..=d {
        header.push_str(&format!(",x_{j}"));
    }
    if ensemble.checkpoints.is_some() {
        for j in 1..=d {
            header.push_str(&format!(",c_{j}"));
        }
    }
    writeln!(w, "{header}")?;
    for i in 0..ensemble.n_paths() {
        let mut line = format!("{i}");
        for v in ensemble.endpoints.row(i) {
            line.push_str(&format!(",{v}"));
        }
        if let Some(cks) = &ensemble.checkpoints {
            for v in cks.row(i) {
                line.push_str(&format!(",{v}"));
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
