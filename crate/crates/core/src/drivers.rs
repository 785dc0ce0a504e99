//! Deterministic, seedable random sources.
//!
//! Variates are a pure function of `(master_seed, stream_id, counter)`, so any
//! assignment of paths to workers reproduces the same numbers. The generator
//! is counter-based: output `i` of a stream is
//!
//! ```text
//! mix64(mix64(i * PHI ^ k1) + k2)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer and the keys `(k1, k2)` are
//! derived from the seed pair. Distinct stream ids select distinct functions
//! of the counter, not offsets into one shared sequence.
//!
//! Frozen sampler choices (golden outputs depend on them):
//! - uniforms map the top 53 bits to the open interval (0, 1);
//! - Gaussians use Box-Muller on consecutive uniform pairs, cosine branch
//!   first, sine branch cached;
//! - symmetric alpha-stable variates use the Chambers-Mallows-Stuck transform
//!   (`tan` branch at alpha = 1), with no tail truncation.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const PHI: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    /// One stream per simulated path.
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id,
        }
    }

    /// Same master seed, different stream.
    pub fn with_stream(self, stream_id: u64) -> Self {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id,
        }
    }

    /// Derives an unrelated master seed for a labelled sub-experiment.
    pub fn derive(self, label: u64) -> Self {
        SeedSpec {
            master_seed: mix64(
                self.master_seed ^ mix64(label.wrapping_mul(PHI) ^ 0xA5A5_A5A5_5A5A_5A5A),
            ),
            stream_id: self.stream_id,
        }
    }
}

/// Symmetric alpha-stable driver parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableDriverSpec {
    /// Stability index in (0, 2].
    pub alpha: f64,
    pub scale: f64,
}

impl StableDriverSpec {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        let spec = StableDriverSpec { alpha, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::Parameter(format!(
                "stable index must lie in (0, 2], got {}",
                self.alpha
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Parameter(format!(
                "stable scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// Counter-based random stream. Cheap to create, `Send + Sync`-free state,
/// one instance per path.
#[derive(Clone, Debug)]
pub struct RandomStream {
    k1: u64,
    k2: u64,
    counter: u64,
    spare_gaussian: Option<f64>,
}

/// Builds the stream addressed by a seed specification.
pub fn make_stream(seed: SeedSpec) -> RandomStream {
    RandomStream {
        k1: mix64(seed.master_seed ^ 0x8CB9_2BA7_2F3D_8DD7),
        k2: mix64(seed.stream_id.wrapping_mul(PHI) ^ 0xD1B5_4A32_D192_ED03),
        counter: 0,
        spare_gaussian: None,
    }
}

impl RandomStream {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter = self.counter.wrapping_add(1);
        mix64(mix64(c.wrapping_mul(PHI) ^ self.k1).wrapping_add(self.k2))
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Standard Gaussian by Box-Muller; one spare value cached per pair.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Standard symmetric alpha-stable variate (unit scale, unit time).
    pub fn next_stable(&mut self, alpha: f64) -> f64 {
        let v = PI * (self.next_open01() - 0.5);
        if alpha == 1.0 {
            return v.tan();
        }
        let w = -self.next_open01().ln();
        let front = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
        front * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

/// i.i.d. N(0, dt I) increments, one row per step, `dim` columns.
pub fn gaussian_increments(
    stream: &mut RandomStream,
    n: usize,
    dim: usize,
    dt: f64,
) -> Result<Matrix> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    if dim == 0 {
        return Err(Error::Parameter("dim must be at least 1".into()));
    }
    let sd = dt.sqrt();
    let mut m = Matrix::zeros(n, dim);
    for i in 0..n {
        let row = m.row_mut(i);
        for v in row.iter_mut() {
            *v = sd * stream.next_gaussian();
        }
    }
    Ok(m)
}

/// i.i.d. symmetric alpha-stable increments over a time step `dt`,
/// scaled by `dt^(1/alpha)`.
pub fn stable_increments(
    stream: &mut RandomStream,
    n: usize,
    spec: &StableDriverSpec,
    dt: f64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    let scale = spec.scale * dt.powf(1.0 / spec.alpha);
    Ok((0..n)
        .map(|_| scale * stream.next_stable(spec.alpha))
        .collect())
}
