//! Uniformly sampled functions on a box.
//!
//! Grid points sit at cell centers `origin + (i + 1/2) h`, so the rectangle
//! rule integrates constants exactly over the box and displacement by an
//! integer number of cells stays on the lattice.

use crate::error::{Error, Result};
use crate::numerics::ensure;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Box plus lattice geometry, without values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    /// Lower corner of the box.
    pub origin: Vec<f64>,
    /// Uniform spacing, all axes.
    pub spacing: f64,
    /// Points (cells) per axis.
    pub shape: Vec<usize>,
}

impl GridDomain {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        let d = GridDomain {
            origin,
            spacing,
            shape,
        };
        d.validate()?;
        Ok(d)
    }

    /// Symmetric 1-d domain covering [-half, half].
    pub fn symmetric_1d(half: f64, spacing: f64) -> Result<Self> {
        let n = (2.0 * half / spacing).round() as usize;
        GridDomain::new(vec![-half], spacing, vec![n])
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.shape.is_empty() && self.shape.len() <= 3, || {
            format!("grid dimension must be 1..=3, got {}", self.shape.len())
        })?;
        ensure(self.origin.len() == self.shape.len(), || {
            "origin and shape dimensions differ".into()
        })?;
        ensure(self.spacing > 0.0 && self.spacing.is_finite(), || {
            format!("spacing must be positive, got {}", self.spacing)
        })?;
        ensure(self.shape.iter().all(|&n| n > 0), || {
            "every axis needs at least one cell".into()
        })?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Box volume, `prod(shape) * spacing^d`.
    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.spacing.powi(self.dim() as i32)
    }

    /// Multi-index of a flat index, row-major.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        self.shape
            .iter()
            .zip(idx)
            .fold(0, |flat, (n, i)| flat * n + i)
    }

    /// Coordinates of the cell center for a multi-index.
    #[allow(clippy::needless_range_loop)] // origin, idx and out share the axis
    pub fn point(&self, idx: &[usize], out: &mut [f64]) {
        for a in 0..self.dim() {
            out[a] = self.origin[a] + (idx[a] as f64 + 0.5) * self.spacing;
        }
    }

    /// Displacement as whole cells per axis, or an error when misaligned.
    pub fn cells_of(&self, h: &[f64]) -> Result<Vec<i64>> {
        ensure(h.len() == self.dim(), || {
            format!("displacement has dim {}, grid has {}", h.len(), self.dim())
        })?;
        let mut cells = Vec::with_capacity(h.len());
        for &hc in h {
            let ratio = hc / self.spacing;
            let k = ratio.round();
            if (ratio - k).abs() > 1e-9 * (1.0 + ratio.abs()) {
                return Err(Error::Parameter(format!(
                    "displacement component {hc} is not an integer multiple of spacing {}",
                    self.spacing
                )));
            }
            cells.push(k as i64);
        }
        Ok(cells)
    }
}

/// Values sampled on a [`GridDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub domain: GridDomain,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(domain: GridDomain) -> Self {
        let n = domain.len();
        GridFunction {
            domain,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        domain.validate()?;
        let d = domain.dim();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        let mut values = Vec::with_capacity(domain.len());
        for flat in 0..domain.len() {
            domain.unravel(flat, &mut idx);
            domain.point(&idx, &mut x);
            let v = f(&x);
            if !v.is_finite() {
                return Err(Error::Parameter(format!(
                    "sampled function is not finite at {x:?}"
                )));
            }
            values.push(v);
        }
        Ok(GridFunction { domain, values })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.domain.spacing
    }

    /// Rectangle-rule integral over the box.
    pub fn quadrature(&self) -> f64 {
        crate::numerics::pairwise_sum(&self.values) * self.domain.spacing.powi(self.dim() as i32)
    }

    /// L^p norm by the rectangle rule; `p = f64::INFINITY` takes the max.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        ensure(p >= 1.0, || format!("p must be >= 1 or infinite, got {p}"))?;
        if p.is_infinite() {
            return Ok(self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        let cell = self.domain.spacing.powi(self.dim() as i32);
        if p == 1.0 {
            let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
            return Ok(crate::numerics::pairwise_sum(&abs) * cell);
        }
        let pow: Vec<f64> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        Ok((crate::numerics::pairwise_sum(&pow) * cell).powf(1.0 / p))
    }

    /// CSV dump `x_1..x_d, value`; geometry goes in a JSON sidecar.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        let d = self.dim();
        let mut header = String::new();
        for a in 1..=d {
            header.push_str(&format!("x_{a},"));
        }
        header.push_str("value");
        writeln!(w, "{header}")?;
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        for (flat, v) in self.values.iter().enumerate() {
            self.domain.unravel(flat, &mut idx);
            self.domain.point(&idx, &mut x);
            let mut line = String::new();
            for c in &x {
                line.push_str(&format!("{c},"));
            }
            line.push_str(&format!("{v}"));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// JSON sidecar with origin, spacing and shape.
    pub fn write_metadata_json(&self, w: &mut impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *w, &self.domain)?;
        w.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}
