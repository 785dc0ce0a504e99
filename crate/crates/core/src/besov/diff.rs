//! Discrete difference operators and the seminorms built from them.
//!
//! The m-th difference is the binomial sum
//! `(D_h^m f)(x) = sum_j (-1)^(m-j) C(m,j) f(x + j h)`,
//! identical to m-fold iteration of the first difference. Grid functions are
//! zero-extended off their box: differences are computed on an enlarged box
//! covering every shifted copy, so discrete integration by parts is exact.

use super::grid::{GridDomain, GridFunction};
use crate::error::Result;
use crate::numerics::{binomial, ensure};

/// Difference coefficients `(-1)^(m-j) C(m,j)`, j = 0..=m.
pub fn difference_coefficients(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(m, j)
        })
        .collect()
}

/// Pointwise m-th difference of a function handle.
pub fn delta_m_fn(
    phi: &dyn Fn(&[f64]) -> f64,
    m: usize,
    h: &[f64],
    x: &[f64],
    shift_buf: &mut [f64],
) -> f64 {
    debug_assert_eq!(h.len(), x.len());
    let mut acc = 0.0;
    let coeffs = difference_coefficients(m);
    for (j, c) in coeffs.iter().enumerate() {
        for (b, (xv, hv)) in shift_buf.iter_mut().zip(x.iter().zip(h)) {
            *b = xv + j as f64 * hv;
        }
        acc += c * phi(shift_buf);
    }
    acc
}

/// Convenience wrapper allocating its own shift buffer.
pub fn delta_m_at(phi: &dyn Fn(&[f64]) -> f64, m: usize, h: &[f64], x: &[f64]) -> f64 {
    let mut buf = vec![0.0; x.len()];
    delta_m_fn(phi, m, h, x, &mut buf)
}

/// m-th difference of a grid function along a lattice-aligned displacement.
///
/// The input is treated as zero outside its box; the output box is enlarged
/// so every nonzero value of the difference is represented.
#[allow(clippy::needless_range_loop)] // several arrays share the axis index
pub fn delta_m_grid(f: &GridFunction, m: usize, h: &[f64]) -> Result<GridFunction> {
    ensure(m >= 1, || "difference order m must be at least 1".into())?;
    let cells = f.domain.cells_of(h)?;
    let d = f.dim();
    let coeffs = difference_coefficients(m);

    // Output index range per axis: input cell 0..n widened on the side the
    // shifts reach into.
    let mut out_shape = Vec::with_capacity(d);
    let mut out_origin = Vec::with_capacity(d);
    let mut base = Vec::with_capacity(d); // absolute input cell of output cell 0
    for a in 0..d {
        let k = cells[a];
        let widen = m as i64 * k.abs();
        out_shape.push(f.domain.shape[a] + widen as usize);
        let lo = if k > 0 { -(m as i64) * k } else { 0 };
        base.push(lo);
        out_origin.push(f.domain.origin[a] + lo as f64 * f.domain.spacing);
    }
    let out_domain = GridDomain::new(out_origin, f.domain.spacing, out_shape)?;

    let mut out = GridFunction::zeros(out_domain);
    let d_out = out.domain.clone();
    let mut idx = vec![0usize; d];
    let mut abs_cell = vec![0i64; d];
    for flat in 0..d_out.len() {
        d_out.unravel(flat, &mut idx);
        for a in 0..d {
            abs_cell[a] = idx[a] as i64 + base[a];
        }
        let mut acc = 0.0;
        'terms: for (j, c) in coeffs.iter().enumerate() {
            let mut in_flat = 0usize;
            for a in 0..d {
                let cell = abs_cell[a] + j as i64 * cells[a];
                if cell < 0 || cell >= f.domain.shape[a] as i64 {
                    continue 'terms; // zero extension
                }
                in_flat = in_flat * f.domain.shape[a] + cell as usize;
            }
            acc += c * f.values[in_flat];
        }
        out.values[flat] = acc;
    }
    Ok(out)
}

/// Dyadic displacement set: `2^-k e` along every axis plus the diagonal,
/// for k in `k_range`. Axis steps align with any grid whose spacing divides
/// the smallest displacement.
pub fn dyadic_h_set(dim: usize, k_range: std::ops::RangeInclusive<u32>) -> Vec<Vec<f64>> {
    let mut hs = Vec::new();
    for k in k_range {
        let step = 0.5_f64.powi(k as i32);
        for a in 0..dim {
            let mut h = vec![0.0; dim];
            h[a] = step;
            hs.push(h);
        }
        if dim > 1 {
            hs.push(vec![step; dim]);
        }
    }
    hs
}

/// Besov seminorm at summability q = infinity:
/// `max over h of ||D_h^m f||_p / |h|^s`.
///
/// Needs `s <= m`; every displacement must sit on the lattice. At `s = m`
/// the quantity is the Lipschitz-type ratio; the equivalence with the
/// Littlewood-Paley norm holds for `s` strictly below `m`.
pub fn besov_seminorm(
    f: &GridFunction,
    s: f64,
    p: f64,
    m: usize,
    h_grid: &[Vec<f64>],
) -> Result<f64> {
    ensure(s > 0.0, || format!("s must be positive, got {s}"))?;
    ensure((m as f64) >= s, || {
        format!("difference order m = {m} must not fall below s = {s}")
    })?;
    ensure(!h_grid.is_empty(), || "empty displacement set".into())?;
    let mut best = 0.0_f64;
    for h in h_grid {
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        ensure(norm > 0.0 && norm <= 1.0, || {
            format!("displacements must satisfy 0 < |h| <= 1, got |h| = {norm}")
        })?;
        let diff = delta_m_grid(f, m, h)?;
        let val = diff.lp_norm(p)? / norm.powf(s);
        best = best.max(val);
    }
    Ok(best)
}

/// Position-first seminorm: L^q norm of the difference maximal function.
///
/// Valid as a Triebel-Lizorkin-type seminorm in the regime where first
/// differences characterize the space, `alpha` above `d/q`.
pub fn triebel_lizorkin_seminorm(
    phi: &dyn Fn(&[f64]) -> f64,
    alpha: f64,
    domain: &GridDomain,
    h_grid: &[Vec<f64>],
    q: f64,
) -> Result<f64> {
    let d = domain.dim() as f64;
    ensure(alpha > d / q, || {
        format!(
            "difference characterization needs alpha > d/q, got alpha = {alpha}, d/q = {}",
            d / q
        )
    })?;
    lizorkin_maximal(phi, alpha, domain, h_grid)?.lp_norm(q)
}

/// Maximal function of first differences:
/// `Phi(x) = max over h of |D_h phi(x)| / |h|^alpha`, sampled on a grid.
pub fn lizorkin_maximal(
    phi: &dyn Fn(&[f64]) -> f64,
    alpha: f64,
    domain: &GridDomain,
    h_grid: &[Vec<f64>],
) -> Result<GridFunction> {
    ensure(alpha > 0.0 && alpha < 1.0, || {
        format!("alpha must lie in (0, 1), got {alpha}")
    })?;
    ensure(!h_grid.is_empty(), || "empty displacement set".into())?;
    domain.validate()?;
    let d = domain.dim();
    let mut out = GridFunction::zeros(domain.clone());
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for flat in 0..domain.len() {
        domain.unravel(flat, &mut idx);
        domain.point(&idx, &mut x);
        let mut best = 0.0_f64;
        for h in h_grid {
            let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let dv = delta_m_fn(phi, 1, h, &x, &mut buf);
            best = best.max(dv.abs() / norm.powf(alpha));
        }
        out.values[flat] = best;
    }
    Ok(out)
}
