//! Log-log scaling fits: the verdict object for every rate claim.

use super::EstimateWithError;
use crate::error::{Error, Result};
use crate::numerics::ensure;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Fitted log-log slope with a 95% confidence halfwidth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_halfwidth: f64,
    pub n_points: usize,
    pub residual_rms: f64,
}

/// Relative noise floor for points reported without a standard error.
const EXACT_SE_FLOOR: f64 = 1e-15;

/// Weighted least squares on `(log scale, log value)`.
///
/// Points within three standard errors of zero (or nonpositive) carry no
/// usable log-scale information and are dropped; at least three must
/// survive. Per-point standard errors propagate to the slope variance
/// through the delta method `se_log = stderr / value`.
pub fn fit_scaling(pairs: &[(f64, EstimateWithError)]) -> Result<ScalingFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (scale, est) in pairs {
        ensure(scale.is_finite() && *scale > 0.0, || {
            format!("scales must be positive, got {scale}")
        })?;
        if !(est.value.is_finite() && est.value > 0.0) {
            continue;
        }
        if est.value <= 3.0 * est.stderr {
            continue; // noise floor
        }
        let se_log = (est.stderr / est.value).max(EXACT_SE_FLOOR);
        xs.push(scale.ln());
        ys.push(est.value.ln());
        ws.push(1.0 / (se_log * se_log));
    }
    let k = xs.len();
    if k < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 points above the noise floor, kept {k} of {}",
            pairs.len()
        )));
    }
    let wsum: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..k {
        sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
        sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all scales coincide; no slope is identified".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let var_slope = 1.0 / sxx;
    let mut ss = 0.0;
    for i in 0..k {
        let r = ys[i] - (intercept + slope * xs[i]);
        ss += r * r;
    }
    Ok(ScalingFit {
        slope,
        intercept,
        ci_halfwidth: 1.96 * var_slope.sqrt(),
        n_points: k,
        residual_rms: (ss / k as f64).sqrt(),
    })
}

/// Sweep CSV: `scale,value,stderr` with a header row.
pub fn write_sweep_csv(
    pairs: &[(f64, EstimateWithError)],
    w: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(w, "scale,value,stderr")?;
    for (scale, est) in pairs {
        writeln!(w, "{scale},{},{}", est.value, est.stderr)?;
    }
    Ok(())
}

/// Reads a sweep CSV produced by [`write_sweep_csv`].
pub fn read_sweep_csv(r: impl BufRead) -> Result<Vec<(f64, EstimateWithError)>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<sweep csv>", e))?;
        if lineno == 0 {
            if line.trim() != "scale,value,stderr" {
                return Err(Error::Config(format!(
                    "sweep csv must start with 'scale,value,stderr', got '{line}'"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!(
                "line {}: expected 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))
        };
        out.push((
            parse(fields[0])?,
            EstimateWithError {
                value: parse(fields[1])?,
                stderr: parse(fields[2])?,
                n: 0,
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::{make_stream, SeedSpec};

    fn exact(value: f64) -> EstimateWithError {
        EstimateWithError {
            value,
            stderr: 0.0,
            n: 1,
        }
    }

    #[test]
    fn exact_power_law_recovered() {
        let pairs: Vec<(f64, EstimateWithError)> = (1..=6)
            .map(|k| {
                let s = 0.5_f64.powi(k);
                (s, exact(7.0 * s.powf(1.5)))
            })
            .collect();
        let fit = fit_scaling(&pairs).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12, "slope {}", fit.slope);
        assert!(fit.residual_rms < 1e-12);
        assert!((fit.intercept - 7.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_points_insufficient() {
        let pairs = vec![(0.5, exact(1.0)), (0.25, exact(0.5))];
        assert!(matches!(
            fit_scaling(&pairs),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn noise_floor_drops_dominated_points() {
        let mut pairs: Vec<(f64, EstimateWithError)> = (1..=5)
            .map(|k| {
                let s = 0.5_f64.powi(k);
                (s, exact(s * s))
            })
            .collect();
        pairs.push((
            0.5_f64.powi(6),
            EstimateWithError {
                value: 1e-9,
                stderr: 1e-9,
                n: 100,
            },
        ));
        let fit = fit_scaling(&pairs).unwrap();
        assert_eq!(fit.n_points, 5);
        assert!((fit.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ci_covers_true_slope() {
        // 1% multiplicative noise; the true slope must fall inside the 95%
        // interval in at least 90 of 100 seeded trials.
        let true_slope = 1.3;
        let scales: Vec<f64> = (1..=6).map(|k| 0.5_f64.powi(k)).collect();
        let mut hits = 0;
        for trial in 0..100u64 {
            let mut stream = make_stream(SeedSpec::new(500 + trial, 0));
            let pairs: Vec<(f64, EstimateWithError)> = scales
                .iter()
                .map(|&s| {
                    let clean = 3.0 * s.powf(true_slope);
                    let value = clean * (1.0 + 0.01 * stream.next_gaussian());
                    (
                        s,
                        EstimateWithError {
                            value,
                            stderr: 0.01 * value,
                            n: 1000,
                        },
                    )
                })
                .collect();
            let fit = fit_scaling(&pairs).unwrap();
            if (fit.slope - true_slope).abs() <= fit.ci_halfwidth {
                hits += 1;
            }
        }
        assert!(hits >= 90, "coverage {hits}/100");
    }

    #[test]
    fn sweep_csv_roundtrip() {
        let pairs = vec![
            (0.5, exact(1.25)),
            (
                0.25,
                EstimateWithError {
                    value: 0.3,
                    stderr: 0.01,
                    n: 0,
                },
            ),
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&pairs, &mut buf).unwrap();
        let back = read_sweep_csv(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, 0.5);
        assert_eq!(back[1].1.value, 0.3);
        assert_eq!(back[1].1.stderr, 0.01);
    }
}
