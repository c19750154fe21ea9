//! Least-squares power-law fits on `(log δ, log value)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scan::ScanRow;
use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Lower,
    Upper,
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" => Ok(Field::Lower),
            "upper" => Ok(Field::Upper),
            other => Err(Error::Parse {
                input: s.to_string(),
                key: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Lower => "lower",
            Field::Upper => "upper",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub point_count: usize,
}

/// Fits `log y = slope · log x + intercept`. Points with non-positive or
/// non-finite coordinates are ignored; at least four must remain.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{n} finite positive points, need at least {MIN_FIT_POINTS}"
        )));
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        point_count: n,
    })
}

/// Power-law fit of `field` against `δ` over `rows`.
pub fn fit_exponent(rows: &[ScanRow], field: Field) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.is_error())
        .map(|r| {
            (
                r.delta,
                match field {
                    Field::Lower => r.lower,
                    Field::Upper => r.upper,
                },
            )
        })
        .collect();
    fit_power_law(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scan::log_spaced;

    #[test]
    fn recovers_synthetic_exponents() {
        let ds = log_spaced(1e-2, 1e-5, 8);
        for p in [-0.75, -0.5, -0.25, -1.0 / 6.0, 0.0] {
            let pts: Vec<(f64, f64)> = ds.iter().map(|d| (*d, 7.0 * d.powf(p))).collect();
            let f = fit_power_law(&pts).unwrap();
            assert!((f.slope - p).abs() < 1e-12, "{p}: {}", f.slope);
            assert!((f.intercept - 7f64.ln()).abs() < 1e-10);
            assert!(f.r_squared > 1.0 - 1e-12);
            assert_eq!(f.point_count, 8);
        }
    }

    #[test]
    fn too_few_points() {
        let pts = [(1e-2, 1.0), (1e-3, 2.0), (1e-4, f64::INFINITY), (1e-5, 0.0), (1e-6, 3.0)];
        assert!(matches!(fit_power_law(&pts), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn field_parsing() {
        assert_eq!("Upper".parse::<Field>().unwrap(), Field::Upper);
        assert!("middle".parse::<Field>().is_err());
    }
}
