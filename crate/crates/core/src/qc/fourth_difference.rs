use serde::{Deserialize, Serialize};

use super::{QcError, QcFlag, QcReport, Result};
use crate::model::TimeSeries;
use crate::stats;

/// Multiplier on the robust sigma of the differences when no threshold is given.
pub const DEFAULT_SIGMA_MULTIPLIER: f64 = 4.0;

/// The default threshold never drops below this fraction of max |x|, so
/// floating-point residue on smooth data is not flagged.
const ROUNDOFF_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FourthDifferenceOptions {
    /// absolute threshold in data units; `None` uses 4 × robust sigma of d4
    pub threshold: Option<f64>,
    /// the test passes while flagged windows stay at or below this fraction
    pub max_flag_fraction: f64,
}

impl Default for FourthDifferenceOptions {
    fn default() -> Self {
        Self { threshold: None, max_flag_fraction: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourthDifference {
    /// `d4[i]` covers samples `i..=i+4`
    pub d4: Vec<f64>,
    pub threshold: f64,
    pub report: QcReport,
}

/// `x[i] - 4x[i+1] + 6x[i+2] - 4x[i+3] + x[i+4]`
pub fn fourth_differences(x: &[f64]) -> Vec<f64> {
    x.windows(5).map(|w| w[0] - 4.0 * w[1] + 6.0 * w[2] - 4.0 * w[3] + w[4]).collect()
}

/// Flags windows whose fourth difference exceeds the threshold.
///
/// Flag indices refer to `d4`; the flag time is that of the window's centre
/// sample.
pub fn fourth_difference(
    series: &TimeSeries<f64>,
    opts: FourthDifferenceOptions,
) -> Result<FourthDifference> {
    if series.len() < 5 {
        return Err(QcError::TooShort { got: series.len(), needed: 5 });
    }
    let d4 = fourth_differences(series.values());
    let threshold = match opts.threshold {
        Some(t) if t >= 0.0 => t,
        Some(t) => return Err(QcError::InvalidParameter(format!("threshold {t} < 0"))),
        None => {
            let scale = series.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let robust = DEFAULT_SIGMA_MULTIPLIER * stats::robust_sigma(&d4).unwrap_or(0.0);
            robust.max(ROUNDOFF_FLOOR * scale)
        }
    };
    let flags: Vec<QcFlag> = d4
        .iter()
        .enumerate()
        .filter(|(_, d)| d.abs() > threshold)
        .map(|(i, d)| QcFlag { index: i, t: Some(series.timestamps()[i + 2]), location: None, value: *d })
        .collect();
    let max_abs = d4.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let frac = flags.len() as f64 / d4.len() as f64;
    let mut report = QcReport::new("fourth_difference")
        .stat("max_abs_d4", max_abs)
        .stat("threshold", threshold)
        .stat("flagged", flags.len() as f64)
        .stat("flagged_fraction", frac)
        .stat("windows", d4.len() as f64);
    if opts.threshold.is_none() {
        report = report.note("threshold = 4 x 1.4826 x MAD of d4");
    }
    report.pass = frac <= opts.max_flag_fraction;
    report.flags = flags;
    Ok(FourthDifference { d4, threshold, report })
}
