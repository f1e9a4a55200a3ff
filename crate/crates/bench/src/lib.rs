//! Deterministic inputs shared by the benchmarks.

use aerosurvey_core::model::ScalarSample;
use aerosurvey_core::qc::SpectraMatrix;
use aerosurvey_core::{AccelSample, TimeSeries, UtmPoint};

/// Two-tone accelerometer record at `rate` Hz.
pub fn accel_record(n: usize, rate: f64) -> TimeSeries<AccelSample> {
    let t: Vec<f64> = (0..n).map(|i| i as f64 / rate).collect();
    let v = t
        .iter()
        .map(|t| {
            let a = 2.0 * (2.0 * std::f64::consts::PI * 33.0 * t).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * 120.0 * t).sin();
            AccelSample { ax: a, ay: 0.5 * a, az: 9.81 + 0.1 * a }
        })
        .collect();
    TimeSeries::new(t, v).expect("increasing")
}

/// Lawnmower-like point cloud over a smooth field.
pub fn line_samples(lines: usize, per_line: usize, spacing: f64) -> Vec<ScalarSample> {
    let mut out = Vec::with_capacity(lines * per_line);
    for l in 0..lines {
        for k in 0..per_line {
            let (x, y) = (k as f64, l as f64 * spacing);
            out.push(ScalarSample {
                position: UtmPoint::flat(x, y),
                value: 54000.0 + 20.0 * (x / 80.0).sin() * (y / 60.0).cos(),
            });
        }
    }
    out
}

/// Smooth rank-2 spectra with a deterministic ripple standing in for noise.
pub fn spectra(rows: usize, cols: usize) -> SpectraMatrix {
    let data = (0..rows)
        .flat_map(|i| {
            (0..cols).map(move |j| {
                let (i, j) = (i as f64, j as f64);
                let a = 40.0 * (-j / 8.0).exp() * (1.0 + 0.3 * (i / 9.0).sin());
                let b = 5.0 * (-(j - 20.0).powi(2) / 8.0).exp() * (1.0 + 0.5 * (i / 13.0).cos());
                a + b + 0.5 * ((i * 7.0 + j * 3.0).sin() + 1.0)
            })
        })
        .collect();
    SpectraMatrix::new(rows, cols, data).expect("non-negative")
}
