//! Buzz-test analysis: platform noise versus UAV-sensor separation.
//!
//! Each pass is a trace recorded with the UAV held at a known separation from
//! a stationary sensor. Its noise amplitude is the robust half-range
//! `(P97.5 - P2.5) / 2` of the residual left after a moving-median detrend.
//! Amplitudes are combined per separation and a power law
//! `A(r) = a1 * r^-p` is fitted in log-log space. The threshold separation
//! is where the fitted amplitude drops to the configured noise floor.
//!
//! When an ambient (UAV absent) amplitude is supplied, it is removed in
//! quadrature from each measured amplitude before fitting, and the log-log
//! fit is weighted by the inverse variance of the resulting excess.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TimeSeries;
use crate::stats;

#[derive(Debug, Error, PartialEq)]
pub enum EmiError {
    #[error("trace spans {span} s, needs at least {needed} s (3 detrend windows)")]
    TraceTooShort { span: f64, needed: f64 },
    #[error("need at least 3 distinct separations, got {0}")]
    TooFewSeparations(usize),
    #[error("amplitude exceeds the noise floor at every measured separation")]
    NeverBelowFloor,
    #[error("curve has no power-law fit")]
    NoFitAvailable,
    #[error("curve has neither a fit nor 3 decreasing points")]
    InsufficientCurve,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = EmiError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PassKind {
    Overflight,
    HoverYaw,
}

#[derive(Debug, Clone)]
pub struct BuzzPass {
    /// UAV to sensor distance, m
    pub separation: f64,
    pub kind: PassKind,
    pub trace: TimeSeries<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmiConfig {
    /// acceptable noise level, same units as the traces
    pub noise_floor: f64,
    /// interference limit, percent of signal scale
    pub interference_pct_limit: f64,
    pub detrend_window_s: f64,
    /// ambient amplitude measured without the UAV, removed in quadrature
    pub ambient_amplitude: Option<f64>,
}

impl Default for EmiConfig {
    fn default() -> Self {
        Self { noise_floor: 0.2, interference_pct_limit: 4.0, detrend_window_s: 2.0, ambient_amplitude: None }
    }
}

impl EmiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_floor > 0.0) || !(self.interference_pct_limit > 0.0) {
            return Err(EmiError::InvalidConfig("noise floor and interference limit must be > 0".into()));
        }
        if !(self.detrend_window_s > 0.0) {
            return Err(EmiError::InvalidConfig("detrend window must be > 0".into()));
        }
        if self.ambient_amplitude.is_some_and(|a| !(a >= 0.0)) {
            return Err(EmiError::InvalidConfig("ambient amplitude must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// amplitude at 1 m
    pub a1: f64,
    /// decay exponent
    pub p: f64,
}

impl PowerLawFit {
    pub fn amplitude_at(&self, r: f64) -> f64 {
        self.a1 * r.powf(-self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub separation: f64,
    /// platform-induced amplitude (ambient removed when configured)
    pub amplitude: f64,
    /// median measured amplitude before ambient removal
    pub measured: f64,
    pub passes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCurve {
    pub points: Vec<NoisePoint>,
    pub fit: Option<PowerLawFit>,
    /// set when no fit could be made
    pub flag: Option<String>,
}

/// Robust half-range of the detrended trace.
pub fn noise_amplitude(trace: &TimeSeries<f64>, detrend_window_s: f64) -> Result<f64> {
    let span = trace.duration();
    let needed = 3.0 * detrend_window_s;
    if trace.len() < 3 || span < needed {
        return Err(EmiError::TraceTooShort { span, needed });
    }
    let trend = stats::moving_median(trace.timestamps(), trace.values(), detrend_window_s);
    let mut resid: Vec<f64> = trace.values().iter().zip(&trend).map(|(v, m)| v - m).collect();
    resid.sort_by(f64::total_cmp);
    let hi = stats::percentile_sorted(&resid, 0.975);
    let lo = stats::percentile_sorted(&resid, 0.025);
    Ok(((hi - lo) / 2.0).max(0.0))
}

/// Median amplitude per separation and a power-law fit across separations.
pub fn build_noise_curve(passes: &[BuzzPass], cfg: &EmiConfig) -> Result<NoiseCurve> {
    cfg.validate()?;
    let mut measured: Vec<(f64, f64)> = passes
        .iter()
        .map(|p| {
            if !(p.separation > 0.0) {
                return Err(EmiError::InvalidConfig(format!("separation must be > 0, got {}", p.separation)));
            }
            Ok((p.separation, noise_amplitude(&p.trace, cfg.detrend_window_s)?))
        })
        .collect::<Result<_>>()?;
    measured.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for (r, a) in measured {
        match groups.last_mut() {
            Some((gr, amps)) if (r - *gr).abs() <= 1e-9 * gr.max(1.0) => amps.push(a),
            _ => groups.push((r, vec![a])),
        }
    }
    if groups.len() < 3 {
        return Err(EmiError::TooFewSeparations(groups.len()));
    }

    let mut points = Vec::with_capacity(groups.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (r, amps) in &groups {
        let m = stats::median(amps).unwrap_or(0.0);
        let (excess, weight) = match cfg.ambient_amplitude {
            Some(b) => {
                let e = (m * m - b * b).max(0.0).sqrt();
                let w = if m > 0.0 { (e / m).powi(4) } else { 0.0 };
                (e, w)
            }
            None => (m, 1.0),
        };
        points.push(NoisePoint { separation: *r, amplitude: excess, measured: m, passes: amps.len() });
        if excess > 0.0 && weight > 0.0 {
            xs.push(r.ln());
            ys.push(excess.ln());
            ws.push(weight);
        }
    }

    let fit = stats::weighted_line_fit(&xs, &ys, &ws)
        .map(|(intercept, slope)| PowerLawFit { a1: intercept.exp(), p: -slope });
    let flag = match fit {
        Some(_) => None,
        None if points.iter().all(|p| p.amplitude == 0.0) => {
            Some("all amplitudes are zero; no fit".to_owned())
        }
        None => Some("fewer than two positive amplitudes; no fit".to_owned()),
    };
    Ok(NoiseCurve { points, fit, flag })
}

fn round_up_half_metre(r: f64) -> f64 {
    ((r - 1e-9) / 0.5).ceil() * 0.5
}

/// Smallest separation at which the platform noise is at or below the floor,
/// rounded up to the next 0.5 m.
pub fn threshold_separation(curve: &NoiseCurve, cfg: &EmiConfig) -> Result<f64> {
    let floor = cfg.noise_floor;
    if !(floor > 0.0) {
        return Err(EmiError::InvalidConfig("noise floor must be > 0".into()));
    }
    let min_sep = curve.points.first().map(|p| p.separation).ok_or(EmiError::InsufficientCurve)?;
    if !curve.points.iter().any(|p| p.amplitude <= floor) {
        return Err(EmiError::NeverBelowFloor);
    }
    if let Some(fit) = curve.fit.filter(|f| f.p > 0.0 && f.a1 > 0.0) {
        let r = (fit.a1 / floor).powf(1.0 / fit.p);
        return Ok(round_up_half_metre(r.max(min_sep)));
    }
    let decreasing =
        curve.points.len() >= 3 && curve.points.windows(2).all(|w| w[1].amplitude <= w[0].amplitude);
    if !decreasing {
        return Err(EmiError::InsufficientCurve);
    }
    let first = curve.points.iter().find(|p| p.amplitude <= floor).ok_or(EmiError::NeverBelowFloor)?;
    Ok(round_up_half_metre(first.separation))
}

/// Fitted noise at `separation` as a percentage of `signal_scale`.
pub fn interference_percent(curve: &NoiseCurve, separation: f64, signal_scale: f64) -> Result<f64> {
    let fit = curve.fit.ok_or(EmiError::NoFitAvailable)?;
    if !(separation > 0.0) || !(signal_scale > 0.0) {
        return Err(EmiError::InvalidConfig("separation and signal scale must be > 0".into()));
    }
    Ok(100.0 * fit.amplitude_at(separation) / signal_scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindResult {
    pub kind: PassKind,
    pub curve: NoiseCurve,
    pub threshold_m: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuzzAnalysis {
    pub per_kind: Vec<KindResult>,
    /// largest threshold over pass kinds
    pub threshold_m: f64,
    pub governing_kind: PassKind,
}

impl BuzzAnalysis {
    pub fn governing_curve(&self) -> &NoiseCurve {
        &self.per_kind.iter().find(|k| k.kind == self.governing_kind).expect("governing kind present").curve
    }
}

/// Builds one curve per pass kind and reports the most conservative threshold.
///
/// Kinds with fewer than three separations are skipped. Any analysed kind that
/// never drops below the floor makes the whole analysis fail.
pub fn analyze_buzz(passes: &[BuzzPass], cfg: &EmiConfig) -> Result<BuzzAnalysis> {
    let mut by_kind: BTreeMap<PassKind, Vec<BuzzPass>> = BTreeMap::new();
    for p in passes {
        by_kind.entry(p.kind).or_default().push(p.clone());
    }
    let mut per_kind = Vec::new();
    let mut best: Option<(f64, PassKind)> = None;
    let mut last_err = EmiError::TooFewSeparations(0);
    for (kind, group) in by_kind {
        let curve = match build_noise_curve(&group, cfg) {
            Ok(c) => c,
            Err(EmiError::TooFewSeparations(n)) => {
                last_err = EmiError::TooFewSeparations(n);
                continue;
            }
            Err(e) => return Err(e),
        };
        let threshold = threshold_separation(&curve, cfg)?;
        if best.is_none_or(|(b, _)| threshold > b) {
            best = Some((threshold, kind));
        }
        per_kind.push(KindResult { kind, curve, threshold_m: Some(threshold), error: None });
    }
    let (threshold_m, governing_kind) = best.ok_or(last_err)?;
    Ok(BuzzAnalysis { per_kind, threshold_m, governing_kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(rate: f64, secs: f64, f: impl FnMut(f64) -> f64) -> TimeSeries<f64> {
        let n = (rate * secs) as usize;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / rate).collect();
        let v = t.iter().copied().map(f).collect();
        TimeSeries::new(t, v).unwrap()
    }

    /// Deterministic unit waveform: evenly spread values in [-1, 1].
    fn unit_wave(i: usize) -> f64 {
        let k = (i * 37) % 101;
        -1.0 + 2.0 * k as f64 / 100.0
    }

    fn scaled_pass(r: f64, amp: f64, c: f64) -> BuzzPass {
        let mut i = 0;
        BuzzPass {
            separation: r,
            kind: PassKind::Overflight,
            trace: series(20.0, 30.0, |_| {
                i += 1;
                amp / c * unit_wave(i)
            }),
        }
    }

    fn unit_amplitude() -> f64 {
        let mut i = 0;
        let s = series(20.0, 30.0, |_| {
            i += 1;
            unit_wave(i)
        });
        noise_amplitude(&s, 2.0).unwrap()
    }

    #[test]
    fn constant_trace_zero() {
        let s = series(10.0, 20.0, |_| 42.0);
        assert_eq!(noise_amplitude(&s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn ramp_plus_uniform_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = series(20.0, 120.0, |t| 0.05 * t + rng.random_range(-0.2..0.2));
        let a = noise_amplitude(&s, 2.0).unwrap();
        assert!((a - 0.2).abs() <= 0.03, "amplitude {a}");
    }

    #[test]
    fn single_spike_is_clipped() {
        let s = series(10.0, 60.0, |t| if (t - 30.0).abs() < 1e-9 { 5.0 } else { 1.0 });
        let a = noise_amplitude(&s, 2.0).unwrap();
        assert!(a < 0.01, "amplitude {a}");
    }

    #[test]
    fn short_trace_rejected() {
        let s = series(10.0, 5.0, |t| t);
        assert!(matches!(noise_amplitude(&s, 2.0), Err(EmiError::TraceTooShort { .. })));
    }

    #[test]
    fn noiseless_dipole_law_recovered() {
        let c = unit_amplitude();
        let passes: Vec<_> = (4..=15).map(|r| scaled_pass(r as f64, 54.0 * (r as f64).powi(-3), c)).collect();
        let curve = build_noise_curve(&passes, &EmiConfig::default()).unwrap();
        let fit = curve.fit.unwrap();
        assert!((fit.p - 3.0).abs() < 1e-6 * 3.0);
        assert!((fit.a1 - 54.0).abs() < 1e-6 * 54.0);
    }

    #[test]
    fn all_zero_curve_is_flagged() {
        let passes: Vec<_> = (4..=6)
            .map(|r| BuzzPass {
                separation: r as f64,
                kind: PassKind::HoverYaw,
                trace: series(10.0, 20.0, |_| 3.0),
            })
            .collect();
        let curve = build_noise_curve(&passes, &EmiConfig::default()).unwrap();
        assert!(curve.fit.is_none());
        assert!(curve.flag.is_some());
        assert!(curve.points.iter().all(|p| p.amplitude == 0.0));
    }

    #[test]
    fn two_separations_rejected() {
        let c = unit_amplitude();
        let passes = vec![scaled_pass(4.0, 1.0, c), scaled_pass(5.0, 0.5, c)];
        assert_eq!(build_noise_curve(&passes, &EmiConfig::default()), Err(EmiError::TooFewSeparations(2)));
    }

    fn fitted(a1: f64, p: f64, seps: &[f64]) -> NoiseCurve {
        let fit = PowerLawFit { a1, p };
        NoiseCurve {
            points: seps
                .iter()
                .map(|&r| NoisePoint {
                    separation: r,
                    amplitude: fit.amplitude_at(r),
                    measured: fit.amplitude_at(r),
                    passes: 1,
                })
                .collect(),
            fit: Some(fit),
            flag: None,
        }
    }

    #[test]
    fn threshold_closed_form() {
        let seps: Vec<f64> = (4..=15).map(f64::from).collect();
        let curve = fitted(145.8, 3.0, &seps);
        let r = threshold_separation(&curve, &EmiConfig::default()).unwrap();
        assert_eq!(r, 9.0);
    }

    #[test]
    fn threshold_at_smallest_separation() {
        let curve = fitted(0.5, 3.0, &[4.0, 5.0, 6.0]);
        assert_eq!(threshold_separation(&curve, &EmiConfig::default()).unwrap(), 4.0);
    }

    #[test]
    fn flat_curve_never_below_floor() {
        let curve = fitted(1.0, 0.0, &[4.0, 5.0, 6.0]);
        assert_eq!(threshold_separation(&curve, &EmiConfig::default()), Err(EmiError::NeverBelowFloor));
    }

    #[test]
    fn threshold_from_points_without_fit() {
        let mut curve = fitted(145.8, 3.0, &[4.0, 8.0, 12.0]);
        curve.fit = None;
        assert_eq!(threshold_separation(&curve, &EmiConfig::default()).unwrap(), 12.0);
    }

    #[test]
    fn interference_cases() {
        let curve = fitted(54.0, 3.0, &[2.0, 3.0, 4.0]);
        assert!((interference_percent(&curve, 3.0, 10.0).unwrap() - 20.0).abs() < 1e-12);
        // scale chosen so that A(6)/scale = 3.5 %
        let scale = 54.0 / 216.0 / 0.035;
        assert!((interference_percent(&curve, 6.0, scale).unwrap() - 3.5).abs() < 1e-12);
        let r_floor = (54.0f64 / 0.2).cbrt();
        assert!((interference_percent(&curve, r_floor, 0.2).unwrap() - 100.0).abs() < 1e-9);
        let mut nofit = curve.clone();
        nofit.fit = None;
        assert_eq!(interference_percent(&nofit, 3.0, 1.0), Err(EmiError::NoFitAvailable));
    }

    #[test]
    fn conservative_kind_governs() {
        let c = unit_amplitude();
        let mut passes: Vec<_> =
            (4..=10).map(|r| scaled_pass(r as f64, 54.0 * (r as f64).powi(-3), c)).collect();
        passes.extend((4..=14).map(|r| {
            let mut p = scaled_pass(r as f64, 145.8 * (r as f64).powi(-3), c);
            p.kind = PassKind::HoverYaw;
            p
        }));
        let a = analyze_buzz(&passes, &EmiConfig::default()).unwrap();
        assert_eq!(a.governing_kind, PassKind::HoverYaw);
        assert_eq!(a.threshold_m, 9.0);
        assert_eq!(a.per_kind.len(), 2);
    }

    proptest! {
        #[test]
        fn amplitude_translation_and_scale(offset in -1e3f64..1e3, scale in 0.1f64..50.0, seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mk = |f: &dyn Fn(f64) -> f64| {
                let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.1).collect();
                TimeSeries::new(t, base.iter().map(|v| f(*v)).collect()).unwrap()
            };
            let a0 = noise_amplitude(&mk(&|v| v), 2.0).unwrap();
            let a1 = noise_amplitude(&mk(&|v| v + offset), 2.0).unwrap();
            let a2 = noise_amplitude(&mk(&|v| v * scale), 2.0).unwrap();
            prop_assert!((a1 - a0).abs() <= 1e-9 * (1.0 + offset.abs()));
            prop_assert!((a2 - scale * a0).abs() <= 1e-9 * scale);
        }

        #[test]
        fn threshold_monotone_in_floor(a1 in 1.0f64..500.0, p in 1.0f64..4.0, f1 in 0.01f64..1.0, f2 in 0.01f64..1.0) {
            let seps: Vec<f64> = (1..=40).map(f64::from).collect();
            let curve = fitted(a1, p, &seps);
            let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
            let cfg = |f| EmiConfig { noise_floor: f, ..EmiConfig::default() };
            if let (Ok(r_lo), Ok(r_hi)) = (threshold_separation(&curve, &cfg(lo)), threshold_separation(&curve, &cfg(hi))) {
                prop_assert!(r_lo >= r_hi);
            }
        }
    }
}
