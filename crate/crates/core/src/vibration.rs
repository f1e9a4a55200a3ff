//! Accelerometer spectra, isolator damping effectiveness and attenuation
//! bookkeeping.
//!
//! The damping figure of merit is `D = η ζ S / (m n f²)`, with η the initial
//! vibration intensity (m/s²), ζ the isolator damping ratio, S the isolator
//! stiffness (N/m), m the payload mass (kg), n the number of isolators and
//! f the excitation frequency (Hz). Its units do not reduce to a physical
//! transmissibility, so it is only used to rank configurations against each
//! other.

use std::cmp::Ordering;
use std::sync::Arc;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AccelSample, Axis, TimeSeries};
use crate::stats;

/// Minimum trace length accepted by [`amplitude_spectrum`].
pub const MIN_SPECTRUM_SAMPLES: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum VibrationError {
    #[error("series is not uniformly sampled")]
    NonUniformSeries,
    #[error("series too short: {got} samples, need {needed}")]
    TooShort { got: usize, needed: usize },
    #[error("parameter `{name}` must be > 0, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("reduction factor must be > 0, got {0}")]
    NonPositiveFactor(f64),
    #[error("after-trace has zero amplitude")]
    ZeroAfterAmplitude,
    #[error("empty series")]
    EmptySeries,
    #[error("no isolator candidates")]
    NoCandidates,
    #[error("invalid isolator configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = VibrationError> = std::result::Result<T, E>;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(VibrationError::NonPositiveParameter { name, value })
    }
}

// ---------------------------------------------------------------------------
// Damping effectiveness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingInput {
    /// initial vibration intensity, m/s²
    pub eta: f64,
    /// damping ratio
    pub zeta: f64,
    /// isolator stiffness, N/m
    pub stiffness: f64,
    /// payload mass, kg
    pub mass: f64,
    pub count: u32,
    /// excitation frequency, Hz
    pub freq: f64,
}

/// Evaluates `D = η ζ S / (m n f²)`.
pub fn damping_effectiveness(input: &DampingInput) -> Result<f64> {
    let eta = positive("eta", input.eta)?;
    let zeta = positive("zeta", input.zeta)?;
    let s = positive("stiffness", input.stiffness)?;
    let m = positive("mass", input.mass)?;
    let n = positive("count", input.count as f64)?;
    let f = positive("freq", input.freq)?;
    Ok(eta * zeta * s / (m * n * f * f))
}

/// Amplitude ratio expressed in decibels, `20 log10(factor)`.
pub fn attenuation_db(reduction_factor: f64) -> Result<f64> {
    if reduction_factor > 0.0 && reduction_factor.is_finite() {
        Ok(20.0 * reduction_factor.log10())
    } else {
        Err(VibrationError::NonPositiveFactor(reduction_factor))
    }
}

/// Ratio of mean-removed RMS amplitudes on one axis, before over after.
pub fn reduction_factor(
    before: &TimeSeries<AccelSample>,
    after: &TimeSeries<AccelSample>,
    axis: Axis,
) -> Result<f64> {
    let b: Vec<f64> = before.values().iter().map(|s| s.component(axis)).collect();
    let a: Vec<f64> = after.values().iter().map(|s| s.component(axis)).collect();
    let rb = stats::rms_about_mean(&b).ok_or(VibrationError::EmptySeries)?;
    let ra = stats::rms_about_mean(&a).ok_or(VibrationError::EmptySeries)?;
    if ra == 0.0 {
        return Err(VibrationError::ZeroAfterAmplitude);
    }
    if rb == ra {
        return Ok(1.0);
    }
    Ok(rb / ra)
}

// ---------------------------------------------------------------------------
// Isolator selection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IsolatorKind {
    WireRope,
    RubberBall,
}

impl IsolatorKind {
    pub fn name(self) -> &'static str {
        match self {
            IsolatorKind::WireRope => "WireRope",
            IsolatorKind::RubberBall => "RubberBall",
        }
    }
}

/// Per-isolator inputs to the damping figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolatorParams {
    pub eta: f64,
    pub zeta: f64,
    pub stiffness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatorConfig {
    pub kind: IsolatorKind,
    pub count: u32,
    /// mounting angle, degrees; recorded, not used by the damping figure
    #[serde(default)]
    pub mount_angle_deg: f64,
    pub per_isolator: IsolatorParams,
}

/// Rubber-ball mounts are built for 4 to 12 isolators.
pub const RUBBER_BALL_COUNT_RANGE: std::ops::RangeInclusive<u32> = 4..=12;

impl IsolatorConfig {
    pub fn new(
        kind: IsolatorKind,
        count: u32,
        mount_angle_deg: f64,
        per_isolator: IsolatorParams,
    ) -> Result<Self> {
        let cfg = Self { kind, count, mount_angle_deg, per_isolator };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(VibrationError::InvalidConfig("count must be >= 1".into()));
        }
        if self.kind == IsolatorKind::RubberBall && !RUBBER_BALL_COUNT_RANGE.contains(&self.count) {
            return Err(VibrationError::InvalidConfig(format!(
                "rubber-ball count {} outside 4..=12",
                self.count
            )));
        }
        positive("eta", self.per_isolator.eta)?;
        positive("zeta", self.per_isolator.zeta)?;
        positive("stiffness", self.per_isolator.stiffness)?;
        Ok(())
    }

    pub fn damping_input(&self, payload_mass: f64, freq: f64) -> DampingInput {
        DampingInput {
            eta: self.per_isolator.eta,
            zeta: self.per_isolator.zeta,
            stiffness: self.per_isolator.stiffness,
            mass: payload_mass,
            count: self.count,
            freq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedConfig {
    pub rank: usize,
    pub config: IsolatorConfig,
    pub effectiveness: f64,
}

/// Ranks candidates by damping effectiveness at the dominant frequency,
/// best first. Ties fall back to `(kind name, count)` ascending.
pub fn select_configuration(
    candidates: &[IsolatorConfig],
    payload_mass: f64,
    dominant_freq: f64,
) -> Result<Vec<RankedConfig>> {
    if candidates.is_empty() {
        return Err(VibrationError::NoCandidates);
    }
    positive("mass", payload_mass)?;
    positive("freq", dominant_freq)?;
    let mut scored = candidates
        .iter()
        .map(|c| {
            c.validate()?;
            let d = damping_effectiveness(&c.damping_input(payload_mass, dominant_freq))?;
            Ok((c.clone(), d))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|(ca, da), (cb, db)| {
        db.partial_cmp(da)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ca.kind.name().cmp(cb.kind.name()))
            .then_with(|| ca.count.cmp(&cb.count))
    });
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (config, effectiveness))| RankedConfig { rank: i + 1, config, effectiveness })
        .collect())
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub freq: f64,
    pub amplitude: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub sample_rate: f64,
    pub freqs: Vec<f64>,
    /// single-sided amplitude, m/s²
    pub amplitudes: Vec<f64>,
    /// sorted by amplitude, largest first
    pub peaks: Vec<Peak>,
    /// equivalent noise bandwidth of the window, in bins
    pub enbw_bins: f64,
}

impl SpectrumResult {
    /// Mean-square signal power recovered from the amplitude spectrum.
    ///
    /// Comparable to the time-domain mean square of the mean-removed trace.
    pub fn total_power(&self) -> f64 {
        let last = self.amplitudes.len().saturating_sub(1);
        let n_even_nyquist = self
            .freqs
            .last()
            .is_some_and(|f| (f - self.sample_rate / 2.0).abs() < 1e-9 * self.sample_rate.max(1.0));
        let sum: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| if k == 0 || (k == last && n_even_nyquist) { a * a } else { a * a / 2.0 })
            .sum();
        sum / self.enbw_bins
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// minimum peak prominence as a fraction of the largest bin
    pub prominence_frac: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { prominence_frac: 0.1 }
    }
}

/// Single-sided amplitude spectrum of one axis.
///
/// The trace is mean-removed and Hann-tapered; amplitudes are corrected for
/// the window's coherent gain, so a bin-centred sine of amplitude A reads A.
pub fn amplitude_spectrum(
    series: &TimeSeries<AccelSample>,
    axis: Axis,
    opts: SpectrumOptions,
) -> Result<SpectrumResult> {
    if series.len() < MIN_SPECTRUM_SAMPLES {
        return Err(VibrationError::TooShort { got: series.len(), needed: MIN_SPECTRUM_SAMPLES });
    }
    let rate = series.uniform_rate(1e-6).ok_or(VibrationError::NonUniformSeries)?;
    let x: Vec<f64> = series.values().iter().map(|s| s.component(axis)).collect();
    let (freqs, amplitudes, enbw_bins) = windowed_amplitudes(&x, rate);
    let peaks = find_peaks(&freqs, &amplitudes, opts.prominence_frac);
    Ok(SpectrumResult { sample_rate: rate, freqs, amplitudes, peaks, enbw_bins })
}

fn windowed_amplitudes(x: &[f64], rate: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> =
        (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect();
    let coherent: f64 = window.iter().sum();
    let power: f64 = window.iter().map(|w| w * w).sum();
    let mut buf: Vec<Complex<f64>> =
        x.iter().zip(&window).map(|(v, w)| Complex::new((v - mean) * w, 0.0)).collect();
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let half = n / 2;
    let mut freqs = Vec::with_capacity(half + 1);
    let mut amps = Vec::with_capacity(half + 1);
    for (k, c) in buf.iter().take(half + 1).enumerate() {
        let edge = k == 0 || (n.is_multiple_of(2) && k == half);
        let scale = if edge { 1.0 } else { 2.0 };
        freqs.push(k as f64 * rate / n as f64);
        amps.push(scale * c.norm() / coherent);
    }
    let enbw = n as f64 * power / (coherent * coherent);
    (freqs, amps, enbw)
}

/// Local maxima whose topographic prominence reaches `frac` of the largest bin.
fn find_peaks(freqs: &[f64], amps: &[f64], frac: f64) -> Vec<Peak> {
    let max = amps.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = frac * max;
    let mut peaks = Vec::new();
    for i in 1..amps.len().saturating_sub(1) {
        if !(amps[i] > amps[i - 1] && amps[i] >= amps[i + 1]) {
            continue;
        }
        let mut left_min = amps[i];
        for j in (0..i).rev() {
            if amps[j] > amps[i] {
                break;
            }
            left_min = left_min.min(amps[j]);
        }
        let mut right_min = amps[i];
        for &a in &amps[i + 1..] {
            if a > amps[i] {
                break;
            }
            right_min = right_min.min(a);
        }
        let prominence = amps[i] - left_min.max(right_min);
        if prominence > 0.0 && prominence >= threshold {
            peaks.push(Peak { freq: freqs[i], amplitude: amps[i], prominence });
        }
    }
    peaks.sort_by(|a, b| {
        b.amplitude
            .partial_cmp(&a.amplitude)
            .unwrap_or(Ordering::Equal)
            .then(a.freq.partial_cmp(&b.freq).unwrap_or(Ordering::Equal))
    });
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn accel_trace(rate: f64, secs: f64, f: impl Fn(f64) -> f64) -> TimeSeries<AccelSample> {
        let n = (rate * secs) as usize;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / rate).collect();
        let v = t.iter().map(|&t| AccelSample { ax: 0.0, ay: 0.0, az: f(t) }).collect();
        TimeSeries::new(t, v).unwrap()
    }

    /// Plain O(N²) DFT magnitude with the same window and scaling.
    fn direct_dft(x: &[f64], rate: f64) -> Vec<(f64, f64)> {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let w: Vec<f64> = (0..n).map(|i| (PI * i as f64 / n as f64).sin().powi(2)).collect();
        let cg: f64 = w.iter().sum();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for j in 0..n {
                    let ph = -2.0 * PI * (k * j) as f64 / n as f64;
                    let v = (x[j] - mean) * w[j];
                    re += v * ph.cos();
                    im += v * ph.sin();
                }
                let s = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
                (k as f64 * rate / n as f64, s * re.hypot(im) / cg)
            })
            .collect()
    }

    #[test]
    fn unit_case_is_one() {
        let d = DampingInput { eta: 1.0, zeta: 1.0, stiffness: 1.0, mass: 1.0, count: 1, freq: 1.0 };
        assert_eq!(damping_effectiveness(&d).unwrap(), 1.0);
    }

    #[test]
    fn doubling_frequency_quarters() {
        let d = DampingInput { eta: 2.0, zeta: 0.3, stiffness: 5000.0, mass: 8.0, count: 4, freq: 33.0 };
        let d1 = damping_effectiveness(&d).unwrap();
        let d2 = damping_effectiveness(&DampingInput { freq: 66.0, ..d }).unwrap();
        assert!((d1 / d2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hand_arithmetic_case() {
        let d = DampingInput { eta: 2.0, zeta: 0.3, stiffness: 5000.0, mass: 8.0, count: 4, freq: 33.0 };
        // 3000 / (32 * 1089) = 3000 / 34848
        let expected = 3000.0 / 34848.0;
        let got = damping_effectiveness(&d).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.08609).abs() < 5e-6);
    }

    #[test]
    fn non_positive_parameter_rejected() {
        let d = DampingInput { eta: 1.0, zeta: 0.0, stiffness: 1.0, mass: 1.0, count: 1, freq: 1.0 };
        assert!(matches!(
            damping_effectiveness(&d),
            Err(VibrationError::NonPositiveParameter { name: "zeta", .. })
        ));
        assert!(damping_effectiveness(&DampingInput { count: 0, zeta: 1.0, ..d }).is_err());
    }

    #[test]
    fn db_values() {
        assert!((attenuation_db(35.0).unwrap() - 30.88).abs() < 0.01);
        assert_eq!(attenuation_db(1.0).unwrap(), 0.0);
        assert!((attenuation_db(23.0).unwrap() - 27.23).abs() < 0.005);
        assert!(attenuation_db(0.0).is_err());
        assert!(attenuation_db(-2.0).is_err());
    }

    #[test]
    fn pure_tone_peak() {
        let s = accel_trace(256.0, 4.0, |t| 2.0 * (2.0 * PI * 33.0 * t).sin());
        let spec = amplitude_spectrum(&s, Axis::Z, SpectrumOptions::default()).unwrap();
        let top = spec.peaks[0];
        assert!((top.freq - 33.0).abs() <= 0.5);
        assert!((top.amplitude - 2.0).abs() <= 0.1);
    }

    #[test]
    fn constant_signal_has_flat_spectrum() {
        let s = accel_trace(256.0, 1.0, |_| 9.81);
        let spec = amplitude_spectrum(&s, Axis::Z, SpectrumOptions::default()).unwrap();
        assert!(spec.amplitudes.iter().all(|a| *a < 1e-12));
        assert!(spec.peaks.is_empty());
    }

    #[test]
    fn two_tones_match_direct_dft() {
        let f = |t: f64| 1.5 * (2.0 * PI * 33.0 * t).sin() + 0.6 * (2.0 * PI * 76.0 * t).cos();
        let s = accel_trace(256.0, 2.0, f);
        let spec = amplitude_spectrum(&s, Axis::Z, SpectrumOptions::default()).unwrap();
        let x: Vec<f64> = s.values().iter().map(|v| v.az).collect();
        let oracle = direct_dft(&x, 256.0);
        for ((fr, a), (of, oa)) in spec.freqs.iter().zip(&spec.amplitudes).zip(&oracle) {
            assert!((fr - of).abs() < 1e-12);
            assert!((a - oa).abs() < 1e-9);
        }
        assert_eq!(spec.peaks.len(), 2);
        assert!((spec.peaks[0].freq - 33.0).abs() <= 0.5);
        assert!((spec.peaks[1].freq - 76.0).abs() <= 0.5);
    }

    #[test]
    fn spectrum_errors() {
        let s = accel_trace(256.0, 0.2, |t| t);
        assert!(matches!(
            amplitude_spectrum(&s, Axis::Z, SpectrumOptions::default()),
            Err(VibrationError::TooShort { .. })
        ));
        let t: Vec<f64> = (0..100).map(|i| (i as f64).powf(1.1)).collect();
        let v = vec![AccelSample { ax: 0.0, ay: 0.0, az: 0.0 }; 100];
        let s = TimeSeries::new(t, v).unwrap();
        assert_eq!(
            amplitude_spectrum(&s, Axis::Z, SpectrumOptions::default()),
            Err(VibrationError::NonUniformSeries)
        );
    }

    #[test]
    fn reduction_cases() {
        let before = accel_trace(100.0, 2.0, |t| 39.33 * 2f64.sqrt() * (2.0 * PI * 5.0 * t).sin());
        let after = before.map(|s| AccelSample { az: s.az * (1.71 / 39.33), ..*s });
        let r = reduction_factor(&before, &after, Axis::Z).unwrap();
        assert!((r - 23.0).abs() < 0.1);
        assert_eq!(reduction_factor(&before, &before, Axis::Z).unwrap(), 1.0);
        let scaled = before.map(|s| AccelSample { az: s.az / 35.0, ..*s });
        let r35 = reduction_factor(&before, &scaled, Axis::Z).unwrap();
        assert!((r35 - 35.0).abs() < 1e-12 * 35.0);
        let flat = before.map(|s| AccelSample { az: 1.0, ..*s });
        assert_eq!(reduction_factor(&before, &flat, Axis::Z), Err(VibrationError::ZeroAfterAmplitude));
    }

    fn rb(count: u32, stiffness: f64) -> IsolatorConfig {
        IsolatorConfig::new(
            IsolatorKind::RubberBall,
            count,
            0.0,
            IsolatorParams { eta: 40.0, zeta: 0.2, stiffness },
        )
        .unwrap()
    }

    #[test]
    fn single_and_pair_ranking() {
        let one = select_configuration(&[rb(6, 900.0)], 8.0, 33.0).unwrap();
        assert_eq!(one[0].config.count, 6);
        let pair = select_configuration(&[rb(8, 900.0), rb(4, 900.0)], 8.0, 33.0).unwrap();
        assert_eq!(pair[0].config.count, 4);
        assert!(select_configuration(&[], 8.0, 33.0).is_err());
    }

    #[test]
    fn rubber_ball_count_envelope() {
        let p = IsolatorParams { eta: 1.0, zeta: 0.1, stiffness: 100.0 };
        assert!(IsolatorConfig::new(IsolatorKind::RubberBall, 3, 0.0, p).is_err());
        assert!(IsolatorConfig::new(IsolatorKind::RubberBall, 13, 0.0, p).is_err());
        assert!(IsolatorConfig::new(IsolatorKind::WireRope, 4, 45.0, p).is_ok());
    }

    #[test]
    fn sweep_with_stiffness_schedule_matches_brute_force() {
        // Per-ball stiffness grows with count then saturates, so D peaks inside the range.
        let schedule = |n: u32| 600.0 * (n as f64).powi(2) / (1.0 + (n as f64 / 6.0).powi(3));
        let cands: Vec<_> = RUBBER_BALL_COUNT_RANGE.map(|n| rb(n, schedule(n))).collect();
        let ranked = select_configuration(&cands, 8.0, 33.0).unwrap();

        let mut brute: Vec<(u32, f64)> = RUBBER_BALL_COUNT_RANGE
            .map(|n| {
                let d = 40.0 * 0.2 * schedule(n) / (8.0 * n as f64 * 33.0 * 33.0);
                (n, d)
            })
            .collect();
        brute.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let got: Vec<u32> = ranked.iter().map(|r| r.config.count).collect();
        let want: Vec<u32> = brute.iter().map(|b| b.0).collect();
        assert_eq!(got, want);
        assert!(got[0] > 4 && got[0] < 12);
    }

    #[test]
    fn ties_break_by_kind_then_count() {
        let p = IsolatorParams { eta: 1.0, zeta: 0.1, stiffness: 100.0 };
        let a = IsolatorConfig::new(IsolatorKind::WireRope, 4, 45.0, p).unwrap();
        let b = IsolatorConfig::new(IsolatorKind::RubberBall, 4, 0.0, p).unwrap();
        let r = select_configuration(&[a, b], 1.0, 1.0).unwrap();
        assert_eq!(r[0].config.kind, IsolatorKind::RubberBall);
    }

    proptest! {
        #[test]
        fn db_is_additive(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let lhs = attenuation_db(a * b).unwrap();
            let rhs = attenuation_db(a).unwrap() + attenuation_db(b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn parseval_within_ten_percent(
            seed in 0u64..1000,
            n in 256usize..2048,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..n).map(|i| i as f64 / 200.0).collect();
            let v: Vec<AccelSample> = t.iter().map(|&t| AccelSample {
                ax: 0.0, ay: 0.0,
                az: 3.0 * (2.0 * PI * 17.3 * t).sin() + rng.random_range(-1.0..1.0),
            }).collect();
            let s = TimeSeries::new(t, v).unwrap();
            let spec = amplitude_spectrum(&s, Axis::Z, SpectrumOptions::default()).unwrap();
            let z: Vec<f64> = s.values().iter().map(|v| v.az).collect();
            let ms = stats::rms_about_mean(&z).unwrap().powi(2);
            prop_assert!((spec.total_power() / ms - 1.0).abs() < 0.1);
        }

        #[test]
        fn ranking_invariant_under_eta_rescale(scale in 0.01f64..100.0) {
            let cands: Vec<_> = (4..=12).map(|n| rb(n, 100.0 + 37.0 * ((n * 7) % 5) as f64)).collect();
            let scaled: Vec<_> = cands.iter().map(|c| {
                let mut c = c.clone();
                c.per_isolator.eta *= scale;
                c
            }).collect();
            let a: Vec<u32> = select_configuration(&cands, 8.0, 33.0).unwrap().iter().map(|r| r.config.count).collect();
            let b: Vec<u32> = select_configuration(&scaled, 8.0, 33.0).unwrap().iter().map(|r| r.config.count).collect();
            prop_assert_eq!(a, b);
        }
    }
}
