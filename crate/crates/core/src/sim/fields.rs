use serde::{Deserialize, Serialize};

/// Gaussian anomaly centred at an offset (east, north) from the plan origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub de: f64,
    pub dn: f64,
    pub amplitude: f64,
    pub sigma_m: f64,
}

impl Blob {
    fn eval(&self, de: f64, dn: f64) -> f64 {
        let r2 = (de - self.de).powi(2) + (dn - self.dn).powi(2);
        self.amplitude * (-r2 / (2.0 * self.sigma_m * self.sigma_m)).exp()
    }
}

/// Static total field: quadratic regional trend plus Gaussian anomalies.
/// Coordinates are metres east and north of the plan origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MagFieldModel {
    pub base_nt: f64,
    pub grad_e: f64,
    pub grad_n: f64,
    pub curv_ee: f64,
    pub curv_nn: f64,
    pub curv_en: f64,
    pub blobs: Vec<Blob>,
}

impl Default for MagFieldModel {
    fn default() -> Self {
        Self {
            base_nt: 54000.0,
            grad_e: 0.02,
            grad_n: -0.015,
            curv_ee: 2e-5,
            curv_nn: 0.0,
            curv_en: 1e-5,
            blobs: vec![
                Blob { de: 150.0, dn: -30.0, amplitude: 35.0, sigma_m: 40.0 },
                Blob { de: 380.0, dn: -50.0, amplitude: -20.0, sigma_m: 30.0 },
            ],
        }
    }
}

impl MagFieldModel {
    pub fn eval(&self, de: f64, dn: f64) -> f64 {
        self.base_nt
            + self.grad_e * de
            + self.grad_n * dn
            + self.curv_ee * de * de
            + self.curv_nn * dn * dn
            + self.curv_en * de * dn
            + self.blobs.iter().map(|b| b.eval(de, dn)).sum::<f64>()
    }
}

/// Time-varying external field seen identically by rover and base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiurnalModel {
    pub datum_nt: f64,
    pub amplitude_nt: f64,
    pub period_s: f64,
    pub phase_deg: f64,
    pub drift_nt_per_s: f64,
    pub base_noise_nt: f64,
    pub base_rate_hz: f64,
    /// base record extends this far beyond the flight at both ends
    pub margin_s: f64,
}

impl Default for DiurnalModel {
    fn default() -> Self {
        Self {
            datum_nt: 54000.0,
            amplitude_nt: 3.0,
            period_s: 1800.0,
            phase_deg: 30.0,
            drift_nt_per_s: 0.002,
            base_noise_nt: 0.01,
            base_rate_hz: 1.0,
            margin_s: 60.0,
        }
    }
}

impl DiurnalModel {
    /// Departure from the datum at time `t`.
    pub fn variation(&self, t: f64) -> f64 {
        if self.period_s > 0.0 {
            self.amplitude_nt
                * (2.0 * std::f64::consts::PI * t / self.period_s + self.phase_deg.to_radians()).sin()
                + self.drift_nt_per_s * t
        } else {
            self.drift_nt_per_s * t
        }
    }
}

/// Thin vertical conductor seen by the VLF receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VlfModel {
    pub conductor_de: f64,
    pub conductor_dn: f64,
    /// conductor strike, azimuth in degrees
    pub strike_deg: f64,
    pub half_width_m: f64,
    pub in_phase_pct: f64,
    pub out_phase_pct: f64,
    pub primary_pt_nt: f64,
}

impl Default for VlfModel {
    fn default() -> Self {
        Self {
            conductor_de: 260.0,
            conductor_dn: 0.0,
            strike_deg: 10.0,
            half_width_m: 35.0,
            in_phase_pct: 12.0,
            out_phase_pct: 5.0,
            primary_pt_nt: 0.5,
        }
    }
}

/// Noise-free VLF channels at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlfTruth {
    pub in_phase: f64,
    pub out_of_phase: f64,
    pub h1: f64,
    pub h2: f64,
    pub pt: f64,
}

impl VlfModel {
    pub fn eval(&self, de: f64, dn: f64) -> VlfTruth {
        let s = self.strike_deg.to_radians();
        // signed distance across strike
        let d = (de - self.conductor_de) * s.cos() - (dn - self.conductor_dn) * s.sin();
        let u = d / self.half_width_m;
        let bell = (-0.5 * u * u).exp();
        let cross = -u * (0.5 - 0.5 * u * u).exp();
        VlfTruth {
            in_phase: self.in_phase_pct * cross,
            out_of_phase: self.out_phase_pct * cross,
            h1: 100.0 + 0.2 * self.in_phase_pct * bell,
            h2: 0.3 * self.in_phase_pct * cross,
            pt: self.primary_pt_nt * (1.0 + 0.05 * bell),
        }
    }
}

/// Radioelement concentrations and the gamma-ray spectra they produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadModel {
    pub k_pct: f64,
    pub u_ppm: f64,
    pub th_ppm: f64,
    /// relative spatial variation of each element
    pub variation: f64,
    pub wavelength_m: f64,
    pub k_noise_pct: f64,
    pub u_noise_ppm: f64,
    pub th_noise_ppm: f64,
    pub channels: usize,
    pub live_time_s: f64,
}

impl Default for RadModel {
    fn default() -> Self {
        Self {
            k_pct: 1.6,
            u_ppm: 2.4,
            th_ppm: 9.0,
            variation: 0.25,
            wavelength_m: 300.0,
            k_noise_pct: 0.03,
            u_noise_ppm: 0.08,
            th_noise_ppm: 0.3,
            channels: 32,
            live_time_s: 1.0,
        }
    }
}

impl RadModel {
    /// True (K %, U ppm, Th ppm) at an offset from the plan origin.
    pub fn concentrations(&self, de: f64, dn: f64) -> (f64, f64, f64) {
        let tau = 2.0 * std::f64::consts::PI / self.wavelength_m;
        let v = self.variation;
        (
            self.k_pct * (1.0 + v * (tau * de).sin() * (tau * dn * 0.7).cos()),
            self.u_ppm * (1.0 + v * (tau * (de + dn) * 0.8).cos()),
            self.th_ppm * (1.0 + v * (tau * (de * 0.6 - dn)).sin()),
        )
    }

    /// Expected counts per channel for the given concentrations.
    pub fn expected_spectrum(&self, k: f64, u: f64, th: f64) -> Vec<f64> {
        (0..self.channels)
            .map(|j| {
                let x = j as f64 * 32.0 / self.channels.max(1) as f64;
                let cont = (-x / 8.0).exp();
                let peak = |c: f64, w: f64| (-(x - c).powi(2) / (2.0 * w * w)).exp();
                let sk = 30.0 * (peak(12.0, 1.2) + 0.5 * cont);
                let su = 8.0 * (peak(15.0, 1.3) + 0.6 * cont);
                let sth = 3.0 * (peak(23.0, 1.6) + 0.7 * cont);
                let bg = 20.0 * cont + 2.0;
                self.live_time_s * (k * sk + u * su + th * sth + bg)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_defaults_are_smooth_and_structured() {
        let m = MagFieldModel::default();
        assert!((m.eval(150.0, -30.0) - m.eval(0.0, 0.0)).abs() > 20.0);
        assert_eq!(m.eval(0.0, 0.0), 54000.0 + m.blobs.iter().map(|b| b.eval(0.0, 0.0)).sum::<f64>());
    }

    #[test]
    fn vlf_crossover_at_conductor() {
        let v = VlfModel::default();
        let at = v.eval(v.conductor_de, v.conductor_dn);
        assert_eq!(at.in_phase, 0.0);
        assert!(v.eval(v.conductor_de - 35.0, 0.0).in_phase > 0.0);
    }

    #[test]
    fn spectrum_non_negative() {
        let r = RadModel::default();
        assert!(r.expected_spectrum(0.0, 0.0, 0.0).iter().all(|c| *c > 0.0));
        assert_eq!(r.expected_spectrum(1.0, 1.0, 1.0).len(), 32);
    }
}
