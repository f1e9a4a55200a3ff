//! Four-point suspension geometry and a planar-pendulum survey simulator.
//!
//! The simulator flies a lawnmower plan, swings the payload as a damped
//! pendulum per horizontal axis and samples synthetic magnetometer, VLF and
//! radiometric traces along the way.

mod attitude;
mod fields;
mod geometry;
mod path;
mod pendulum;
mod settling;
mod survey;

pub use attitude::{read_attitude, write_attitude, AttitudeSample, Segment};
pub use fields::{Blob, DiurnalModel, MagFieldModel, RadModel, VlfModel};
pub use geometry::{payload_pose, PayloadPose};
pub use path::{FlightPath, Kinematics, Leg};
pub use pendulum::{Pendulum, PendulumState};
pub use settling::{ring_down_rates, settling_metrics, RingDown, SettlingMetrics, TurnSettling};
pub use survey::{simulate_survey, LegWindow, SurveyOutput};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

pub const GRAVITY: f64 = 9.80665;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("UAV tilt {tilt_deg:.1} deg leaves the taut-cable model (limit 45 deg)")]
    SlackCable { tilt_deg: f64 },
    #[error("degenerate plan: {0}")]
    DegeneratePlan(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("swing never settles below {threshold_deg} deg after the turn ending at t={turn_end_s} s")]
    NeverSettles { threshold_deg: f64, turn_end_s: f64 },
    #[error("attitude series contains no turn")]
    NoTurn,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

/// Suspension layout. Body frame: x forward, y left, z up, metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuspensionGeometry {
    /// cable attachment under each motor
    pub motor_anchor_points: [[f64; 3]; 4],
    pub cable_length: f64,
    /// cable attachment on the payload frame, horizontal offsets from its centre
    pub platform_offsets: [[f64; 2]; 4],
    pub intermediate_platform: bool,
    /// magnetometer to VLF sensor
    pub payload_separation: f64,
    /// added damping ratio when the intermediate platform is fitted
    pub platform_damping_boost: f64,
    /// largest payload heading error without the platform
    pub yaw_lag_cap_deg: f64,
    /// first-order heading lag without the platform
    pub yaw_lag_tau_s: f64,
}

impl Default for SuspensionGeometry {
    fn default() -> Self {
        let sq = [[0.5, 0.5], [0.5, -0.5], [-0.5, -0.5], [-0.5, 0.5]];
        Self {
            motor_anchor_points: sq.map(|[x, y]| [x, y, 0.0]),
            cable_length: 9.0,
            platform_offsets: sq,
            intermediate_platform: true,
            payload_separation: 1.0,
            platform_damping_boost: 0.04,
            yaw_lag_cap_deg: 15.0,
            yaw_lag_tau_s: 1.5,
        }
    }
}

impl SuspensionGeometry {
    pub fn validate(&self) -> Result<()> {
        let finite = self.motor_anchor_points.iter().flatten().all(|v| v.is_finite())
            && self.platform_offsets.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(SimError::InvalidConfig("non-finite anchor offset".into()));
        }
        if !(self.cable_length > 0.0) {
            return Err(SimError::InvalidConfig(format!("cable_length {} <= 0", self.cable_length)));
        }
        if !(self.payload_separation >= 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "payload_separation {} < 0",
                self.payload_separation
            )));
        }
        if !(self.platform_damping_boost >= 0.0)
            || !(self.yaw_lag_cap_deg >= 0.0)
            || !(self.yaw_lag_tau_s > 0.0)
        {
            return Err(SimError::InvalidConfig("platform parameters out of range".into()));
        }
        Ok(())
    }

    pub fn natural_frequency(&self) -> f64 {
        (GRAVITY / self.cable_length).sqrt()
    }

    /// Damping ratio felt by the swing, including the platform boost.
    pub fn effective_damping(&self, damping_ratio: f64) -> f64 {
        if self.intermediate_platform {
            damping_ratio + self.platform_damping_boost
        } else {
            damping_ratio
        }
    }
}

/// Lower-left start of the first line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOrigin {
    pub easting: f64,
    pub northing: f64,
}

/// Lawnmower plan: parallel lines along `heading_deg` (azimuth, clockwise
/// from north), stepped to the right by `spacing_m`, with optional
/// perpendicular tie lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPlan {
    pub origin_utm: PlanOrigin,
    pub n_lines: usize,
    pub line_length_m: f64,
    pub spacing_m: f64,
    pub heading_deg: f64,
    /// sensor height above ground
    pub altitude_m: f64,
    #[serde(default)]
    pub tie_lines: usize,
}

impl Default for FlightPlan {
    fn default() -> Self {
        Self {
            origin_utm: PlanOrigin { easting: 327000.0, northing: 5030700.0 },
            n_lines: 4,
            line_length_m: 500.0,
            spacing_m: 25.0,
            heading_deg: 90.0,
            altitude_m: 22.0,
            tie_lines: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// ground speed; 0 flies a stationary hover
    pub speed: f64,
    /// overrides the plan's spacing when set
    pub line_spacing: Option<f64>,
    /// overrides the plan's altitude when set
    pub survey_altitude: Option<f64>,
    pub damping_ratio: f64,
    /// 95% half-width of magnetometer white noise, nT
    pub noise_floor: f64,
    /// straight-flight out-of-phase noise target, percent
    pub outphase_noise_pct: f64,
    pub seed: u64,
    /// straight run before and after each line
    pub lead_in_m: f64,
    pub hover_duration_s: f64,
    /// pause before each tie line, which starts from rest
    pub tie_gap_s: f64,
    /// turbulence acceleration standard deviation per m/s of speed
    pub gust_coeff: f64,
    pub gust_tau_s: f64,
    /// out-of-phase noise added per degree of swing, percent
    pub swing_noise_gain_pct_per_deg: f64,
    pub emi_a1: f64,
    pub emi_p: f64,
    pub mag_field: MagFieldModel,
    pub diurnal: DiurnalModel,
    pub vlf: VlfModel,
    pub rad: RadModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            speed: 5.0,
            line_spacing: None,
            survey_altitude: None,
            damping_ratio: 0.08,
            noise_floor: 0.2,
            outphase_noise_pct: 4.0,
            seed: 20140601,
            lead_in_m: 120.0,
            hover_duration_s: 60.0,
            tie_gap_s: 30.0,
            gust_coeff: 0.002,
            gust_tau_s: 2.0,
            swing_noise_gain_pct_per_deg: 0.25,
            emi_a1: 145.8,
            emi_p: 3.0,
            mag_field: MagFieldModel::default(),
            diurnal: DiurnalModel::default(),
            vlf: VlfModel::default(),
            rad: RadModel::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("speed", self.speed),
            ("damping_ratio", self.damping_ratio),
            ("noise_floor", self.noise_floor),
            ("outphase_noise_pct", self.outphase_noise_pct),
            ("lead_in_m", self.lead_in_m),
            ("tie_gap_s", self.tie_gap_s),
            ("gust_coeff", self.gust_coeff),
            ("swing_noise_gain_pct_per_deg", self.swing_noise_gain_pct_per_deg),
            ("emi_a1", self.emi_a1),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SimError::InvalidConfig(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        if !(self.gust_tau_s > 0.0) {
            return Err(SimError::InvalidConfig("gust_tau_s must be > 0".into()));
        }
        if self.speed == 0.0 && !(self.hover_duration_s > 0.0) {
            return Err(SimError::InvalidConfig("hover_duration_s must be > 0".into()));
        }
        if let Some(s) = self.line_spacing {
            if !(s > 0.0) {
                return Err(SimError::InvalidConfig(format!("line_spacing {s} <= 0")));
            }
        }
        if let Some(a) = self.survey_altitude {
            if !(a >= 0.0) {
                return Err(SimError::InvalidConfig(format!("survey_altitude {a} < 0")));
            }
        }
        Ok(())
    }

    /// The plan with this config's spacing and altitude overrides applied.
    pub fn apply_overrides(&self, plan: &FlightPlan) -> FlightPlan {
        let mut p = plan.clone();
        if let Some(s) = self.line_spacing {
            p.spacing_m = s;
        }
        if let Some(a) = self.survey_altitude {
            p.altitude_m = a;
        }
        p
    }
}

/// Stable 64-bit FNV-1a, used to derive per-leg random streams.
pub(crate) fn stream_id(key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
