//! Shared domain types: positions, time series and sensor samples.
//!
//! Units are fixed at the boundary: metres (UTM, AGL), seconds, m/s²,
//! nanotesla, percent and ppm. Angles are stored in degrees.

mod io;
mod series;

pub(crate) use io::create;
pub use io::{
    ingest_csv, read_accel, read_base, read_crossover_fixture, read_located_column, read_mag, read_rad,
    read_scalar_column, read_vlf, write_accel, write_base, write_crossover_fixture, write_mag, write_rad,
    write_scalar_column, write_vlf, CrossoverFixtureRow, Dataset, SchemaKind,
};
pub use series::{resample_uniform, IngestMode, Lerp, TimeSeries};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("missing column `{column}` for {schema} schema")]
    MissingColumn { column: String, schema: &'static str },
    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    ParseField { row: usize, column: String, value: String },
    #[error("row {row}: timestamp {t} does not increase")]
    NonMonotoneTime { row: usize, t: f64 },
    #[error("file has no data rows")]
    EmptyFile,
    #[error("series needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("timestamps and values differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Position in a UTM zone with height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtmPoint {
    pub easting: f64,
    pub northing: f64,
    pub altitude_agl: f64,
}

impl UtmPoint {
    pub fn new(easting: f64, northing: f64, altitude_agl: f64) -> Result<Self> {
        if !easting.is_finite() || !northing.is_finite() {
            return Err(ModelError::InvalidValue(format!("non-finite coordinate ({easting}, {northing})")));
        }
        if !(altitude_agl >= 0.0) || !altitude_agl.is_finite() {
            return Err(ModelError::InvalidValue(format!(
                "altitude above ground must be >= 0, got {altitude_agl}"
            )));
        }
        Ok(Self { easting, northing, altitude_agl })
    }

    /// Planimetric point; altitude 0.
    pub fn flat(easting: f64, northing: f64) -> Self {
        Self { easting, northing, altitude_agl: 0.0 }
    }

    pub fn with_altitude(self, altitude_agl: f64) -> Self {
        Self { altitude_agl, ..self }
    }

    pub fn horizontal_distance(&self, other: &UtmPoint) -> f64 {
        (self.easting - other.easting).hypot(self.northing - other.northing)
    }
}

impl Lerp for UtmPoint {
    fn lerp(&self, other: &Self, frac: f64) -> Self {
        Self {
            easting: self.easting.lerp(&other.easting, frac),
            northing: self.northing.lerp(&other.northing, frac),
            altitude_agl: self.altitude_agl.lerp(&other.altitude_agl, frac),
        }
    }
}

/// Anything recorded at a survey position.
pub trait Located {
    fn position(&self) -> UtmPoint;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(ModelError::InvalidValue(format!("unknown axis `{other}`"))),
        }
    }
}

/// Body-frame acceleration, z vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelSample {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl AccelSample {
    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.ax,
            Axis::Y => self.ay,
            Axis::Z => self.az,
        }
    }
}

impl Lerp for AccelSample {
    fn lerp(&self, other: &Self, frac: f64) -> Self {
        Self {
            ax: self.ax.lerp(&other.ax, frac),
            ay: self.ay.lerp(&other.ay, frac),
            az: self.az.lerp(&other.az, frac),
        }
    }
}

/// Total magnetic intensity reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagSample {
    pub position: UtmPoint,
    pub tmi: f64,
}

impl Located for MagSample {
    fn position(&self) -> UtmPoint {
        self.position
    }
}

impl Lerp for MagSample {
    fn lerp(&self, other: &Self, frac: f64) -> Self {
        Self { position: self.position.lerp(&other.position, frac), tmi: self.tmi.lerp(&other.tmi, frac) }
    }
}

/// VLF-EM channels plus sensor attitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VlfSample {
    pub position: UtmPoint,
    /// percent of primary field
    pub in_phase: f64,
    pub out_of_phase: f64,
    pub h1: f64,
    pub h2: f64,
    /// total field, nT
    pub pt: f64,
    /// degrees
    pub roll: f64,
    pub pitch: f64,
}

impl Located for VlfSample {
    fn position(&self) -> UtmPoint {
        self.position
    }
}

/// Radiometric concentrations with an optional raw spectrum.
///
/// Missing channels are `None`, never zero: zero is a valid reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadSample {
    pub position: UtmPoint,
    /// potassium, percent
    pub k: f64,
    /// uranium, ppm
    pub u: f64,
    /// thorium, ppm
    pub th: Option<f64>,
    pub raw_spectrum: Option<Vec<f64>>,
}

impl Located for RadSample {
    fn position(&self) -> UtmPoint {
        self.position
    }
}

/// A located scalar, used when a single column is pulled out of a file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSample {
    pub position: UtmPoint,
    pub value: f64,
}

impl Located for ScalarSample {
    fn position(&self) -> UtmPoint {
        self.position
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineRole {
    Flight,
    Tie,
}

/// One survey line: an ordered run of samples with a fixed role.
#[derive(Debug, Clone)]
pub struct SurveyLine<S> {
    id: String,
    role: LineRole,
    samples: TimeSeries<S>,
}

impl<S> SurveyLine<S> {
    pub fn new(id: impl Into<String>, role: LineRole, samples: TimeSeries<S>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(ModelError::TooFewSamples { needed: 2, got: samples.len() });
        }
        Ok(Self { id: id.into(), role, samples })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn role(&self) -> LineRole {
        self.role
    }

    pub fn samples(&self) -> &TimeSeries<S> {
        &self.samples
    }

    /// Same line with the opposite role.
    pub fn with_role(self, role: LineRole) -> Self {
        Self { role, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utm_point_rejects_negative_altitude() {
        assert!(UtmPoint::new(0.0, 0.0, -1.0).is_err());
        assert!(UtmPoint::new(f64::NAN, 0.0, 1.0).is_err());
        assert!(UtmPoint::new(327193.0, 5030645.0, 5.0).is_ok());
    }

    #[test]
    fn survey_line_needs_two_samples() {
        let ts = TimeSeries::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(SurveyLine::new("L1", LineRole::Flight, ts), Err(ModelError::TooFewSamples { .. })));
    }
}
