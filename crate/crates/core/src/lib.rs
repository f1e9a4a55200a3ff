//! Analysis toolkit for UAV-borne geophysical surveys.
//!
//! The crate covers two groups of work:
//!
//! * platform engineering checks: accelerometer spectra and isolator
//!   selection ([`vibration`]), buzz-test noise thresholds ([`emi`]) and a
//!   suspended-payload flight simulator ([`sim`]);
//! * survey data QC: fourth-difference noise test, diurnal correction,
//!   tie-line crossovers and NASVD spectral denoising ([`qc`]), plus
//!   gridding and grayscale intensity comparison ([`grid`]).
//!
//! [`pipeline`] chains the simulator into the QC and gridding stages and
//! produces a consolidated run report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emi;
pub mod grid;
pub mod model;
pub mod pipeline;
pub mod qc;
pub mod sim;
pub mod stats;
pub mod version;
pub mod vibration;

pub use grid::{GrayImage, Grid};
pub use model::{
    AccelSample, Axis, LineRole, Located, MagSample, RadSample, SurveyLine, TimeSeries, UtmPoint, VlfSample,
};
pub use qc::{CrossoverRecord, QcReport, SpectraMatrix};
pub use version::{version_info, VersionInfo};
