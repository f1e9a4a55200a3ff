//! Survey data-quality battery: fourth-difference noise test, diurnal
//! correction, tie-line crossovers and NASVD spectral denoising.

mod crossover;
mod diurnal;
mod fourth_difference;
mod nasvd;

pub use crossover::{
    crossover_analysis, crossover_report, records_from_fixture, CrossoverField, CrossoverRecord, FieldSource,
};
pub use diurnal::{diurnal_correct, diurnal_report};
pub use fourth_difference::{
    fourth_difference, fourth_differences, FourthDifference, FourthDifferenceOptions,
};
pub use nasvd::{counting_residual_ratio, nasvd, nasvd_denoise, NasvdResult, SpectraMatrix};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::UtmPoint;

#[derive(Debug, Error, PartialEq)]
pub enum QcError {
    #[error("series too short: {got} samples, need {needed}")]
    TooShort { got: usize, needed: usize },
    #[error(
        "base station record [{base_start}, {base_end}] does not cover rover [{rover_start}, {rover_end}]"
    )]
    BaseDoesNotCover { base_start: f64, base_end: f64, rover_start: f64, rover_end: f64 },
    #[error("no flight/tie intersections found")]
    NoIntersections,
    #[error("rank {k} outside 1..={max}")]
    InvalidRank { k: usize, max: usize },
    #[error("invalid spectra: {0}")]
    InvalidSpectra(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = QcError> = std::result::Result<T, E>;

/// One flagged item in a QC report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcFlag {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<UtmPoint>,
    pub value: f64,
}

/// Outcome of one QC test, serialized as `{test, pass, stats, flags}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub test: String,
    pub pass: bool,
    pub stats: BTreeMap<String, f64>,
    pub flags: Vec<QcFlag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl QcReport {
    pub fn new(test: impl Into<String>) -> Self {
        Self { test: test.into(), pass: true, stats: BTreeMap::new(), flags: Vec::new(), notes: Vec::new() }
    }

    pub fn stat(mut self, name: &str, value: f64) -> Self {
        self.stats.insert(name.to_owned(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
