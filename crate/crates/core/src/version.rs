use serde::{Deserialize, Serialize};

/// Version of the CSV column layouts read and written by this crate.
pub const CSV_SCHEMA_VERSION: u32 = 1;
/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionInfo {
    pub version: String,
    pub csv_schema_version: u32,
    pub report_schema_version: u32,
}

pub fn version_info() -> VersionInfo {
    VersionInfo {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        report_schema_version: REPORT_SCHEMA_VERSION,
    }
}
