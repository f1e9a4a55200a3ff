use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{QcError, QcFlag, QcReport, Result};
use crate::model::{
    CrossoverFixtureRow, Lerp, Located, MagSample, RadSample, ScalarSample, SurveyLine, UtmPoint,
};

const COLLINEAR_EPS_M: f64 = 1e-9;
const DUPLICATE_EPS_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverField {
    K,
    U,
    Th,
    Tmi,
}

impl CrossoverField {
    pub fn unit(self) -> &'static str {
        match self {
            CrossoverField::K => "%",
            CrossoverField::U | CrossoverField::Th => "ppm",
            CrossoverField::Tmi => "nT",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            CrossoverField::K => "k_pct",
            CrossoverField::U => "u_ppm",
            CrossoverField::Th => "th_ppm",
            CrossoverField::Tmi => "tmi_nT",
        }
    }
}

impl fmt::Display for CrossoverField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CrossoverField::K => "K",
            CrossoverField::U => "U",
            CrossoverField::Th => "Th",
            CrossoverField::Tmi => "TMI",
        };
        f.write_str(s)
    }
}

impl FromStr for CrossoverField {
    type Err = QcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" | "k_pct" => Ok(CrossoverField::K),
            "u" | "u_ppm" => Ok(CrossoverField::U),
            "th" | "th_ppm" => Ok(CrossoverField::Th),
            "tmi" | "tmi_nt" => Ok(CrossoverField::Tmi),
            other => Err(QcError::InvalidParameter(format!("unknown field '{other}'"))),
        }
    }
}

/// Samples that can report a value for a crossover field.
pub trait FieldSource: Located {
    fn field_value(&self, field: CrossoverField) -> Option<f64>;
}

impl FieldSource for RadSample {
    fn field_value(&self, field: CrossoverField) -> Option<f64> {
        match field {
            CrossoverField::K => Some(self.k),
            CrossoverField::U => Some(self.u),
            CrossoverField::Th => self.th,
            CrossoverField::Tmi => None,
        }
    }
}

impl FieldSource for MagSample {
    fn field_value(&self, field: CrossoverField) -> Option<f64> {
        (field == CrossoverField::Tmi).then_some(self.tmi)
    }
}

impl FieldSource for ScalarSample {
    fn field_value(&self, _field: CrossoverField) -> Option<f64> {
        Some(self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRecord {
    pub location: UtmPoint,
    pub flight_line: String,
    pub tie_line: String,
    pub flight_value: f64,
    pub tie_value: f64,
    /// `flight_value - tie_value`
    pub difference: f64,
}

impl CrossoverRecord {
    pub fn new(
        location: UtmPoint,
        flight_line: impl Into<String>,
        tie_line: impl Into<String>,
        flight_value: f64,
        tie_value: f64,
    ) -> Self {
        Self {
            location,
            flight_line: flight_line.into(),
            tie_line: tie_line.into(),
            flight_value,
            tie_value,
            difference: flight_value - tie_value,
        }
    }
}

/// Splits fixture rows into K and U records, keeping duplicates as distinct rows.
pub fn records_from_fixture(rows: &[CrossoverFixtureRow]) -> (Vec<CrossoverRecord>, Vec<CrossoverRecord>) {
    let mut k = Vec::with_capacity(rows.len());
    let mut u = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let id = format!("row{}", i + 1);
        k.push(CrossoverRecord::new(r.location, "flights", id.clone(), r.flights_k, r.tie_k));
        u.push(CrossoverRecord::new(r.location, "flights", id, r.flights_u, r.tie_u));
    }
    (k, u)
}

/// Summary statistics of a set of crossover records; passes iff max |difference| ≤ tolerance.
pub fn crossover_report(field: CrossoverField, records: &[CrossoverRecord], tolerance: f64) -> QcReport {
    let diffs: Vec<f64> = records.iter().map(|r| r.difference).collect();
    let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let n = diffs.len().max(1) as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let mean_abs = diffs.iter().map(|d| d.abs()).sum::<f64>() / n;
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    let flags = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.difference.abs() > tolerance)
        .map(|(i, r)| QcFlag { index: i, t: None, location: Some(r.location), value: r.difference })
        .collect();
    let mut report = QcReport::new(format!("crossover_{}", field.column()))
        .stat("crossings", records.len() as f64)
        .stat("max_abs_diff", max_abs)
        .stat("mean_diff", mean)
        .stat("mean_abs_diff", mean_abs)
        .stat("rms_diff", rms)
        .stat("tolerance", tolerance)
        .note(format!("difference = flight - tie, in {}", field.unit()));
    report.pass = max_abs <= tolerance;
    report.flags = flags;
    report
}

/// Intersects every flight segment with every tie segment and pairs the
/// linearly interpolated field values at each crossing.
///
/// Records are ordered by easting, then northing.
pub fn crossover_analysis<S: FieldSource>(
    flight_lines: &[SurveyLine<S>],
    tie_lines: &[SurveyLine<S>],
    field: CrossoverField,
    tolerance: f64,
) -> Result<(Vec<CrossoverRecord>, QcReport)> {
    if !(tolerance >= 0.0) {
        return Err(QcError::InvalidParameter(format!("tolerance {tolerance} < 0")));
    }
    let flights: Vec<Polyline> = flight_lines.iter().map(|l| Polyline::new(l, field)).collect();
    let ties: Vec<Polyline> = tie_lines.iter().map(|l| Polyline::new(l, field)).collect();

    let mut records = Vec::new();
    for f in &flights {
        for t in &ties {
            let mut found: Vec<CrossoverRecord> = Vec::new();
            for a in f.segments() {
                for b in t.segments() {
                    let Some((sa, sb)) = intersect(a.p0, a.p1, b.p0, b.p1) else {
                        continue;
                    };
                    let fv = a.v0.lerp(&a.v1, sa);
                    let tv = b.v0.lerp(&b.v1, sb);
                    let (x, y) = (a.p0.0 + sa * (a.p1.0 - a.p0.0), a.p0.1 + sa * (a.p1.1 - a.p0.1));
                    if found
                        .iter()
                        .any(|r| (r.location.easting - x).hypot(r.location.northing - y) < DUPLICATE_EPS_M)
                    {
                        continue;
                    }
                    let location =
                        UtmPoint { easting: x, northing: y, altitude_agl: a.alt0.lerp(&a.alt1, sa) };
                    found.push(CrossoverRecord::new(location, &f.id, &t.id, fv, tv));
                }
            }
            records.extend(found);
        }
    }
    if records.is_empty() {
        return Err(QcError::NoIntersections);
    }
    records.sort_by(|a, b| {
        a.location
            .easting
            .total_cmp(&b.location.easting)
            .then(a.location.northing.total_cmp(&b.location.northing))
            .then_with(|| a.flight_line.cmp(&b.flight_line))
            .then_with(|| a.tie_line.cmp(&b.tie_line))
    });
    let report = crossover_report(field, &records, tolerance);
    Ok((records, report))
}

struct Polyline {
    id: String,
    pts: Vec<((f64, f64), f64, Option<f64>)>,
}

struct Segment {
    p0: (f64, f64),
    p1: (f64, f64),
    v0: f64,
    v1: f64,
    alt0: f64,
    alt1: f64,
}

impl Polyline {
    fn new<S: FieldSource>(line: &SurveyLine<S>, field: CrossoverField) -> Self {
        let pts = line
            .samples()
            .values()
            .iter()
            .map(|s| {
                let p = s.position();
                ((p.easting, p.northing), p.altitude_agl, s.field_value(field))
            })
            .collect();
        Self { id: line.id().to_owned(), pts }
    }

    fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.pts.windows(2).filter_map(|w| {
            let (p0, alt0, v0) = w[0];
            let (p1, alt1, v1) = w[1];
            Some(Segment { p0, p1, v0: v0?, v1: v1?, alt0, alt1 })
        })
    }
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Returns segment parameters `(s, u)` of the crossing, or the overlap
/// midpoint for collinear segments.
fn intersect(p0: (f64, f64), p1: (f64, f64), q0: (f64, f64), q1: (f64, f64)) -> Option<(f64, f64)> {
    let r = (p1.0 - p0.0, p1.1 - p0.1);
    let s = (q1.0 - q0.0, q1.1 - q0.1);
    let qp = (q0.0 - p0.0, q0.1 - p0.1);
    let rl = r.0.hypot(r.1);
    let sl = s.0.hypot(s.1);
    if rl == 0.0 || sl == 0.0 {
        return None;
    }
    let denom = cross(r, s);
    if (denom / rl).abs() <= COLLINEAR_EPS_M {
        // parallel; collinear when q0 lies on p's carrier line
        if (cross(qp, r) / rl).abs() > COLLINEAR_EPS_M {
            return None;
        }
        let rr = rl * rl;
        let t0 = (qp.0 * r.0 + qp.1 * r.1) / rr;
        let t1 = t0 + (s.0 * r.0 + s.1 * r.1) / rr;
        let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
        if lo > hi + COLLINEAR_EPS_M / rl {
            return None;
        }
        let t = 0.5 * (lo + hi);
        let x = (p0.0 + t * r.0 - q0.0, p0.1 + t * r.1 - q0.1);
        let u = ((x.0 * s.0 + x.1 * s.1) / (sl * sl)).clamp(0.0, 1.0);
        return Some((t.clamp(0.0, 1.0), u));
    }
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    let (et, eu) = (COLLINEAR_EPS_M / rl, COLLINEAR_EPS_M / sl);
    if t < -et || t > 1.0 + et || u < -eu || u > 1.0 + eu {
        return None;
    }
    Some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)))
}
