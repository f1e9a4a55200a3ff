use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Result;
use crate::model::{IngestMode, TimeSeries, UtmPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    LeadIn,
    Line,
    LeadOut,
    Turn,
}

/// UAV attitude and payload swing at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttitudeSample {
    /// UAV position; altitude is the sensor height above ground
    pub position: UtmPoint,
    pub uav_roll: f64,
    pub uav_pitch: f64,
    pub uav_yaw: f64,
    pub swing_along: f64,
    pub swing_cross: f64,
    pub swing_along_rate: f64,
    pub swing_cross_rate: f64,
    pub payload_heading: f64,
    pub segment: Segment,
    pub line_id: String,
}

impl AttitudeSample {
    /// Combined swing amplitude from angle and rate, degrees.
    ///
    /// For a free linear pendulum this follows the decay envelope without
    /// the oscillation ripple.
    pub fn swing_amplitude(&self, omega: f64) -> f64 {
        (self.swing_along.powi(2)
            + self.swing_cross.powi(2)
            + (self.swing_along_rate.powi(2) + self.swing_cross_rate.powi(2)) / (omega * omega))
            .sqrt()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t_s: f64,
    easting_m: f64,
    northing_m: f64,
    uav_roll_deg: f64,
    uav_pitch_deg: f64,
    uav_yaw_deg: f64,
    swing_along_deg: f64,
    swing_cross_deg: f64,
    swing_along_rate_dps: f64,
    swing_cross_rate_dps: f64,
    payload_heading_deg: f64,
    segment: Segment,
    line_id: String,
}

pub fn write_attitude<W: Write>(w: W, series: &TimeSeries<AttitudeSample>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for (t, s) in series.iter() {
        wr.serialize(Row {
            t_s: t,
            easting_m: s.position.easting,
            northing_m: s.position.northing,
            uav_roll_deg: s.uav_roll,
            uav_pitch_deg: s.uav_pitch,
            uav_yaw_deg: s.uav_yaw,
            swing_along_deg: s.swing_along,
            swing_cross_deg: s.swing_cross,
            swing_along_rate_dps: s.swing_along_rate,
            swing_cross_rate_dps: s.swing_cross_rate,
            payload_heading_deg: s.payload_heading,
            segment: s.segment,
            line_id: s.line_id.clone(),
        })
        .map_err(crate::model::ModelError::from)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads an attitude CSV. Altitude is not stored and comes back as 0.
pub fn read_attitude<R: Read>(r: R) -> Result<TimeSeries<AttitudeSample>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut records = Vec::new();
    for row in rd.deserialize::<Row>() {
        let row = row.map_err(crate::model::ModelError::from)?;
        records.push((
            row.t_s,
            AttitudeSample {
                position: UtmPoint::flat(row.easting_m, row.northing_m),
                uav_roll: row.uav_roll_deg,
                uav_pitch: row.uav_pitch_deg,
                uav_yaw: row.uav_yaw_deg,
                swing_along: row.swing_along_deg,
                swing_cross: row.swing_cross_deg,
                swing_along_rate: row.swing_along_rate_dps,
                swing_cross_rate: row.swing_cross_rate_dps,
                payload_heading: row.payload_heading_deg,
                segment: row.segment,
                line_id: row.line_id,
            },
        ));
    }
    Ok(TimeSeries::from_records(records, IngestMode::Strict)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let s = |t: f64, seg| AttitudeSample {
            position: UtmPoint::flat(327000.0 + t, 5030000.0),
            uav_roll: 0.5 * t,
            uav_pitch: -1.25,
            uav_yaw: 90.0,
            swing_along: 0.1,
            swing_cross: -2.0,
            swing_along_rate: 0.0,
            swing_cross_rate: 3.5,
            payload_heading: 90.0,
            segment: seg,
            line_id: "L1".into(),
        };
        let series =
            TimeSeries::new(vec![0.0, 0.1], vec![s(0.0, Segment::LeadIn), s(0.1, Segment::Turn)]).unwrap();
        let mut buf = Vec::new();
        write_attitude(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "t_s,easting_m,northing_m,uav_roll_deg,uav_pitch_deg,uav_yaw_deg,swing_along_deg,swing_cross_deg,swing_along_rate_dps,swing_cross_rate_dps,payload_heading_deg,segment,line_id\n"
        ));
        assert!(text.contains(",lead_in,L1\n"));
        assert_eq!(read_attitude(buf.as_slice()).unwrap(), series);
    }
}
