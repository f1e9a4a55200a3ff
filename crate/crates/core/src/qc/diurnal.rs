use super::{QcError, QcReport, Result};
use crate::model::{MagSample, TimeSeries};
use crate::stats;

/// Removes base-station variation: `tmi(t) - (base(t) - datum)`.
///
/// The base record is linearly interpolated to rover times and must cover
/// the whole rover time range.
pub fn diurnal_correct(
    rover: &TimeSeries<MagSample>,
    base: &TimeSeries<f64>,
    datum: f64,
) -> Result<TimeSeries<MagSample>> {
    let (Some(rs), Some(re)) = (rover.start(), rover.end()) else {
        return Err(QcError::TooShort { got: 0, needed: 1 });
    };
    let (bs, be) = match (base.start(), base.end()) {
        (Some(a), Some(b)) => (a, b),
        _ => (f64::NAN, f64::NAN),
    };
    if !(bs <= rs && be >= re) {
        return Err(QcError::BaseDoesNotCover {
            base_start: bs,
            base_end: be,
            rover_start: rs,
            rover_end: re,
        });
    }
    let values = rover
        .iter()
        .map(|(t, s)| {
            let b = base.interpolate_at(t).expect("coverage checked");
            MagSample { position: s.position, tmi: s.tmi - (b - datum) }
        })
        .collect();
    Ok(TimeSeries::new(rover.timestamps().to_vec(), values).expect("same timestamps"))
}

/// Summary of the applied correction.
pub fn diurnal_report(rover: &TimeSeries<MagSample>, corrected: &TimeSeries<MagSample>) -> QcReport {
    let corr: Vec<f64> = rover.values().iter().zip(corrected.values()).map(|(r, c)| r.tmi - c.tmi).collect();
    let min = corr.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = corr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    QcReport::new("diurnal")
        .stat("samples", corr.len() as f64)
        .stat("correction_min_nT", min)
        .stat("correction_max_nT", max)
        .stat("correction_range_nT", max - min)
        .stat("correction_mean_nT", stats::mean(&corr).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UtmPoint;

    fn rover(f: impl Fn(f64) -> f64, t: &[f64]) -> TimeSeries<MagSample> {
        TimeSeries::new(
            t.to_vec(),
            t.iter().map(|&t| MagSample { position: UtmPoint::flat(t, 0.0), tmi: f(t) }).collect(),
        )
        .unwrap()
    }

    fn times(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn self_correction_gives_datum() {
        let t = times(100, 0.5);
        let r = rover(|t| 54000.0 + (t / 7.0).sin(), &t);
        let b = r.map(|s| s.tmi);
        let c = diurnal_correct(&r, &b, 54010.0).unwrap();
        assert!(c.values().iter().all(|s| (s.tmi - 54010.0).abs() < 1e-9));
    }

    #[test]
    fn constant_base_is_identity() {
        let t = times(50, 1.0);
        let r = rover(|t| 53000.0 + t, &t);
        let b = TimeSeries::new(vec![-10.0, 100.0], vec![100.0, 100.0]).unwrap();
        let c = diurnal_correct(&r, &b, 100.0).unwrap();
        assert_eq!(c, r);
    }

    #[test]
    fn algebraic_cancellation() {
        let t = times(200, 0.1);
        let r = rover(|t| 50000.0 + t.sin(), &t);
        let bt = times(2001, 0.01);
        let b = TimeSeries::new(bt.clone(), bt.iter().map(|t| 100.0 + t.sin()).collect()).unwrap();
        let c = diurnal_correct(&r, &b, 100.0).unwrap();
        // base samples coincide with rover samples, so interpolation is exact
        assert!(c.values().iter().all(|s| (s.tmi - 50000.0).abs() < 1e-9));
    }

    #[test]
    fn readding_correction_recovers_rover() {
        let t = times(60, 1.0);
        let r = rover(|t| 51000.0 + 3.0 * (t / 9.0).cos(), &t);
        let b = TimeSeries::new(t.clone(), t.iter().map(|t| 40.0 + 0.1 * t).collect()).unwrap();
        let c = diurnal_correct(&r, &b, 42.0).unwrap();
        for ((s, orig), bv) in c.values().iter().zip(r.values()).zip(b.values()) {
            assert!((s.tmi + (bv - 42.0) - orig.tmi).abs() < 1e-9);
        }
    }

    #[test]
    fn short_base_rejected() {
        let t = times(10, 1.0);
        let r = rover(|_| 1.0, &t);
        let b = TimeSeries::new(vec![0.0, 5.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(diurnal_correct(&r, &b, 0.0), Err(QcError::BaseDoesNotCover { .. })));
    }
}
