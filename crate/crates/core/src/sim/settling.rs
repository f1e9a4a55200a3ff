use serde::{Deserialize, Serialize};

use super::attitude::{AttitudeSample, Segment};
use super::{Result, SimError, GRAVITY};
use crate::model::TimeSeries;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnSettling {
    pub turn_end_s: f64,
    pub peak_amplitude_deg: f64,
    pub settling_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlingMetrics {
    pub turns: Vec<TurnSettling>,
    /// worst turn
    pub settling_time_s: f64,
    pub lead_in_distance_m: f64,
}

/// Index ranges `[end_of_turn, next_turn_or_end)` following every turn.
fn post_turn_windows(series: &TimeSeries<AttitudeSample>) -> Vec<(usize, usize)> {
    let v = series.values();
    let mut out = Vec::new();
    let mut i = 1;
    while i < v.len() {
        if v[i - 1].segment == Segment::Turn && v[i].segment != Segment::Turn {
            let start = i;
            let mut j = i;
            while j < v.len() && v[j].segment != Segment::Turn {
                j += 1;
            }
            out.push((start, j));
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Time from each turn's completion until the swing amplitude stays below
/// `threshold_deg`, and the lead-in distance the worst turn needs at `speed`.
///
/// The amplitude combines angle and rate (`sqrt(θ² + (θ'/ω)²)` over both
/// axes) so it tracks the decay envelope rather than the oscillation.
pub fn settling_metrics(
    series: &TimeSeries<AttitudeSample>,
    threshold_deg: f64,
    speed: f64,
    cable_length: f64,
) -> Result<SettlingMetrics> {
    if !(threshold_deg > 0.0) || !(cable_length > 0.0) || !(speed >= 0.0) {
        return Err(SimError::InvalidConfig("threshold and cable length must be > 0, speed >= 0".into()));
    }
    let omega = (GRAVITY / cable_length).sqrt();
    let windows = post_turn_windows(series);
    if windows.is_empty() {
        return Err(SimError::NoTurn);
    }
    let t = series.timestamps();
    let v = series.values();
    let mut turns = Vec::new();
    for (a, b) in windows {
        let t0 = t[a];
        let amp: Vec<f64> = v[a..b].iter().map(|s| s.swing_amplitude(omega)).collect();
        let peak = amp.iter().cloned().fold(0.0, f64::max);
        let settling = match amp.iter().rposition(|x| *x > threshold_deg) {
            None => 0.0,
            Some(k) if a + k + 1 >= b => {
                return Err(SimError::NeverSettles { threshold_deg, turn_end_s: t0 })
            }
            Some(k) => {
                // interpolate the downward crossing
                let (y0, y1) = (amp[k], amp[k + 1]);
                let (ta, tb) = (t[a + k], t[a + k + 1]);
                let frac = (y0 - threshold_deg) / (y0 - y1);
                ta + frac * (tb - ta) - t0
            }
        };
        turns.push(TurnSettling { turn_end_s: t0, peak_amplitude_deg: peak, settling_time_s: settling });
    }
    let worst = turns.iter().map(|x| x.settling_time_s).fold(0.0, f64::max);
    Ok(SettlingMetrics { turns, settling_time_s: worst, lead_in_distance_m: worst * speed })
}

/// Exponential decay fitted to the swing envelope after a turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingDown {
    pub turn_end_s: f64,
    pub duration_s: f64,
    pub start_amplitude_deg: f64,
    pub end_amplitude_deg: f64,
    /// fitted decay rate of the envelope, 1/s
    pub rate: f64,
}

/// Log-linear envelope fits after each turn, from turn completion while the
/// amplitude stays above `min_amplitude_deg`. Windows shorter than two
/// swing periods are skipped.
pub fn ring_down_rates(
    series: &TimeSeries<AttitudeSample>,
    cable_length: f64,
    min_amplitude_deg: f64,
) -> Vec<RingDown> {
    let omega = (GRAVITY / cable_length).sqrt();
    let period = 2.0 * std::f64::consts::PI / omega;
    let t = series.timestamps();
    let v = series.values();
    let mut out = Vec::new();
    for (a, b) in post_turn_windows(series) {
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for k in a..b {
            let amp = v[k].swing_amplitude(omega);
            if amp < min_amplitude_deg {
                break;
            }
            ts.push(t[k]);
            ys.push(amp.ln());
        }
        if ts.len() < 3 || ts[ts.len() - 1] - ts[0] < 2.0 * period {
            continue;
        }
        let w = vec![1.0; ts.len()];
        if let Some((_, slope)) = stats::weighted_line_fit(&ts, &ys, &w) {
            out.push(RingDown {
                turn_end_s: ts[0],
                duration_s: ts[ts.len() - 1] - ts[0],
                start_amplitude_deg: ys[0].exp(),
                end_amplitude_deg: ys[ys.len() - 1].exp(),
                rate: -slope,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UtmPoint;
    use crate::sim::Pendulum;

    /// Two seconds of turn followed by a free ring-down from `theta0` degrees.
    fn ring_down(zeta: f64, theta0: f64, secs: f64) -> TimeSeries<AttitudeSample> {
        let p = Pendulum::new(9.0, zeta);
        let mut t = Vec::new();
        let mut v = Vec::new();
        let n = (secs * 10.0) as usize;
        for k in 0..n + 20 {
            let tk = k as f64 * 0.1;
            let (seg, tau) = if k < 20 { (Segment::Turn, 0.0) } else { (Segment::LeadIn, tk - 2.0) };
            let th = if k < 20 { theta0 } else { p.free_response(theta0, tau) };
            // numerical rate from the closed form
            let rate = if k < 20 {
                0.0
            } else {
                (p.free_response(theta0, tau + 1e-6) - p.free_response(theta0, tau - 1e-6)) / 2e-6
            };
            t.push(tk);
            v.push(AttitudeSample {
                position: UtmPoint::flat(0.0, 0.0),
                uav_roll: 0.0,
                uav_pitch: 0.0,
                uav_yaw: 0.0,
                swing_along: th,
                swing_cross: 0.0,
                swing_along_rate: rate,
                swing_cross_rate: 0.0,
                payload_heading: 0.0,
                segment: seg,
                line_id: "L1".into(),
            });
        }
        TimeSeries::new(t, v).unwrap()
    }

    #[test]
    fn settling_matches_closed_form() {
        let (zeta, theta0, thr) = (0.12, 10.0, 0.5);
        let s = ring_down(zeta, theta0, 120.0);
        let m = settling_metrics(&s, thr, 5.0, 9.0).unwrap();
        let w = (GRAVITY / 9.0).sqrt();
        let analytic = (theta0 / thr).ln() / (zeta * w);
        assert!(
            (m.settling_time_s - analytic).abs() / analytic < 0.10,
            "{} vs {analytic}",
            m.settling_time_s
        );
        assert!((m.lead_in_distance_m - 5.0 * m.settling_time_s).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_settles_immediately() {
        let s = ring_down(0.1, 0.2, 30.0);
        assert_eq!(settling_metrics(&s, 1.0, 5.0, 9.0).unwrap().settling_time_s, 0.0);
    }

    #[test]
    fn undamped_never_settles() {
        let s = ring_down(0.0, 5.0, 60.0);
        assert!(matches!(settling_metrics(&s, 1.0, 5.0, 9.0), Err(SimError::NeverSettles { .. })));
    }

    #[test]
    fn no_turn() {
        let s = ring_down(0.1, 5.0, 30.0);
        let tail = s.slice_time(3.0, 30.0);
        assert!(matches!(settling_metrics(&tail, 1.0, 5.0, 9.0), Err(SimError::NoTurn)));
    }

    #[test]
    fn fitted_rate_matches_zeta_omega() {
        let zeta = 0.12;
        let s = ring_down(zeta, 10.0, 60.0);
        let r = ring_down_rates(&s, 9.0, 0.5);
        let expect = zeta * (GRAVITY / 9.0).sqrt();
        assert_eq!(r.len(), 1);
        assert!((r[0].rate - expect).abs() / expect < 0.05);
    }

    #[test]
    fn more_damping_settles_sooner() {
        let a = settling_metrics(&ring_down(0.08, 10.0, 120.0), 0.5, 5.0, 9.0).unwrap();
        let b = settling_metrics(&ring_down(0.16, 10.0, 120.0), 0.5, 5.0, 9.0).unwrap();
        assert!(b.settling_time_s <= a.settling_time_s);
    }
}
