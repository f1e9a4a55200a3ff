use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::attitude::{write_attitude, AttitudeSample};
use super::path::FlightPath;
use super::pendulum::Pendulum;
use super::{stream_id, FlightPlan, Result, SimConfig, SimError, SuspensionGeometry, GRAVITY};
use crate::model::{self, LineRole, MagSample, RadSample, SurveyLine, TimeSeries, UtmPoint, VlfSample};

const STEP_HZ: u64 = 100;
const TRACE_DECIMATION: u64 = 10;
const RAD_DECIMATION: u64 = 100;
/// 95% half-width to standard deviation
const Z95: f64 = 1.96;

/// Survey-line time window of one leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegWindow {
    pub id: String,
    pub role: LineRole,
    pub t_start: f64,
    pub t_end: f64,
    pub line_start: f64,
    pub line_end: f64,
}

/// Everything one simulated flight produces.
#[derive(Debug, Clone)]
pub struct SurveyOutput {
    /// plan after config overrides
    pub plan: FlightPlan,
    pub attitude: TimeSeries<AttitudeSample>,
    pub mag: TimeSeries<MagSample>,
    pub base: TimeSeries<f64>,
    pub vlf: TimeSeries<VlfSample>,
    pub rad: TimeSeries<RadSample>,
    pub legs: Vec<LegWindow>,
    /// pendulum natural frequency, rad/s
    pub omega: f64,
    /// damping ratio including the platform boost
    pub zeta_eff: f64,
    pub speed: f64,
}

impl SurveyOutput {
    /// Cuts a continuous record into flight and tie lines, keeping only
    /// samples on the line proper (no lead-in, lead-out or turn). Windows are
    /// half-open: a sample exactly at the line end belongs to the lead-out.
    pub fn split_lines<S: Clone>(&self, series: &TimeSeries<S>) -> Vec<SurveyLine<S>> {
        self.legs
            .iter()
            .filter_map(|w| {
                let part = series.slice_time(w.line_start, w.line_end - 1e-9);
                SurveyLine::new(&w.id, w.role, part).ok()
            })
            .collect()
    }

    pub fn lines_with_role<S: Clone>(&self, series: &TimeSeries<S>, role: LineRole) -> Vec<SurveyLine<S>> {
        self.split_lines(series).into_iter().filter(|l| l.role() == role).collect()
    }

    /// Writes `attitude.csv`, `mag.csv`, `base.csv`, `vlf.csv`, `rad.csv` and
    /// per-line magnetic and radiometric files under `lines/`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_attitude(model::create(&dir.join("attitude.csv"))?, &self.attitude)?;
        model::write_mag(model::create(&dir.join("mag.csv"))?, &self.mag)?;
        model::write_base(model::create(&dir.join("base.csv"))?, &self.base)?;
        model::write_vlf(model::create(&dir.join("vlf.csv"))?, &self.vlf)?;
        model::write_rad(model::create(&dir.join("rad.csv"))?, &self.rad)?;
        for (kind, role) in [("flights", LineRole::Flight), ("ties", LineRole::Tie)] {
            let mag_dir = dir.join("lines").join("mag").join(kind);
            let rad_dir = dir.join("lines").join("rad").join(kind);
            fs::create_dir_all(&mag_dir)?;
            fs::create_dir_all(&rad_dir)?;
            for l in self.lines_with_role(&self.mag, role) {
                model::write_mag(model::create(&mag_dir.join(format!("{}.csv", l.id())))?, l.samples())?;
            }
            for l in self.lines_with_role(&self.rad, role) {
                model::write_rad(model::create(&rad_dir.join(format!("{}.csv", l.id())))?, l.samples())?;
            }
        }
        Ok(())
    }
}

struct Streams {
    gust: ChaCha8Rng,
    mag: ChaCha8Rng,
    vlf: ChaCha8Rng,
    rad: ChaCha8Rng,
}

fn stream(seed: u64, key: &str) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream_id(key));
    r
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn wrap180(a: f64) -> f64 {
    (a + 180.0).rem_euclid(360.0) - 180.0
}

/// Flies the plan and samples every sensor.
///
/// The payload swings as a linear damped pendulum per horizontal axis,
/// integrated with RK4 at 100 Hz and forced by path and turbulence
/// accelerations. Attitude, magnetometer and VLF are sampled at 10 Hz and
/// radiometrics at 1 Hz. Each leg draws from its own random streams keyed
/// by `(seed, leg id)`.
pub fn simulate_survey(
    plan: &FlightPlan,
    geom: &SuspensionGeometry,
    cfg: &SimConfig,
) -> Result<SurveyOutput> {
    geom.validate()?;
    cfg.validate()?;
    let path = FlightPath::new(plan, cfg)?;
    let plan = cfg.apply_overrides(plan);
    let l = geom.cable_length;
    let zeta_eff = geom.effective_damping(cfg.damping_ratio);
    let pend = Pendulum::new(l, zeta_eff);
    let h = 1.0 / STEP_HZ as f64;
    let origin = (plan.origin_utm.easting, plan.origin_utm.northing);
    let gust_sigma = cfg.gust_coeff * cfg.speed;
    let gust_decay = (-h / cfg.gust_tau_s).exp();
    let gust_kick = gust_sigma * (1.0 - gust_decay * gust_decay).sqrt();
    let emi_amp = if cfg.emi_a1 > 0.0 { cfg.emi_a1 * l.powf(-cfg.emi_p) } else { 0.0 };
    let swing_free_env = 0.85 * cfg.outphase_noise_pct;

    let mut att_t = Vec::new();
    let mut att_v = Vec::new();
    let mut mag_t = Vec::new();
    let mut mag_v = Vec::new();
    let mut vlf_v = Vec::new();
    let mut rad_t = Vec::new();
    let mut rad_v = Vec::new();
    let mut windows = Vec::new();

    let (mut th_a, mut om_a, mut th_c, mut om_c) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut g_a, mut g_c) = (0.0f64, 0.0f64);
    let mut payload_heading: Option<f64> = None;

    let line_windows = path.line_windows();
    for (li, leg) in path.legs().iter().enumerate() {
        let mut rng = Streams {
            gust: stream(cfg.seed, &format!("{}/gust", leg.id)),
            mag: stream(cfg.seed, &format!("{}/mag", leg.id)),
            vlf: stream(cfg.seed, &format!("{}/vlf", leg.id)),
            rad: stream(cfg.seed, &format!("{}/rad", leg.id)),
        };
        if leg.from_rest {
            (th_a, om_a, th_c, om_c) = (0.0, 0.0, 0.0, 0.0);
            (g_a, g_c) = (0.0, 0.0);
            payload_heading = None;
        }
        if let Some(&(_, a, b)) = line_windows.iter().find(|w| w.0 == li) {
            windows.push(LegWindow {
                id: leg.id.clone(),
                role: leg.role,
                t_start: leg.t_start,
                t_end: leg.t_end,
                line_start: a,
                line_end: b,
            });
        }
        let first = (leg.t_start * STEP_HZ as f64 - 1e-9).ceil() as u64;
        let last = (leg.t_end * STEP_HZ as f64 - 1e-9).ceil() as u64;
        let is_last_leg = li + 1 == path.legs().len();
        let end = if is_last_leg { last + 1 } else { last };
        for idx in first..end {
            let t = idx as f64 / STEP_HZ as f64;
            let kin = path.at(t, li).expect("time inside leg");

            // heading lock with the platform, first-order lag without it
            let ph = match payload_heading {
                Some(p) if !geom.intermediate_platform => p,
                _ => kin.heading_deg,
            };

            if idx % TRACE_DECIMATION == 0 {
                let (fwd, right) = {
                    let a = kin.heading_deg.to_radians();
                    ((a.sin(), a.cos()), (a.cos(), -a.sin()))
                };
                let (sa, sc) = (th_a.to_degrees(), th_c.to_degrees());
                let pe = kin.easting + l * (th_a.sin() * fwd.0 + th_c.sin() * right.0);
                let pn = kin.northing + l * (th_a.sin() * fwd.1 + th_c.sin() * right.1);
                let (de, dn) = (pe - origin.0, pn - origin.1);
                let a_along = kin.accel_along + g_a;
                let a_cross = kin.accel_cross + g_c;
                let line_id = leg.id.clone();
                att_t.push(t);
                att_v.push(AttitudeSample {
                    position: UtmPoint::flat(kin.easting, kin.northing).with_altitude(plan.altitude_m),
                    uav_roll: a_cross.atan2(GRAVITY).to_degrees(),
                    uav_pitch: -a_along.atan2(GRAVITY).to_degrees(),
                    uav_yaw: kin.heading_deg,
                    swing_along: sa,
                    swing_cross: sc,
                    swing_along_rate: om_a.to_degrees(),
                    swing_cross_rate: om_c.to_degrees(),
                    payload_heading: ph.rem_euclid(360.0),
                    segment: kin.segment,
                    line_id,
                });

                let tmi = cfg.mag_field.eval(de, dn)
                    + cfg.diurnal.variation(t)
                    + emi_amp / Z95 * normal(&mut rng.mag)
                    + cfg.noise_floor / Z95 * normal(&mut rng.mag);
                mag_t.push(t);
                mag_v
                    .push(MagSample { position: UtmPoint::flat(pe, pn).with_altitude(plan.altitude_m), tmi });

                let truth = cfg.vlf.eval(de, dn);
                let swing = sa.hypot(sc);
                let env = swing_free_env + cfg.swing_noise_gain_pct_per_deg * swing;
                vlf_v.push(VlfSample {
                    position: UtmPoint::flat(pe, pn).with_altitude(plan.altitude_m + geom.payload_separation),
                    in_phase: truth.in_phase + 0.5 * env / Z95 * normal(&mut rng.vlf),
                    out_of_phase: truth.out_of_phase + env / Z95 * normal(&mut rng.vlf),
                    h1: truth.h1,
                    h2: truth.h2,
                    pt: truth.pt,
                    roll: sc,
                    pitch: sa,
                });
            }

            if idx % RAD_DECIMATION == 0 {
                let a = kin.heading_deg.to_radians();
                let pe = kin.easting + l * (th_a.sin() * a.sin() + th_c.sin() * a.cos());
                let pn = kin.northing + l * (th_a.sin() * a.cos() - th_c.sin() * a.sin());
                let (k, u, th) = cfg.rad.concentrations(pe - origin.0, pn - origin.1);
                let spectrum: Vec<f64> = cfg
                    .rad
                    .expected_spectrum(k, u, th)
                    .into_iter()
                    .map(|lambda| {
                        if lambda > 0.0 {
                            Poisson::new(lambda).expect("positive rate").sample(&mut rng.rad)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let r = &cfg.rad;
                rad_t.push(t);
                rad_v.push(RadSample {
                    position: UtmPoint::flat(pe, pn).with_altitude(plan.altitude_m),
                    k: (k + r.k_noise_pct * normal(&mut rng.rad)).max(0.0),
                    u: (u + r.u_noise_ppm * normal(&mut rng.rad)).max(0.0),
                    th: Some((th + r.th_noise_ppm * normal(&mut rng.rad)).max(0.0)),
                    raw_spectrum: Some(spectrum),
                });
            }

            // advance one step
            let acc = |dt: f64| -> (f64, f64) {
                let k = path.at(t + dt, li).expect("time inside leg");
                (k.accel_along, k.accel_cross)
            };
            let (a0, am, a1) = (acc(0.0), acc(0.5 * h), acc(h));
            (th_a, om_a) = pend.step(th_a, om_a, h, [a0.0 + g_a, am.0 + g_a, a1.0 + g_a]);
            (th_c, om_c) = pend.step(th_c, om_c, h, [a0.1 + g_c, am.1 + g_c, a1.1 + g_c]);
            if gust_sigma > 0.0 {
                g_a = g_a * gust_decay + gust_kick * normal(&mut rng.gust);
                g_c = g_c * gust_decay + gust_kick * normal(&mut rng.gust);
            }
            payload_heading = Some(if geom.intermediate_platform {
                kin.heading_deg
            } else {
                let target = path.at(t + h, li).expect("time inside leg").heading_deg;
                let err = wrap180(target - ph);
                let next = ph + err * (1.0 - (-h / geom.yaw_lag_tau_s).exp());
                let lag = wrap180(target - next).clamp(-geom.yaw_lag_cap_deg, geom.yaw_lag_cap_deg);
                target - lag
            });
        }
    }

    let t_min = att_t.first().copied().unwrap_or(0.0);
    let t_max = att_t.last().copied().unwrap_or(0.0);
    let base = base_record(cfg, t_min, t_max);

    let attitude = TimeSeries::new(att_t, att_v)?;
    let vlf = TimeSeries::new(mag_t.clone(), vlf_v)?;
    let mag = TimeSeries::new(mag_t, mag_v)?;
    let rad = TimeSeries::new(rad_t, rad_v)?;
    if attitude.len() < 2 {
        return Err(SimError::DegeneratePlan("flight shorter than one sample interval".into()));
    }
    Ok(SurveyOutput {
        plan,
        attitude,
        mag,
        base,
        vlf,
        rad,
        legs: windows,
        omega: pend.omega,
        zeta_eff,
        speed: cfg.speed,
    })
}

fn base_record(cfg: &SimConfig, t_min: f64, t_max: f64) -> TimeSeries<f64> {
    let d = &cfg.diurnal;
    let rate = if d.base_rate_hz > 0.0 { d.base_rate_hz } else { 1.0 };
    let start = ((t_min - d.margin_s) * rate).floor() as i64;
    let stop = ((t_max + d.margin_s) * rate).ceil() as i64;
    let mut rng = stream(cfg.seed, "base");
    let mut t = Vec::new();
    let mut v = Vec::new();
    for k in start..=stop {
        let tk = k as f64 / rate;
        t.push(tk);
        v.push(d.datum_nt + d.variation(tk) + d.base_noise_nt * normal(&mut rng));
    }
    TimeSeries::new(t, v).expect("increasing base times")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::{crossover_analysis, CrossoverField};
    use crate::sim::attitude::Segment;
    use crate::sim::{ring_down_rates, settling_metrics, DiurnalModel};

    fn plan(n_lines: usize, ties: usize) -> FlightPlan {
        FlightPlan { n_lines, line_length_m: 200.0, tie_lines: ties, ..FlightPlan::default() }
    }

    fn run(plan: &FlightPlan, cfg: &SimConfig) -> SurveyOutput {
        simulate_survey(plan, &SuspensionGeometry::default(), cfg).unwrap()
    }

    fn line_samples(out: &SurveyOutput) -> impl Iterator<Item = &AttitudeSample> {
        out.attitude.values().iter().filter(|a| a.segment == Segment::Line)
    }

    #[test]
    fn same_seed_same_output() {
        let p = plan(2, 1);
        let a = run(&p, &SimConfig::default());
        let b = run(&p, &SimConfig::default());
        assert_eq!(a.attitude, b.attitude);
        assert_eq!(a.mag, b.mag);
        assert_eq!(a.rad, b.rad);
        assert_eq!(a.base, b.base);
        let c = run(&p, &SimConfig { seed: 7, ..SimConfig::default() });
        assert_ne!(a.mag, c.mag);
    }

    #[test]
    fn heading_locked_by_platform() {
        let out = run(&plan(2, 1), &SimConfig::default());
        assert!(out.attitude.values().iter().all(|a| a.payload_heading == a.uav_yaw.rem_euclid(360.0)));
    }

    #[test]
    fn heading_lag_capped_without_platform() {
        let geom = SuspensionGeometry { intermediate_platform: false, ..SuspensionGeometry::default() };
        let out = simulate_survey(&plan(2, 0), &geom, &SimConfig::default()).unwrap();
        let errs: Vec<f64> =
            out.attitude.values().iter().map(|a| wrap180(a.uav_yaw - a.payload_heading).abs()).collect();
        assert!(errs.iter().all(|e| *e <= geom.yaw_lag_cap_deg + 1e-9));
        assert!(errs.iter().any(|e| *e > 1.0));
    }

    #[test]
    fn single_straight_line_stays_in_envelope() {
        let out = run(&plan(1, 0), &SimConfig::default());
        assert!(line_samples(&out).all(|a| {
            [a.uav_roll, a.uav_pitch, a.swing_along, a.swing_cross].iter().all(|x| x.abs() <= 5.0)
        }));
        let truth: Vec<f64> = out
            .vlf
            .values()
            .iter()
            .zip(out.attitude.values())
            .filter(|(_, a)| a.segment == Segment::Line)
            .map(|(v, _)| {
                let t = SimConfig::default().vlf.eval(
                    v.position.easting - out.plan.origin_utm.easting,
                    v.position.northing - out.plan.origin_utm.northing,
                );
                v.out_of_phase - t.out_of_phase
            })
            .collect();
        let band = 1.96 * crate::stats::population_std(&truth).unwrap();
        assert!(band <= 4.0, "{band}");
    }

    #[test]
    fn hover_has_no_swing() {
        let cfg = SimConfig { speed: 0.0, ..SimConfig::default() };
        let out = run(&plan(1, 0), &cfg);
        assert!(out.attitude.values().iter().all(|a| a.swing_along == 0.0 && a.swing_cross == 0.0));
        let resid: Vec<f64> = out
            .vlf
            .values()
            .iter()
            .map(|v| {
                let t = cfg.vlf.eval(
                    v.position.easting - out.plan.origin_utm.easting,
                    v.position.northing - out.plan.origin_utm.northing,
                );
                v.out_of_phase - t.out_of_phase
            })
            .collect();
        let sd = crate::stats::population_std(&resid).unwrap();
        let expect = 0.85 * cfg.outphase_noise_pct / 1.96;
        assert!((sd - expect).abs() / expect < 0.1, "{sd} vs {expect}");
    }

    #[test]
    fn turn_ring_down_follows_envelope() {
        let out = run(&plan(2, 0), &SimConfig::default());
        let r = ring_down_rates(&out.attitude, 9.0, 1.0);
        assert_eq!(r.len(), 1);
        let expect = out.zeta_eff * out.omega;
        assert!((r[0].rate - expect).abs() / expect < 0.05, "{} vs {expect}", r[0].rate);
        assert!(r[0].start_amplitude_deg > 5.0);
    }

    #[test]
    fn more_damping_never_slower() {
        let p = plan(2, 0);
        let slow = run(&p, &SimConfig::default());
        let fast = run(&p, &SimConfig { damping_ratio: 0.16, ..SimConfig::default() });
        let a = settling_metrics(&slow.attitude, 1.0, 5.0, 9.0).unwrap();
        let b = settling_metrics(&fast.attitude, 1.0, 5.0, 9.0).unwrap();
        assert!(b.settling_time_s <= a.settling_time_s);
        assert!(a.lead_in_distance_m < SimConfig::default().lead_in_m);
    }

    #[test]
    fn noiseless_crossovers_agree() {
        let cfg = SimConfig {
            noise_floor: 0.0,
            emi_a1: 0.0,
            diurnal: DiurnalModel { amplitude_nt: 0.0, drift_nt_per_s: 0.0, ..DiurnalModel::default() },
            ..SimConfig::default()
        };
        let out = run(&FlightPlan::default(), &cfg);
        let flights = out.lines_with_role(&out.mag, LineRole::Flight);
        let ties = out.lines_with_role(&out.mag, LineRole::Tie);
        assert_eq!((flights.len(), ties.len()), (4, 1));
        let (records, _) = crossover_analysis(&flights, &ties, CrossoverField::Tmi, 1.0).unwrap();
        assert_eq!(records.len(), 4);
        let v: Vec<f64> = out.mag.values().iter().map(|m| m.tmi).collect();
        let range = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        assert!(records.iter().all(|r| r.difference.abs() < 0.01 * range));
    }

    #[test]
    fn base_covers_flight_with_margin() {
        let out = run(&plan(2, 0), &SimConfig::default());
        assert!(out.base.start().unwrap() <= out.mag.start().unwrap() - 60.0);
        assert!(out.base.end().unwrap() >= out.mag.end().unwrap() + 60.0);
    }

    #[test]
    fn line_windows_exclude_turns() {
        let out = run(&plan(3, 1), &SimConfig::default());
        for l in out.split_lines(&out.attitude) {
            assert!(l.samples().values().iter().all(|a| a.segment == Segment::Line));
        }
    }
}
