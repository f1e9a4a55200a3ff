use super::attitude::Segment;
use super::{FlightPlan, Result, SimConfig, SimError};
use crate::model::LineRole;

/// Unit vector (east, north) of an azimuth in degrees.
fn azimuth_vec(az_deg: f64) -> (f64, f64) {
    let a = az_deg.to_radians();
    (a.sin(), a.cos())
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Straight {
        start: (f64, f64),
        azimuth_deg: f64,
    },
    /// constant-rate turn; `right` turns clockwise seen from above
    Arc {
        center: (f64, f64),
        radius: f64,
        start_azimuth_deg: f64,
        right: bool,
    },
    Hover {
        at: (f64, f64),
        azimuth_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    shape: Shape,
    segment: Segment,
    leg: usize,
    t0: f64,
    duration: f64,
}

/// One continuous run of the path: a survey or tie line with its lead-in,
/// lead-out and (for flight lines) the following turn.
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub id: String,
    pub role: LineRole,
    pub t_start: f64,
    pub t_end: f64,
    /// the pendulum is reset to rest when the leg starts
    pub from_rest: bool,
}

/// Position, heading and horizontal acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub easting: f64,
    pub northing: f64,
    pub heading_deg: f64,
    /// acceleration along the heading, m/s²
    pub accel_along: f64,
    /// acceleration to the right of the heading, m/s²
    pub accel_cross: f64,
    pub segment: Segment,
    pub leg: usize,
}

/// Timed lawnmower trajectory at constant ground speed.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightPath {
    pieces: Vec<Piece>,
    legs: Vec<Leg>,
    speed: f64,
}

impl FlightPath {
    pub fn new(plan: &FlightPlan, cfg: &SimConfig) -> Result<Self> {
        let plan = cfg.apply_overrides(plan);
        validate_plan(&plan)?;
        let v = cfg.speed;
        let o = (plan.origin_utm.easting, plan.origin_utm.northing);
        if v == 0.0 {
            let piece = Piece {
                shape: Shape::Hover { at: o, azimuth_deg: plan.heading_deg },
                segment: Segment::Line,
                leg: 0,
                t0: 0.0,
                duration: cfg.hover_duration_s,
            };
            let leg = Leg {
                id: "H1".into(),
                role: LineRole::Flight,
                t_start: 0.0,
                t_end: cfg.hover_duration_s,
                from_rest: true,
            };
            return Ok(Self { pieces: vec![piece], legs: vec![leg], speed: 0.0 });
        }

        let mut b = Builder { pieces: Vec::new(), legs: Vec::new(), t: 0.0, v };
        let h = plan.heading_deg;
        let right = azimuth_vec(h + 90.0);
        let lead = cfg.lead_in_m;
        let len = plan.line_length_m;
        let r = plan.spacing_m / 2.0;
        for k in 0..plan.n_lines {
            let off = k as f64 * plan.spacing_m;
            let base = (o.0 + right.0 * off, o.1 + right.1 * off);
            let fwd = k % 2 == 0;
            let az = if fwd { h } else { h + 180.0 };
            let d = azimuth_vec(az);
            let line_start = if fwd {
                base
            } else {
                let f = azimuth_vec(h);
                (base.0 + f.0 * len, base.1 + f.1 * len)
            };
            let id = format!("L{}", k + 1);
            b.begin_leg(id, LineRole::Flight, k == 0);
            let leg = b.legs.len() - 1;
            let lead_start = (line_start.0 - d.0 * lead, line_start.1 - d.1 * lead);
            b.straight(lead_start, az, lead, Segment::LeadIn, leg);
            b.straight(line_start, az, len, Segment::Line, leg);
            let line_end = (line_start.0 + d.0 * len, line_start.1 + d.1 * len);
            b.straight(line_end, az, lead, Segment::LeadOut, leg);
            if k + 1 < plan.n_lines {
                // even lines turn right towards the next line, odd lines turn left
                let turn_right = fwd;
                let exit = (line_end.0 + d.0 * lead, line_end.1 + d.1 * lead);
                let side = azimuth_vec(if turn_right { az + 90.0 } else { az - 90.0 });
                let center = (exit.0 + side.0 * r, exit.1 + side.1 * r);
                b.arc(center, r, az, turn_right, 180.0, leg);
            }
            b.end_leg();
        }
        if plan.tie_lines > 0 {
            let f = azimuth_vec(h);
            let tie_az = h + 90.0;
            let tie_len = (plan.n_lines as f64 - 1.0) * plan.spacing_m + 2.0 * TIE_OVERHANG_M;
            for j in 0..plan.tie_lines {
                b.t += cfg.tie_gap_s;
                let along = (j as f64 + 1.0) / (plan.tie_lines as f64 + 1.0) * len;
                let start = (
                    o.0 + f.0 * along - right.0 * TIE_OVERHANG_M,
                    o.1 + f.1 * along - right.1 * TIE_OVERHANG_M,
                );
                b.begin_leg(format!("T{}", j + 1), LineRole::Tie, true);
                let leg = b.legs.len() - 1;
                let lead_start = (start.0 - right.0 * lead, start.1 - right.1 * lead);
                b.straight(lead_start, tie_az, lead, Segment::LeadIn, leg);
                b.straight(start, tie_az, tie_len, Segment::Line, leg);
                let end = (start.0 + right.0 * tie_len, start.1 + right.1 * tie_len);
                b.straight(end, tie_az, lead, Segment::LeadOut, leg);
                b.end_leg();
            }
        }
        Ok(Self { pieces: b.pieces, legs: b.legs, speed: v })
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Line-segment time window of each leg.
    pub fn line_windows(&self) -> Vec<(usize, f64, f64)> {
        self.pieces
            .iter()
            .filter(|p| p.segment == Segment::Line)
            .map(|p| (p.leg, p.t0, p.t0 + p.duration))
            .collect()
    }

    /// Kinematics at time `t` inside leg `leg`; `None` outside every piece of that leg.
    pub fn at(&self, t: f64, leg: usize) -> Option<Kinematics> {
        // the last piece whose start is not after t, restricted to the leg
        let piece = self.pieces.iter().rfind(|p| p.leg == leg && p.t0 <= t + 1e-12)?;
        let tau = (t - piece.t0).clamp(0.0, piece.duration);
        let v = self.speed;
        let k = match piece.shape {
            Shape::Straight { start, azimuth_deg } => {
                let d = azimuth_vec(azimuth_deg);
                Kinematics {
                    easting: start.0 + d.0 * v * tau,
                    northing: start.1 + d.1 * v * tau,
                    heading_deg: azimuth_deg,
                    accel_along: 0.0,
                    accel_cross: 0.0,
                    segment: piece.segment,
                    leg,
                }
            }
            Shape::Arc { center, radius, start_azimuth_deg, right } => {
                let turned = (v * tau / radius).to_degrees();
                let heading = if right { start_azimuth_deg + turned } else { start_azimuth_deg - turned };
                // the centre lies 90 degrees to the turning side of the heading
                let to_center = azimuth_vec(if right { heading + 90.0 } else { heading - 90.0 });
                Kinematics {
                    easting: center.0 - to_center.0 * radius,
                    northing: center.1 - to_center.1 * radius,
                    heading_deg: heading.rem_euclid(360.0),
                    accel_along: 0.0,
                    accel_cross: if right { v * v / radius } else { -v * v / radius },
                    segment: piece.segment,
                    leg,
                }
            }
            Shape::Hover { at, azimuth_deg } => Kinematics {
                easting: at.0,
                northing: at.1,
                heading_deg: azimuth_deg,
                accel_along: 0.0,
                accel_cross: 0.0,
                segment: piece.segment,
                leg,
            },
        };
        Some(k)
    }
}

/// Ties extend this far beyond the outermost flight lines.
pub const TIE_OVERHANG_M: f64 = 20.0;

fn validate_plan(p: &FlightPlan) -> Result<()> {
    if p.n_lines == 0 {
        return Err(SimError::DegeneratePlan("no lines".into()));
    }
    if !(p.line_length_m > 0.0) || !p.line_length_m.is_finite() {
        return Err(SimError::DegeneratePlan(format!("line length {}", p.line_length_m)));
    }
    if p.n_lines > 1 && !(p.spacing_m > 0.0) {
        return Err(SimError::DegeneratePlan(format!("line spacing {}", p.spacing_m)));
    }
    if p.tie_lines > 0 && p.n_lines < 2 {
        return Err(SimError::DegeneratePlan("tie lines need at least two flight lines".into()));
    }
    if !(p.altitude_m >= 0.0) || !p.heading_deg.is_finite() {
        return Err(SimError::DegeneratePlan("altitude must be >= 0 and heading finite".into()));
    }
    if !p.origin_utm.easting.is_finite() || !p.origin_utm.northing.is_finite() {
        return Err(SimError::DegeneratePlan("non-finite origin".into()));
    }
    Ok(())
}

struct Builder {
    pieces: Vec<Piece>,
    legs: Vec<Leg>,
    t: f64,
    v: f64,
}

impl Builder {
    fn begin_leg(&mut self, id: String, role: LineRole, from_rest: bool) {
        self.legs.push(Leg { id, role, t_start: self.t, t_end: self.t, from_rest });
    }

    fn end_leg(&mut self) {
        let t = self.t;
        if let Some(l) = self.legs.last_mut() {
            l.t_end = t;
        }
    }

    fn push(&mut self, shape: Shape, segment: Segment, leg: usize, length: f64) {
        let duration = length / self.v;
        if duration <= 0.0 {
            return;
        }
        self.pieces.push(Piece { shape, segment, leg, t0: self.t, duration });
        self.t += duration;
    }

    fn straight(&mut self, start: (f64, f64), azimuth_deg: f64, length: f64, segment: Segment, leg: usize) {
        self.push(Shape::Straight { start, azimuth_deg }, segment, leg, length);
    }

    fn arc(
        &mut self,
        center: (f64, f64),
        radius: f64,
        start_azimuth_deg: f64,
        right: bool,
        sweep_deg: f64,
        leg: usize,
    ) {
        let length = radius * sweep_deg.to_radians();
        self.push(Shape::Arc { center, radius, start_azimuth_deg, right }, Segment::Turn, leg, length);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(n: usize, ties: usize) -> FlightPlan {
        FlightPlan { n_lines: n, tie_lines: ties, ..Default::default() }
    }

    #[test]
    fn lines_are_parallel_and_spaced() {
        let p = plan(3, 0);
        let cfg = SimConfig::default();
        let path = FlightPath::new(&p, &cfg).unwrap();
        let w = path.line_windows();
        assert_eq!(w.len(), 3);
        // heading east, lines step south by the spacing
        for (k, (leg, t0, t1)) in w.iter().enumerate() {
            let a = path.at(*t0, *leg).unwrap();
            let b = path.at(*t1, *leg).unwrap();
            assert!((a.northing - (p.origin_utm.northing - 25.0 * k as f64)).abs() < 1e-9);
            assert!(((b.easting - a.easting).abs() - 500.0).abs() < 1e-6);
            assert!((t1 - t0 - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn turn_joins_consecutive_lines() {
        let p = plan(2, 0);
        let cfg = SimConfig::default();
        let path = FlightPath::new(&p, &cfg).unwrap();
        let leg0 = &path.legs()[0];
        let end = path.at(leg0.t_end, 0).unwrap();
        let next = path.at(path.legs()[1].t_start, 1).unwrap();
        assert!((end.easting - next.easting).abs() < 1e-6 && (end.northing - next.northing).abs() < 1e-6);
        assert!(((end.heading_deg - 270.0).abs()) < 1e-9);
        let mid = path.at(leg0.t_end - 1.0, 0).unwrap();
        assert_eq!(mid.segment, Segment::Turn);
        assert!((mid.accel_cross - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tie_crosses_all_lines() {
        let p = plan(4, 1);
        let path = FlightPath::new(&p, &SimConfig::default()).unwrap();
        let tie = path.legs().iter().position(|l| l.role == LineRole::Tie).unwrap();
        let (_, t0, t1) = path.line_windows().into_iter().find(|w| w.0 == tie).unwrap();
        let a = path.at(t0, tie).unwrap();
        let b = path.at(t1, tie).unwrap();
        assert!((a.easting - (p.origin_utm.easting + 250.0)).abs() < 1e-9);
        assert!((a.northing - (p.origin_utm.northing + 20.0)).abs() < 1e-9);
        assert!((b.northing - (p.origin_utm.northing - 95.0)).abs() < 1e-9);
        assert!(path.legs()[tie].from_rest);
    }

    #[test]
    fn degenerate_plans() {
        let cfg = SimConfig::default();
        assert!(matches!(FlightPath::new(&plan(0, 0), &cfg), Err(SimError::DegeneratePlan(_))));
        assert!(matches!(FlightPath::new(&plan(1, 1), &cfg), Err(SimError::DegeneratePlan(_))));
        let mut p = plan(2, 0);
        p.line_length_m = 0.0;
        assert!(FlightPath::new(&p, &cfg).is_err());
    }

    #[test]
    fn hover_is_stationary() {
        let cfg = SimConfig { speed: 0.0, ..Default::default() };
        let path = FlightPath::new(&plan(1, 0), &cfg).unwrap();
        let a = path.at(0.0, 0).unwrap();
        let b = path.at(30.0, 0).unwrap();
        assert_eq!((a.easting, a.northing), (b.easting, b.northing));
        assert_eq!(b.accel_cross, 0.0);
    }
}
