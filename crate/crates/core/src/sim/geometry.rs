use serde::{Deserialize, Serialize};

use super::{Result, SimError, SuspensionGeometry};

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

type M3 = [[f64; 3]; 3];

fn mat_mul(a: M3, b: M3) -> M3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn apply(m: M3, v: V3) -> V3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

fn rot_z(a: f64) -> M3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}
fn rot_y(a: f64) -> M3 {
    let (s, c) = a.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}
fn rot_x(a: f64) -> M3 {
    let (s, c) = a.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

/// Quasi-static payload placement under the UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayloadPose {
    /// payload centre relative to the UAV body origin: east, north, up (m)
    pub offset: [f64; 3],
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub heading_deg: f64,
    /// cables carrying load at the solution
    pub taut: [bool; 4],
}

impl PayloadPose {
    pub fn depth(&self) -> f64 {
        -self.offset[2]
    }
}

/// Centres of the four reachable balls: each cable of length `L` ties a
/// payload attachment point to its motor anchor, so the payload centre lies
/// within `L` of `anchor_world - R_heading * attachment`.
pub(crate) fn constraint_centres(
    geom: &SuspensionGeometry,
    roll_deg: f64,
    pitch_deg: f64,
    heading_deg: f64,
) -> [V3; 4] {
    let yaw = (90.0 - heading_deg).to_radians();
    // x forward, y left, z up; positive pitch is nose-up, positive roll lifts the left side
    let body = mat_mul(rot_z(yaw), mat_mul(rot_y(-pitch_deg.to_radians()), rot_x(roll_deg.to_radians())));
    let level = rot_z(yaw);
    std::array::from_fn(|i| {
        let a = apply(body, geom.motor_anchor_points[i]);
        let [px, py] = geom.platform_offsets[i];
        sub(a, apply(level, [px, py, 0.0]))
    })
}

/// Payload pose for a UAV attitude (degrees; heading clockwise from north).
///
/// The linkage keeps the payload level with its heading locked to the UAV;
/// the payload settles at the lowest point the four cables allow.
pub fn payload_pose(
    geom: &SuspensionGeometry,
    roll_deg: f64,
    pitch_deg: f64,
    heading_deg: f64,
) -> Result<PayloadPose> {
    geom.validate()?;
    let cos_tilt = roll_deg.to_radians().cos() * pitch_deg.to_radians().cos();
    let tilt_deg = cos_tilt.clamp(-1.0, 1.0).acos().to_degrees();
    if !(tilt_deg < 45.0) {
        return Err(SimError::SlackCable { tilt_deg });
    }
    let l = geom.cable_length;
    let c = constraint_centres(geom, roll_deg, pitch_deg, heading_deg);
    let tol = 1e-9 * l;
    let feasible = |p: V3| c.iter().all(|ci| norm(sub(p, *ci)) <= l + tol);

    let mut candidates: Vec<V3> = Vec::new();
    for ci in &c {
        candidates.push(sub(*ci, [0.0, 0.0, l]));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if let Some(p) = lowest_on_circle(c[i], c[j], l) {
                candidates.push(p);
            }
            for k in j + 1..4 {
                if let Some(p) = lower_triple_point(c[i], c[j], c[k], l) {
                    candidates.push(p);
                }
            }
        }
    }
    let best = candidates
        .into_iter()
        .filter(|p| feasible(*p))
        .min_by(|a, b| a[2].total_cmp(&b[2]))
        .ok_or_else(|| SimError::InvalidConfig("cable constraints have no common point".into()))?;
    let mut taut = [false; 4];
    for (t, ci) in taut.iter_mut().zip(&c) {
        *t = (norm(sub(best, *ci)) - l).abs() <= 1e-6 * l;
    }
    Ok(PayloadPose { offset: best, roll_deg: 0.0, pitch_deg: 0.0, heading_deg, taut })
}

/// Lowest point of the circle where two equal spheres meet.
fn lowest_on_circle(a: V3, b: V3, r: f64) -> Option<V3> {
    let ab = sub(b, a);
    let d = norm(ab);
    if d < 1e-12 || d >= 2.0 * r {
        return None;
    }
    let n = scale(ab, 1.0 / d);
    let m = add(a, scale(ab, 0.5));
    let rho = (r * r - 0.25 * d * d).sqrt();
    let down = [0.0, 0.0, -1.0];
    let u = sub(down, scale(n, dot(down, n)));
    let ul = norm(u);
    if ul < 1e-12 {
        return None;
    }
    Some(add(m, scale(u, rho / ul)))
}

/// Lower of the two points shared by three equal spheres.
fn lower_triple_point(p1: V3, p2: V3, p3: V3, r: f64) -> Option<V3> {
    let d = norm(sub(p2, p1));
    if d < 1e-12 {
        return None;
    }
    let ex = scale(sub(p2, p1), 1.0 / d);
    let p13 = sub(p3, p1);
    let i = dot(ex, p13);
    let ey_raw = sub(p13, scale(ex, i));
    let j = norm(ey_raw);
    if j < 1e-12 {
        return None;
    }
    let ey = scale(ey_raw, 1.0 / j);
    let ez = cross(ex, ey);
    let x = d / 2.0;
    let y = (i * i + j * j) / (2.0 * j) - i * x / j;
    let z2 = r * r - x * x - y * y;
    if z2 < 0.0 {
        return None;
    }
    let base = add(p1, add(scale(ex, x), scale(ey, y)));
    let z = z2.sqrt();
    let (a, b) = (add(base, scale(ez, z)), sub(base, scale(ez, z)));
    Some(if a[2] <= b[2] { a } else { b })
}
