use serde::{Deserialize, Serialize};

use super::GRAVITY;

/// Linearised damped pendulum driven by suspension-point acceleration:
/// `θ'' + 2ζωθ' + ω²θ = -a/L`, with `ω = sqrt(g/L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    pub length: f64,
    pub zeta: f64,
    pub omega: f64,
}

/// Swing of both horizontal axes plus payload heading error, in degrees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    pub swing_along: f64,
    pub swing_along_rate: f64,
    pub swing_cross: f64,
    pub swing_cross_rate: f64,
    pub heading_error: f64,
}

impl Pendulum {
    pub fn new(length: f64, zeta: f64) -> Self {
        Self { length, zeta, omega: (GRAVITY / length).sqrt() }
    }

    fn deriv(&self, theta: f64, rate: f64, accel: f64) -> (f64, f64) {
        let w = self.omega;
        (rate, -2.0 * self.zeta * w * rate - w * w * theta - accel / self.length)
    }

    /// One RK4 step of length `h` (radians, rad/s); `accel` holds the forcing
    /// at the start, middle and end of the step.
    pub fn step(&self, theta: f64, rate: f64, h: f64, accel: [f64; 3]) -> (f64, f64) {
        let (k1x, k1v) = self.deriv(theta, rate, accel[0]);
        let (k2x, k2v) = self.deriv(theta + 0.5 * h * k1x, rate + 0.5 * h * k1v, accel[1]);
        let (k3x, k3v) = self.deriv(theta + 0.5 * h * k2x, rate + 0.5 * h * k2v, accel[1]);
        let (k4x, k4v) = self.deriv(theta + h * k3x, rate + h * k3v, accel[2]);
        (
            theta + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            rate + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    }

    /// Mechanical energy per unit `mL²`.
    pub fn energy(&self, theta: f64, rate: f64) -> f64 {
        0.5 * rate * rate + 0.5 * self.omega * self.omega * theta * theta
    }

    /// Free-decay envelope rate `ζω` (1/s).
    pub fn decay_rate(&self) -> f64 {
        self.zeta * self.omega
    }

    /// Closed-form free response from `(θ0, 0)`.
    pub fn free_response(&self, theta0: f64, t: f64) -> f64 {
        let w = self.omega;
        let z = self.zeta;
        if z < 1.0 {
            let wd = w * (1.0 - z * z).sqrt();
            theta0 * (-z * w * t).exp() * ((wd * t).cos() + z * w / wd * (wd * t).sin())
        } else {
            theta0 * (-w * t).exp() * (1.0 + w * t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_matches_closed_form() {
        let p = Pendulum::new(9.0, 0.12);
        let (mut th, mut om) = (0.2, 0.0);
        let h = 0.01;
        for k in 1..=3000 {
            (th, om) = p.step(th, om, h, [0.0; 3]);
            let t = k as f64 * h;
            assert!((th - p.free_response(0.2, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn energy_non_increasing_with_damping() {
        for zeta in [0.01, 0.08, 0.3] {
            let p = Pendulum::new(9.0, zeta);
            let (mut th, mut om) = (0.1, 0.05);
            let mut e = p.energy(th, om);
            for _ in 0..5000 {
                (th, om) = p.step(th, om, 0.01, [0.0; 3]);
                let e2 = p.energy(th, om);
                assert!(e2 <= e * (1.0 + 1e-6));
                e = e2;
            }
        }
    }

    #[test]
    fn constant_acceleration_settles_at_static_angle() {
        let p = Pendulum::new(9.0, 0.5);
        let (mut th, mut om) = (0.0, 0.0);
        for _ in 0..10000 {
            (th, om) = p.step(th, om, 0.01, [2.0; 3]);
        }
        assert!((th + 2.0 / GRAVITY).abs() < 1e-9);
    }
}
