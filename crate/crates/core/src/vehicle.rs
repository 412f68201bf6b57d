//! Unicycle vehicle kinematics, Jacobians and noise parameters.

use nalgebra::{Matrix3, Matrix3x2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::Point;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        VehicleState { x, y, psi }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.psi)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        VehicleState::new(v[0], v[1], v[2])
    }

    /// Exact propagation under constant controls for `dt` seconds.
    pub fn advance(&self, u: &ControlInput, dt: f64) -> VehicleState {
        let dpsi = u.omega * dt;
        let (dx, dy) = if dpsi.abs() < 1e-9 {
            let mid = self.psi + 0.5 * dpsi;
            (u.v * dt * mid.cos(), u.v * dt * mid.sin())
        } else {
            let r = u.v / u.omega;
            (
                r * ((self.psi + dpsi).sin() - self.psi.sin()),
                -r * ((self.psi + dpsi).cos() - self.psi.cos()),
            )
        };
        VehicleState::new(self.x + dx, self.y + dy, wrap_angle(self.psi + dpsi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub fn new(v: f64, omega: f64) -> Self {
        ControlInput { v, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub sigma_v: f64,
    pub sigma_omega: f64,
    pub sigma_range: f64,
    pub sigma_wall: f64,
    pub sigma_drop: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            sigma_v: 0.3,
            sigma_omega: 0.1,
            sigma_range: 0.1,
            sigma_wall: 0.05,
            sigma_drop: 0.1,
        }
    }
}

impl NoiseParams {
    pub fn zero() -> Self {
        NoiseParams {
            sigma_v: 0.0,
            sigma_omega: 0.0,
            sigma_range: 0.0,
            sigma_wall: 0.0,
            sigma_drop: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("sigma_v", self.sigma_v),
            ("sigma_omega", self.sigma_omega),
            ("sigma_range", self.sigma_range),
            ("sigma_wall", self.sigma_wall),
            ("sigma_drop", self.sigma_drop),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(param(field, format!("must be finite and >= 0, got {value}")));
            }
        }
        Ok(())
    }
}

pub fn vehicle_derivative(state: &VehicleState, u: &ControlInput) -> Vector3<f64> {
    Vector3::new(u.v * state.psi.cos(), u.v * state.psi.sin(), u.omega)
}

/// Jacobian of the kinematics with respect to the pose.
pub fn state_jacobian(state: &VehicleState, u: &ControlInput) -> Matrix3<f64> {
    let (s, c) = state.psi.sin_cos();
    Matrix3::new(0.0, 0.0, -u.v * s, 0.0, 0.0, u.v * c, 0.0, 0.0, 0.0)
}

/// Jacobian of the kinematics with respect to the controls.
pub fn control_jacobian(state: &VehicleState) -> Matrix3x2<f64> {
    let (s, c) = state.psi.sin_cos();
    Matrix3x2::new(c, 0.0, s, 0.0, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn derivative_examples() {
        let d = vehicle_derivative(&VehicleState::new(0.0, 0.0, 0.0), &ControlInput::new(3.0, 0.0));
        assert!(close(&d, &Vector3::new(3.0, 0.0, 0.0)));
        let d = vehicle_derivative(&VehicleState::new(0.0, 0.0, FRAC_PI_2), &ControlInput::new(2.0, 0.1));
        assert!(close(&d, &Vector3::new(0.0, 2.0, 0.1)));
        let d = vehicle_derivative(
            &VehicleState::new(5.0, 5.0, FRAC_PI_4),
            &ControlInput::new(2f64.sqrt(), 0.0),
        );
        assert!(close(&d, &Vector3::new(1.0, 1.0, 0.0)));
    }

    #[test]
    fn jacobian_examples() {
        let f = state_jacobian(&VehicleState::new(0.0, 0.0, 0.0), &ControlInput::new(3.0, 0.0));
        assert!(close(&f.column(2).into(), &Vector3::new(0.0, 3.0, 0.0)));
        let f = state_jacobian(&VehicleState::new(1.0, 2.0, 0.7), &ControlInput::new(0.0, 0.4));
        assert_eq!(f, Matrix3::zeros());
        let f = state_jacobian(&VehicleState::new(0.0, 0.0, FRAC_PI_2), &ControlInput::new(2.0, 0.0));
        assert!(close(&f.column(2).into(), &Vector3::new(-2.0, 0.0, 0.0)));
    }

    #[test]
    fn control_jacobian_examples() {
        let g = control_jacobian(&VehicleState::new(0.0, 0.0, 0.0));
        assert_eq!(g, Matrix3x2::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0));
        let g = control_jacobian(&VehicleState::new(0.0, 0.0, PI));
        assert!((g - Matrix3x2::new(-1.0, 0.0, 0.0, 0.0, 0.0, 1.0)).norm() < 1e-15);
        let psi = 0.9;
        let g = control_jacobian(&VehicleState::new(0.0, 0.0, psi));
        let p = g.transpose() * Vector3::new(psi.cos(), psi.sin(), 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-12);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn advance_matches_fine_euler() {
        let s0 = VehicleState::new(1.0, -2.0, 0.3);
        let u = ControlInput::new(3.0, 0.4);
        let exact = s0.advance(&u, 1.5);
        let mut s = s0.as_vector();
        let n = 200_000;
        let h = 1.5 / n as f64;
        for _ in 0..n {
            s += vehicle_derivative(&VehicleState::from_vector(&s), &u) * h;
        }
        assert!((exact.x - s[0]).abs() < 1e-4);
        assert!((exact.y - s[1]).abs() < 1e-4);
        assert!((exact.psi - wrap_angle(s[2])).abs() < 1e-9);
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseParams::default().validate().is_ok());
        assert!(NoiseParams::zero().validate().is_ok());
        let mut n = NoiseParams::default();
        n.sigma_wall = -0.1;
        assert!(n.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn state_jacobian_matches_finite_differences(
            x in -100.0..100.0f64, y in -100.0..100.0f64, psi in -PI..PI,
            v in 0.0..6.0f64, omega in -1.0..1.0f64,
        ) {
            let s = VehicleState::new(x, y, psi);
            let u = ControlInput::new(v, omega);
            let f = state_jacobian(&s, &u);
            let h = 1e-6;
            for j in 0..3 {
                let mut p = s.as_vector();
                let mut m = s.as_vector();
                p[j] += h;
                m[j] -= h;
                let col = (vehicle_derivative(&VehicleState::from_vector(&p), &u)
                    - vehicle_derivative(&VehicleState::from_vector(&m), &u))
                    / (2.0 * h);
                for i in 0..3 {
                    prop_assert!((col[i] - f[(i, j)]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn wrap_angle_is_in_half_open_interval(a in -50.0..50.0f64) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            prop_assert!(((a - w) / (2.0 * PI)).fract().abs() < 1e-9
                || (1.0 - ((a - w) / (2.0 * PI)).fract().abs()) < 1e-9);
        }
    }
}
