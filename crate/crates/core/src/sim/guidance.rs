//! Pure-pursuit path following on the estimated pose.

use serde::{Deserialize, Serialize};

use crate::geometry::TunnelTopology;
use crate::vehicle::{wrap_angle, ControlInput, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceParams {
    /// Look-ahead distance along the centerline (meters).
    pub lookahead: f64,
    /// Saturation of the commanded yaw rate (rad/s).
    pub omega_max: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        GuidanceParams {
            lookahead: 5.0,
            omega_max: 1.0,
        }
    }
}

/// Centerline point `s` meters along the path, continuing straight past the
/// exit.
fn target_point(topology: &TunnelTopology, s: f64) -> crate::Point {
    let length = topology.length();
    if s <= length {
        return topology.pose_at_clamped(s).0;
    }
    let (end, h) = topology.pose_at_clamped(length);
    end + crate::geometry::heading_vector(h) * (s - length)
}

/// Command steering `pose` toward the centerline point one look-ahead past
/// `progress`.
pub fn pure_pursuit(
    pose: &VehicleState,
    progress: f64,
    v: f64,
    topology: &TunnelTopology,
    params: &GuidanceParams,
) -> ControlInput {
    let target = target_point(topology, progress + params.lookahead);
    let d = target - pose.position();
    let dist = d.norm().max(1e-6);
    let alpha = wrap_angle(d.y.atan2(d.x) - pose.psi);
    let omega = (2.0 * v * alpha.sin() / dist).clamp(-params.omega_max, params.omega_max);
    ControlInput::new(v, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    #[test]
    fn on_centerline_goes_straight() {
        let t = TunnelTopology::straight(100.0, 20.0).unwrap();
        let u = pure_pursuit(
            &VehicleState::new(10.0, 0.0, 0.0),
            10.0,
            3.0,
            &t,
            &GuidanceParams::default(),
        );
        assert_eq!(u, ControlInput::new(3.0, 0.0));
    }

    #[test]
    fn steers_back_toward_path() {
        let t = TunnelTopology::straight(100.0, 20.0).unwrap();
        let g = GuidanceParams::default();
        let left = pure_pursuit(&VehicleState::new(10.0, 2.0, 0.0), 10.0, 3.0, &t, &g);
        assert!(left.omega < 0.0);
        let right = pure_pursuit(&VehicleState::new(10.0, -2.0, 0.0), 10.0, 3.0, &t, &g);
        assert!(right.omega > 0.0);
        let sat = pure_pursuit(&VehicleState::new(10.0, 0.0, 1.5), 10.0, 3.0, &t, &g);
        assert_eq!(sat.omega.abs(), 1.0);
    }

    #[test]
    fn target_continues_past_exit() {
        let t = TunnelTopology::straight(100.0, 20.0).unwrap();
        assert_eq!(target_point(&t, 103.0), Point::new(103.0, 0.0));
    }
}
