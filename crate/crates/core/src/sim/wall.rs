//! Wall-distance sensors and the heading-correction loop they drive.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{heading_vector, left_normal, TunnelTopology};
use crate::vehicle::VehicleState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallGains {
    /// Yaw-rate command per meter of lateral offset (rad/s/m).
    pub kp: f64,
    /// Yaw-rate command per radian of heading relative to the corridor (1/s).
    pub kd: f64,
}

impl Default for WallGains {
    fn default() -> Self {
        WallGains { kp: 0.5, kd: 2.0 }
    }
}

/// Raw readings of the two perpendicular wall sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallReading {
    pub left: f64,
    pub right: f64,
}

impl WallReading {
    /// Lateral offset from the corridor middle, positive to the left.
    pub fn offset(&self) -> f64 {
        0.5 * (self.right - self.left)
    }
}

/// Casts the two perpendicular rays from the true pose. Returns `None` when a
/// ray misses the walls or the readings are inconsistent with the tunnel
/// width (for instance when a ray looks down a side passage at a corner).
pub fn read_walls<R: Rng>(
    pose: &VehicleState,
    topology: &TunnelTopology,
    sigma_wall: f64,
    rng: &mut R,
) -> Option<WallReading> {
    let n = left_normal(&heading_vector(pose.psi));
    let p = pose.position();
    let dl = topology.ray_to_wall(&p, &n)?;
    let dr = topology.ray_to_wall(&p, &(-n))?;
    let mut noise = || sigma_wall * rng.sample::<f64, _>(StandardNormal);
    let reading = WallReading {
        left: (dl + noise()).max(0.0),
        right: (dr + noise()).max(0.0),
    };
    let w = topology.width();
    if ((reading.left + reading.right) - w).abs() > 0.25 * w {
        return None;
    }
    Some(reading)
}

/// Low-rate heading correction keeping the vehicle between the walls.
#[derive(Debug, Clone)]
pub struct WallController {
    gains: WallGains,
    history: Vec<(f64, f64)>,
}

const HISTORY: usize = 5;

impl WallController {
    pub fn new(gains: WallGains) -> Self {
        WallController {
            gains,
            history: Vec::with_capacity(HISTORY),
        }
    }

    /// Relative heading inferred from the slope of recent lateral offsets.
    fn relative_heading(&self, v: f64) -> f64 {
        let n = self.history.len();
        if n < 2 || v <= 0.0 {
            return 0.0;
        }
        let nf = n as f64;
        let tm = self.history.iter().map(|h| h.0).sum::<f64>() / nf;
        let em = self.history.iter().map(|h| h.1).sum::<f64>() / nf;
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, e) in &self.history {
            num += (t - tm) * (e - em);
            den += (t - tm) * (t - tm);
        }
        if den <= 0.0 {
            return 0.0;
        }
        (num / den / v).clamp(-1.0, 1.0).asin()
    }

    /// Feeds one reading taken at time `t` and returns the yaw-rate correction.
    pub fn correction(&mut self, reading: &WallReading, t: f64, v: f64) -> f64 {
        let e = reading.offset();
        if self.history.len() == HISTORY {
            self.history.remove(0);
        }
        self.history.push((t, e));
        let theta = self.relative_heading(v);
        -self.gains.kp * e - self.gains.kd * theta
    }

    /// Reads the walls and returns the correction, or 0 when no valid
    /// reading is available.
    pub fn update<R: Rng>(
        &mut self,
        pose: &VehicleState,
        topology: &TunnelTopology,
        sigma_wall: f64,
        t: f64,
        v: f64,
        rng: &mut R,
    ) -> f64 {
        match read_walls(pose, topology, sigma_wall, rng) {
            Some(r) => self.correction(&r, t, v),
            None => 0.0,
        }
    }
}

/// One-shot wall correction from a fresh controller.
pub fn wall_update<R: Rng>(
    pose: &VehicleState,
    topology: &TunnelTopology,
    gains: &WallGains,
    sigma_wall: f64,
    rng: &mut R,
) -> f64 {
    WallController::new(*gains).update(pose, topology, sigma_wall, 0.0, 1.0, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn centered_and_aligned_gives_zero() {
        let t = TunnelTopology::straight(100.0, 24.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = wall_update(
            &VehicleState::new(50.0, 0.0, 0.0),
            &t,
            &WallGains::default(),
            0.0,
            &mut rng,
        );
        assert_eq!(c, 0.0);
    }

    #[test]
    fn sign_convention() {
        let t = TunnelTopology::straight(100.0, 24.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = WallGains::default();
        let toward_right = wall_update(&VehicleState::new(50.0, -3.0, 0.0), &t, &g, 0.0, &mut rng);
        assert!(toward_right > 0.0);
        let toward_left = wall_update(&VehicleState::new(50.0, 3.0, 0.0), &t, &g, 0.0, &mut rng);
        assert!(toward_left < 0.0);
    }

    #[test]
    fn drifting_left_adds_damping() {
        let t = TunnelTopology::straight(100.0, 24.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = WallController::new(WallGains { kp: 0.0, kd: 1.0 });
        let mut last = 0.0;
        for k in 0..5 {
            let y = 0.1 * k as f64;
            last = c.update(
                &VehicleState::new(50.0 + k as f64, y, 0.0),
                &t,
                0.0,
                k as f64,
                1.0,
                &mut rng,
            );
        }
        // offset grows 0.1 m per meter travelled
        assert!((last + 0.1f64.asin()).abs() < 1e-9);
    }

    #[test]
    fn readings_match_geometry() {
        let t = TunnelTopology::straight(100.0, 24.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = read_walls(&VehicleState::new(40.0, 2.0, 0.0), &t, 0.0, &mut rng).unwrap();
        assert!((r.left - 10.0).abs() < 1e-12 && (r.right - 14.0).abs() < 1e-12);
        assert!((r.offset() - 2.0).abs() < 1e-12);
    }
}
