//! Mission simulation: ground truth, sensors, landmark drops, the filter and
//! trace extraction.

pub mod guidance;
pub mod montecarlo;
pub mod wall;

use std::io::Write;

use nalgebra::{Matrix2, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ekf::{EkfState, LandmarkId, RangeMeasurement, UncertaintyTrace};
use crate::error::{param, NavError, Result};
use crate::geometry::{heading_vector, left_normal, Point, TunnelTopology};
use crate::planner::{DropSchedule, Side};
use crate::vehicle::{wrap_angle, ControlInput, NoiseParams, VehicleState};

pub use guidance::GuidanceParams;
pub use montecarlo::{derive_seed, run_monte_carlo, McAggregate, RunSummary};
pub use wall::{WallController, WallGains};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallConfig {
    /// Update rate in Hz; `None` disables the sensors.
    pub rate: Option<f64>,
    pub gains: WallGains,
    /// Also feed the lateral offset to the filter as a pseudo-measurement.
    pub estimator_update: bool,
}

impl Default for WallConfig {
    fn default() -> Self {
        WallConfig {
            rate: None,
            gains: WallGains::default(),
            estimator_update: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionParams {
    /// Commanded speed (m/s).
    pub v: f64,
    pub noise: NoiseParams,
    /// Sensing range of the landmark ranging radio (m).
    pub rho_max: f64,
    /// Truth integration step (s).
    pub dt: f64,
    /// Range measurement and control rate (Hz).
    pub meas_rate: f64,
    pub wall: WallConfig,
    pub guidance: GuidanceParams,
    /// Diagonal of the initial pose covariance `(x, y, psi)`.
    pub initial_cov: [f64; 3],
    /// Gate measurements on line of sight.
    pub los: bool,
    /// Keep per-tick records in the trace.
    pub record_ticks: bool,
    /// Couple dropped landmarks to the heading estimate as well as the
    /// position estimate.
    pub heading_lever: bool,
    pub seed: u64,
}

impl Default for MissionParams {
    fn default() -> Self {
        MissionParams {
            v: 3.0,
            noise: NoiseParams::default(),
            rho_max: 90.0,
            dt: 0.02,
            meas_rate: 10.0,
            wall: WallConfig::default(),
            guidance: GuidanceParams::default(),
            initial_cov: [1e-4, 1e-4, 1e-4],
            los: true,
            record_ticks: true,
            heading_lever: false,
            seed: 0,
        }
    }
}

impl MissionParams {
    /// Mission at speed `v` with speed noise, sensing range and range noise
    /// as given and yaw-rate noise switched off. This is the noise model of
    /// the reference tunnel scenarios, which specify speed noise only.
    pub fn speed_noise_only(v: f64, sigma_v: f64, rho_max: f64, sigma_range: f64) -> Self {
        MissionParams {
            v,
            noise: NoiseParams {
                sigma_v,
                sigma_omega: 0.0,
                sigma_range,
                ..NoiseParams::default()
            },
            rho_max,
            ..MissionParams::default()
        }
    }

    pub fn validate(&self, topology: &TunnelTopology, offset: f64) -> Result<()> {
        let positive = [
            ("v", self.v),
            ("rho_max", self.rho_max),
            ("dt", self.dt),
            ("meas_rate", self.meas_rate),
            ("guidance.lookahead", self.guidance.lookahead),
            ("guidance.omega_max", self.guidance.omega_max),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(param(field, format!("must be positive, got {value}")));
            }
        }
        self.noise.validate()?;
        if let Some(rate) = self.wall.rate {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(param("wall.rate", format!("must be positive, got {rate}")));
            }
        }
        if self.initial_cov.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(param("initial_cov", "entries must be finite and >= 0"));
        }
        if !(offset >= 0.0 && offset < 0.5 * topology.width()) {
            return Err(param(
                "offset",
                format!(
                    "must lie in [0, width/2) = [0, {}), got {offset}",
                    0.5 * topology.width()
                ),
            ));
        }
        Ok(())
    }

    fn control_period(&self) -> f64 {
        1.0 / self.meas_rate
    }

    fn substeps(&self) -> usize {
        (self.control_period() / self.dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub t: f64,
    pub truth: VehicleState,
    pub est: VehicleState,
    pub p: f64,
    /// Filter variances of `(x, y, psi)`.
    pub var: [f64; 3],
    pub n_visible: usize,
    pub event: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub t: f64,
    /// Index of the schedule event, or `None` for a reactive turn drop.
    pub event: Option<usize>,
    pub landmark: usize,
    pub side: Side,
    pub truth: Point,
    pub estimate: Point,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TerminalError {
    pub x: f64,
    pub y: f64,
    pub position: f64,
    /// Signed error across the final segment, positive to its left.
    pub lateral: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MissionTrace {
    pub ticks: Vec<TickRecord>,
    pub drops: Vec<DropRecord>,
    pub uncertainty: UncertaintyTrace,
    pub terminal: TerminalError,
    /// Range measurements processed over the mission.
    pub measurements: usize,
    /// Fewest landmarks visible at any tick.
    pub min_visible: usize,
    /// Ticks with fewer than two visible landmarks.
    pub ticks_below_two: usize,
    /// Fraction of ticks whose x and y errors lie within three filter sigmas.
    pub containment: [f64; 2],
    pub duration: f64,
}

impl MissionTrace {
    pub fn p_max(&self) -> f64 {
        self.uncertainty.p_max()
    }
}

/// A landmark as seen by the simulator: identity, true position and the arc
/// length at which it was placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimLandmark {
    pub id: LandmarkId,
    pub position: Point,
    pub s: f64,
}

/// Landmarks within `rho_max` of `p` and, when `los` is set, with a clear
/// line of sight.
pub fn visible_landmarks(
    p: &Point,
    landmarks: &[SimLandmark],
    topology: &TunnelTopology,
    rho_max: f64,
    los: bool,
) -> Vec<LandmarkId> {
    landmarks
        .iter()
        .filter(|l| (l.position - p).norm() <= rho_max)
        .filter(|l| !los || topology.segment_clear(p, &l.position))
        .map(|l| l.id)
        .collect()
}

/// Known landmarks at the tunnel entrance, `offset` to either side.
pub fn known_landmarks(topology: &TunnelTopology, offset: f64) -> [Point; 2] {
    let (c, h) = topology.pose_at_clamped(0.0);
    let n = left_normal(&heading_vector(h));
    [c + n * offset, c - n * offset]
}

fn in_corridor(topology: &TunnelTopology, p: &Point) -> bool {
    if topology.contains(p) {
        return true;
    }
    let (s, lat) = topology.project(p);
    let at_end = s <= 1e-9 || s >= topology.length() - 1e-9;
    at_end && lat.abs() <= 0.5 * topology.width()
}

/// Moves `p` toward `anchor` until it lies inside the tunnel.
fn clamp_inside(topology: &TunnelTopology, anchor: &Point, p: Point) -> Point {
    if topology.contains(&p) {
        return p;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if topology.contains(&(anchor + (p - anchor) * mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    anchor + (p - anchor) * lo
}

struct Mission<'a> {
    topology: &'a TunnelTopology,
    params: &'a MissionParams,
    offset: f64,
    rng: ChaCha8Rng,
    truth: VehicleState,
    ekf: EkfState,
    progress: f64,
    landmarks: Vec<SimLandmark>,
    trace: MissionTrace,
    visible: Vec<LandmarkId>,
    events: Vec<String>,
}

fn label(id: LandmarkId) -> String {
    match id {
        LandmarkId::KnownA => "A".into(),
        LandmarkId::KnownB => "B".into(),
        LandmarkId::Dropped(i) => i.to_string(),
    }
}

impl Mission<'_> {
    fn gauss(&mut self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        sigma * self.rng.sample::<f64, _>(StandardNormal)
    }

    fn drop_landmark(&mut self, side: Side, s: f64, event: Option<usize>, t: f64) -> Result<()> {
        let sd = self.params.noise.sigma_drop;
        let sign = side.sign();
        let tp = self.truth.position();
        let nominal = tp + left_normal(&heading_vector(self.truth.psi)) * (sign * self.offset);
        let noisy = nominal + Point::new(self.gauss(sd), self.gauss(sd));
        let truth = clamp_inside(self.topology, &tp, noisy);
        let est_pose = self.ekf.pose();
        let lateral = left_normal(&heading_vector(est_pose.psi)) * (sign * self.offset);
        let estimate = est_pose.position() + lateral;
        let drop_cov = Matrix2::identity() * (sd * sd);
        let id = if self.params.heading_lever {
            let lever = -heading_vector(est_pose.psi) * (sign * self.offset);
            self.ekf.augment_landmark_with_lever(estimate, &lever, &drop_cov, t)?
        } else {
            self.ekf.augment_landmark(estimate, &drop_cov, t)?
        };
        self.landmarks.push(SimLandmark {
            id: LandmarkId::Dropped(id),
            position: truth,
            s,
        });
        self.trace.drops.push(DropRecord {
            t,
            event,
            landmark: id,
            side,
            truth,
            estimate,
        });
        let tag = match side {
            Side::Left => "L",
            Side::Right => "R",
        };
        self.events.push(format!("drop:{id}{tag}"));
        Ok(())
    }

    /// Removes dropped landmarks that can no longer come into range. Only
    /// applied to straight tunnels, where arc length bounds distance.
    fn retire_landmarks(&mut self) -> Result<()> {
        if !self.topology.turns().is_empty() {
            return Ok(());
        }
        let horizon = self.progress - self.params.rho_max - 5.0;
        let mut k = 0;
        while k < self.landmarks.len() {
            let l = self.landmarks[k];
            if let LandmarkId::Dropped(id) = l.id {
                if l.s < horizon {
                    self.ekf.remove_landmark(id)?;
                    self.landmarks.remove(k);
                    continue;
                }
            }
            k += 1;
        }
        Ok(())
    }

    fn measure(&mut self, t: f64) -> Result<()> {
        let p = self.truth.position();
        let visible = visible_landmarks(&p, &self.landmarks, self.topology, self.params.rho_max, self.params.los);
        for id in &visible {
            if !self.visible.contains(id) {
                self.events.push(format!("vis+:{}", label(*id)));
            }
        }
        for id in &self.visible {
            if !visible.contains(id) {
                self.events.push(format!("vis-:{}", label(*id)));
            }
        }
        let sr = self.params.noise.sigma_range;
        for id in &visible {
            let lm = self.landmarks.iter().find(|l| l.id == *id).unwrap().position;
            let range = ((lm - p).norm() + self.gauss(sr)).max(0.0);
            self.ekf.update_range(&RangeMeasurement { id: *id, range, t })?;
            self.trace.measurements += 1;
        }
        self.visible = visible;
        Ok(())
    }

    fn wall_pseudo_measurement(&mut self, reading: &wall::WallReading) {
        let seg = self.topology.segment_at(self.progress);
        let a = self.topology.centerline()[seg];
        let n = left_normal(&self.topology.segment_direction(seg));
        let var = 0.5 * self.params.noise.sigma_wall.powi(2) + 1e-6;
        self.ekf.update_linear_position(&n, &a, reading.offset(), var);
    }

    fn record(&mut self, t: f64) -> Result<()> {
        let p = self.ekf.position_uncertainty()?;
        self.trace.uncertainty.push(t, p);
        let n_visible = self.visible.len();
        self.trace.min_visible = self.trace.min_visible.min(n_visible);
        if n_visible < 2 {
            self.trace.ticks_below_two += 1;
        }
        let c = self.ekf.covariance();
        let var = [c[(0, 0)], c[(1, 1)], c[(2, 2)]];
        let est = self.ekf.pose();
        let (ex, ey) = (est.x - self.truth.x, est.y - self.truth.y);
        if ex.abs() <= 3.0 * var[0].sqrt() + 1e-12 {
            self.trace.containment[0] += 1.0;
        }
        if ey.abs() <= 3.0 * var[1].sqrt() + 1e-12 {
            self.trace.containment[1] += 1.0;
        }
        if self.params.record_ticks {
            self.trace.ticks.push(TickRecord {
                t,
                truth: self.truth,
                est,
                p,
                var,
                n_visible,
                event: self.events.join(";"),
            });
        }
        self.events.clear();
        Ok(())
    }
}

/// Simulates one traversal of `topology` following `schedule`.
pub fn run_mission(topology: &TunnelTopology, schedule: &DropSchedule, params: &MissionParams) -> Result<MissionTrace> {
    let length = topology.length();
    schedule.validate(length)?;
    params.validate(topology, schedule.offset)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (start, heading) = topology.pose_at_clamped(0.0);
    let nominal = VehicleState::new(start.x, start.y, heading);
    let sd = params.initial_cov.map(f64::sqrt);
    let mut perturb = |s: f64| {
        if s == 0.0 {
            0.0
        } else {
            s * rng.sample::<f64, _>(StandardNormal)
        }
    };
    let truth = VehicleState::new(
        nominal.x + perturb(sd[0]),
        nominal.y + perturb(sd[1]),
        wrap_angle(nominal.psi + perturb(sd[2])),
    );
    let known = known_landmarks(topology, schedule.offset);
    let ekf = EkfState::init(
        nominal,
        Matrix3::from_diagonal(&Vector3::from(params.initial_cov)),
        known,
        params.noise,
    )?;

    let mut m = Mission {
        topology,
        params,
        offset: schedule.offset,
        rng,
        truth,
        ekf,
        progress: 0.0,
        landmarks: vec![
            SimLandmark {
                id: LandmarkId::KnownA,
                position: known[0],
                s: 0.0,
            },
            SimLandmark {
                id: LandmarkId::KnownB,
                position: known[1],
                s: 0.0,
            },
        ],
        trace: MissionTrace {
            min_visible: usize::MAX,
            ..MissionTrace::default()
        },
        visible: Vec::new(),
        events: Vec::new(),
    };

    let drops = schedule.landmark_drops();
    let mut next_drop = 0;
    let mut reactive_left = schedule.turn_reserve / 2;
    let mut next_turn = 0;
    let period = params.control_period();
    let substeps = params.substeps();
    let h = period / substeps as f64;
    let wall_every = params
        .wall
        .rate
        .map(|r| ((params.meas_rate / r).round() as usize).max(1));
    let mut wall = WallController::new(params.wall.gains);
    let t_max = 3.0 * length / params.v + 120.0;

    let mut t = 0.0;
    let mut tick = 0usize;
    m.measure(t)?;
    m.record(t)?;

    while m.progress < length - 1e-9 {
        let est = m.ekf.pose();
        let cmd = guidance::pure_pursuit(&est, m.progress, params.v, topology, &params.guidance);

        let mut omega_c = 0.0;
        if let Some(every) = wall_every {
            if tick % every == 0 {
                if let Some(r) = wall::read_walls(&m.truth, topology, params.noise.sigma_wall, &mut m.rng) {
                    omega_c = wall.correction(&r, t, params.v);
                    if params.wall.estimator_update {
                        m.wall_pseudo_measurement(&r);
                    }
                }
            }
        }

        // Realized controls are drawn once per tick and held over the substeps.
        let u = ControlInput::new(
            cmd.v + m.gauss(params.noise.sigma_v),
            cmd.omega + omega_c + m.gauss(params.noise.sigma_omega),
        );
        for _ in 0..substeps {
            m.truth = m.truth.advance(&u, h);
            if !in_corridor(topology, &m.truth.position()) {
                return Err(NavError::LeftTunnel {
                    t,
                    x: m.truth.x,
                    y: m.truth.y,
                });
            }
        }
        m.ekf.predict(&cmd, period, 1)?;
        t = (tick + 1) as f64 * period;
        tick += 1;

        let est_p = m.ekf.pose().position();
        let (s_proj, _) = topology.project_window(
            &est_p,
            m.progress - 1.0,
            m.progress + params.v * period * 4.0 + params.guidance.lookahead,
        );
        m.progress = m.progress.max(s_proj);

        while next_drop < drops.len() && drops[next_drop].0 <= m.progress + 1e-9 {
            let (s, side, event) = drops[next_drop];
            m.drop_landmark(side, s, Some(event), t)?;
            next_drop += 1;
        }
        while reactive_left > 0 && next_turn < topology.turns().len() && topology.turns()[next_turn].s <= m.progress {
            let s = topology.turns()[next_turn].s;
            m.drop_landmark(Side::Left, s, None, t)?;
            m.drop_landmark(Side::Right, s, None, t)?;
            reactive_left -= 1;
            next_turn += 1;
        }
        m.retire_landmarks()?;
        m.measure(t)?;
        m.record(t)?;

        if t > t_max {
            return Err(NavError::MissionTimeout { t });
        }
    }

    let est = m.ekf.pose();
    let last_dir = topology.segment_direction(topology.segment_count() - 1);
    let de = est.position() - m.truth.position();
    m.trace.terminal = TerminalError {
        x: de.x,
        y: de.y,
        position: de.norm(),
        lateral: left_normal(&last_dir).dot(&de),
        psi: wrap_angle(est.psi - m.truth.psi),
    };
    let n = m.trace.uncertainty.t.len() as f64;
    m.trace.containment[0] /= n;
    m.trace.containment[1] /= n;
    m.trace.duration = t;
    Ok(m.trace)
}

/// Writes the per-tick records as CSV.
pub fn write_trace_csv<W: Write>(trace: &MissionTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t",
        "x_true",
        "y_true",
        "psi_true",
        "x_est",
        "y_est",
        "psi_est",
        "P",
        "n_visible",
        "event",
    ])?;
    for r in &trace.ticks {
        w.write_record(&[
            format!("{:.3}", r.t),
            r.truth.x.to_string(),
            r.truth.y.to_string(),
            r.truth.psi.to_string(),
            r.est.x.to_string(),
            r.est.y.to_string(),
            r.est.psi.to_string(),
            r.p.to_string(),
            r.n_visible.to_string(),
            r.event.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
