//! Scenario configuration read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tunnelnav::geometry::TunnelTopology;
use tunnelnav::inverse::DEFAULT_EPSILON;
use tunnelnav::sim::{GuidanceParams, MissionParams, WallConfig, WallGains};
use tunnelnav::surrogate::{Domains, SimConfig, TrainConfig};
use tunnelnav::vehicle::NoiseParams;
use tunnelnav::Point;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelSpec {
    pub waypoints: Vec<[f64; 2]>,
    pub width: f64,
}

impl TunnelSpec {
    pub fn build(&self) -> Result<TunnelTopology, CliError> {
        let pts: Vec<Point> = self.waypoints.iter().map(|p| Point::new(p[0], p[1])).collect();
        TunnelTopology::new(&pts, self.width).map_err(|e| CliError::config("tunnel", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InformationLevel {
    Straight,
    TurnCount,
    FullTopology,
}

fn default_sigma_wall() -> f64 {
    NoiseParams::default().sigma_wall
}

fn default_sigma_drop() -> f64 {
    NoiseParams::default().sigma_drop
}

fn default_offset() -> f64 {
    10.0
}

fn default_dt() -> f64 {
    0.02
}

fn default_meas_rate() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionSpec {
    pub v: f64,
    pub sigma_v: f64,
    /// Yaw-rate noise; the reference scenarios model speed noise only.
    #[serde(default)]
    pub sigma_omega: f64,
    pub rho_max: f64,
    pub sigma_range: f64,
    #[serde(default = "default_sigma_wall")]
    pub sigma_wall: f64,
    #[serde(default = "default_sigma_drop")]
    pub sigma_drop: f64,
    pub p_e: f64,
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_meas_rate")]
    pub meas_rate: f64,
    /// Wall-sensor rate in Hz; absent or null disables the sensors.
    #[serde(default)]
    pub wall_rate: Option<f64>,
    /// Also feed the wall offset to the filter.
    #[serde(default)]
    pub wall_estimator_update: bool,
}

impl MissionSpec {
    pub fn params(&self, seed: u64) -> MissionParams {
        MissionParams {
            v: self.v,
            noise: NoiseParams {
                sigma_v: self.sigma_v,
                sigma_omega: self.sigma_omega,
                sigma_range: self.sigma_range,
                sigma_wall: self.sigma_wall,
                sigma_drop: self.sigma_drop,
            },
            rho_max: self.rho_max,
            dt: self.dt,
            meas_rate: self.meas_rate,
            wall: WallConfig {
                rate: self.wall_rate,
                gains: WallGains::default(),
                estimator_update: self.wall_estimator_update,
            },
            guidance: GuidanceParams::default(),
            seed,
            ..MissionParams::default()
        }
    }
}

/// Optional overrides of artifact locations. Relative paths resolve against
/// the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpec {
    pub dataset: Option<PathBuf>,
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub tunnel: TunnelSpec,
    pub mission: MissionSpec,
    pub information: InformationLevel,
    /// Known number of turns at the turn-count level; defaults to the
    /// number of turns in the tunnel geometry.
    #[serde(default)]
    pub turns: Option<usize>,
    #[serde(default)]
    pub files: FileSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub domains: Option<Domains>,
    #[serde(default)]
    pub training: Option<TrainConfig>,
    /// Width of the straight tunnels used for dataset generation.
    #[serde(default)]
    pub dataset_width: Option<f64>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::missing(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(path.display().to_string(), e))
    }

    /// Field checks that do not depend on upstream artifacts.
    pub fn validate(&self) -> Result<TunnelTopology, CliError> {
        let topology = self.tunnel.build()?;
        let m = &self.mission;
        self.mission
            .params(self.seed)
            .validate(&topology, m.offset)
            .map_err(|e| CliError::config("mission", e))?;
        if !(m.p_e > 0.0 && m.p_e.is_finite()) {
            return Err(CliError::config("mission.p_e", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::config("epsilon", "must lie in (0, 1)"));
        }
        if let Some(d) = &self.domains {
            d.validate().map_err(|e| CliError::config("domains", e))?;
        }
        if let Some(t) = &self.training {
            t.validate().map_err(|e| CliError::config("training", e))?;
        }
        Ok(topology)
    }

    pub fn domains(&self) -> Domains {
        self.domains.clone().unwrap_or_default()
    }

    pub fn training(&self) -> TrainConfig {
        self.training.clone().unwrap_or_else(|| TrainConfig {
            seed: self.seed,
            ..TrainConfig::default()
        })
    }

    pub fn sim_config(&self) -> SimConfig {
        let base = SimConfig::default();
        SimConfig {
            mission: MissionParams {
                dt: self.mission.dt,
                meas_rate: self.mission.meas_rate,
                noise: NoiseParams {
                    sigma_omega: self.mission.sigma_omega,
                    sigma_drop: self.mission.sigma_drop,
                    ..base.mission.noise
                },
                ..base.mission
            },
            width: self.dataset_width.unwrap_or(base.width),
            offset: self.mission.offset,
        }
    }

    /// The five fixed surrogate inputs in network order.
    pub fn fixed_inputs(&self, length: f64) -> [f64; 5] {
        let m = &self.mission;
        [m.v, m.sigma_v, m.rho_max, m.sigma_range, length]
    }

    pub fn resolve(&self, dir: &Path, configured: &Option<PathBuf>, default: &str) -> PathBuf {
        match configured {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => dir.join(p),
            None => dir.join(default),
        }
    }
}
