use thiserror::Error;

pub type Result<T, E = NavError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum NavError {
    #[error("invalid tunnel: {0}")]
    InvalidTunnel(String),

    #[error("arc length {s} outside [0, {length}]")]
    ArcLengthOutOfRange { s: f64, length: f64 },

    #[error("point ({x}, {y}) is outside the tunnel")]
    OutsideTunnel { x: f64, y: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("turn {0} does not belong to this topology")]
    UnknownTurn(usize),

    #[error("covariance is not symmetric positive semidefinite: {0}")]
    NotPsd(String),

    #[error("unknown landmark {0}")]
    UnknownLandmark(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("vehicle left the tunnel at t = {t:.2} s (x = {x:.3}, y = {y:.3})")]
    LeftTunnel { t: f64, x: f64, y: f64 },

    #[error("mission did not reach the exit within {t:.1} s")]
    MissionTimeout { t: f64 },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    TrainingDiverged { epoch: usize, loss: f64 },

    #[error("input `{field}` = {value} is outside the network's training range [{lo}, {hi}]")]
    Extrapolation {
        field: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("linear program solver stalled after {iterations} iterations")]
    LpStalled { iterations: usize },

    #[error("internal solver error: {0}")]
    Solver(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl NavError {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        NavError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            NavError::TrainingDiverged { .. } | NavError::LpStalled { .. } | NavError::Solver(_)
        )
    }
}

pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> NavError {
    NavError::param(field, reason)
}
