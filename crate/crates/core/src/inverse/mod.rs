//! Inversion of the surrogate for the overlap factor.

pub mod bounds;
pub mod lp;
pub mod milp;
pub mod pwl;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use bounds::{compute_neuron_bounds, inverse_box, Interval, NeuronBounds, Phase};
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus, RowKind};
pub use milp::{encode_relu_milp, output_extremes, solve_milp, BnbOptions, MilpModel};
pub use pwl::{grid_search, pwl_propagate, solve_inverse_exact, Affine, PwlFunction};

/// Default margin below 1 on the overlap factor.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Largest overlap factor present in the training data. Solutions above it
/// are extrapolations.
pub const TRAINED_LAMBDA_MAX: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Milp,
    Exact,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseSolution {
    pub lambda_star: f64,
    /// `rho_max (1 - lambda_star)` in meters.
    pub d_star: f64,
    /// Predicted maximum position uncertainty at `lambda_star` (meters).
    pub p_max_pred: f64,
    /// `|p_max_pred - p_e|` in meters.
    pub objective: f64,
    pub nodes: usize,
    pub lp_iters: usize,
    pub wall_ms: f64,
    pub method: Method,
    #[serde(skip)]
    pub warning: Option<String>,
}

impl InverseSolution {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        method: Method,
        lambda_star: f64,
        p_max_pred: f64,
        p_e: f64,
        rho_max: f64,
        nodes: usize,
        lp_iters: usize,
        start: Instant,
    ) -> Self {
        let warning = (lambda_star > TRAINED_LAMBDA_MAX).then(|| {
            format!(
                "lambda* = {lambda_star:.4} exceeds the trained range {TRAINED_LAMBDA_MAX}; prediction is extrapolated"
            )
        });
        InverseSolution {
            lambda_star,
            d_star: drop_distance(rho_max, lambda_star),
            p_max_pred,
            objective: (p_max_pred - p_e).abs(),
            nodes,
            lp_iters,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            method,
            warning,
        }
    }
}

/// Drop distance from the overlap factor: `d = rho_max (1 - lambda)`.
pub fn drop_distance(rho_max: f64, lambda: f64) -> f64 {
    rho_max * (1.0 - lambda)
}
