//! Planning and simulation for unmanned-vehicle navigation through GPS-denied
//! tunnels using deployable range landmarks.
//!
//! The crate is organised along the workflow it implements:
//!
//! - [`geometry`]: tunnel topology, walls, line of sight and the pull-location solve.
//! - [`vehicle`]: unicycle kinematics, Jacobians and noise parameters.
//! - [`ekf`]: continuous-discrete EKF with landmark augmentation and the
//!   position-uncertainty metric.
//! - [`sim`]: ground-truth mission simulation and Monte Carlo batching.
//! - [`surrogate`]: the ReLU network that predicts maximum position uncertainty.
//! - [`inverse`]: exact inversion of the surrogate for the overlap factor.
//! - [`planner`]: drop schedules for the three levels of tunnel knowledge.

pub mod ekf;
pub mod error;
pub mod geometry;
pub mod inverse;
pub mod planner;
pub mod sim;
pub mod stats;
pub mod surrogate;
pub mod vehicle;

pub use error::{NavError, Result};
pub use geometry::Point;
