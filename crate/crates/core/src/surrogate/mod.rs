//! Neural-network surrogate for the maximum position uncertainty of a
//! straight-tunnel mission.

pub mod dataset;
pub mod mlp;
pub mod normalize;
pub mod train;

pub use dataset::{generate_dataset, simulate_p_max, Domains, Sample, SampleSet, SimConfig, Split};
pub use mlp::{Activations, Layer, MlpNetwork, Norms, INPUT_NAMES, LAMBDA};
pub use normalize::{denormalize, normalize, Range};
pub use train::{normalized_rmse, train, train_tables, Table, TrainConfig, TrainReport};
