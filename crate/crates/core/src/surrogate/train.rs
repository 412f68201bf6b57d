//! Mini-batch gradient descent with momentum on the squared error of
//! normalized targets.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{SampleSet, Split};
use super::mlp::{Layer, MlpNetwork, Norms};
use super::normalize::Range;
use crate::error::{param, NavError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Stop after this many epochs without a better validation error.
    pub patience: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: vec![20, 20],
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            patience: Some(40),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(param("hidden", "layer widths must be positive"));
        }
        if self.batch_size == 0 {
            return Err(param("batch_size", "must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(param("learning_rate", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(param("momentum", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean squared error on normalized targets.
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub curve: Vec<EpochStats>,
    /// Epoch whose parameters were kept (0 is the initialization).
    pub best_epoch: usize,
    pub best_val_mse: f64,
}

/// Inputs and targets in raw units.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Table {
    pub fn from_split(set: &SampleSet, split: Split) -> Self {
        let rows: Vec<_> = set.split(split).collect();
        Table {
            x: rows.iter().map(|s| s.inputs().to_vec()).collect(),
            y: rows.iter().map(|s| s.p_max).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Input ranges are the per-column extremes of the training inputs. The
/// output range puts the training targets on [0, 1] of the normalized scale,
/// the half the output ReLU can reach.
pub fn fit_norms(train: &Table) -> Result<Norms> {
    if train.is_empty() {
        return Err(param("train", "training split is empty"));
    }
    let dim = train.x[0].len();
    let input = (0..dim)
        .map(|j| Range::covering(train.x.iter().map(|r| r[j])))
        .collect::<Result<Vec<_>>>()?;
    let y = Range::covering(train.y.iter().copied())?;
    let output = Range::new(y.lo() - y.width(), y.hi())?;
    Ok(Norms { input, output })
}

struct Normalized {
    x: Vec<DVector<f64>>,
    y: Vec<f64>,
}

fn normalized(net: &MlpNetwork, table: &Table) -> Normalized {
    Normalized {
        x: table.x.iter().map(|r| net.normalize_input(r)).collect(),
        y: table.y.iter().map(|y| net.norms().output.normalize(*y)).collect(),
    }
}

fn mse(net: &MlpNetwork, data: &Normalized) -> f64 {
    if data.y.is_empty() {
        return f64::NAN;
    }
    let sum: f64 = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(x, y)| (net.forward_normalized(x) - y).powi(2))
        .sum();
    sum / data.y.len() as f64
}

/// The network training starts from for a given configuration.
pub fn initial_network(input_dim: usize, norms: Norms, config: &TrainConfig) -> Result<MlpNetwork> {
    let mut sizes = vec![input_dim];
    sizes.extend(&config.hidden);
    sizes.push(1);
    MlpNetwork::random(&sizes, norms, &mut ChaCha8Rng::seed_from_u64(config.seed))
}

/// Trains on `train` and keeps the parameters with the lowest validation
/// error. When `val` is empty the training error is used instead.
pub fn train_tables(train: &Table, val: &Table, config: &TrainConfig) -> Result<(MlpNetwork, TrainReport)> {
    config.validate()?;
    let norms = fit_norms(train)?;
    let mut net = initial_network(train.x[0].len(), norms, config)?;
    let tr = normalized(&net, train);
    let va = normalized(&net, val);
    let score = |net: &MlpNetwork| if va.y.is_empty() { mse(net, &tr) } else { mse(net, &va) };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..tr.y.len()).collect();
    let mut velocity: Vec<Layer> = net
        .layers()
        .iter()
        .map(|l| Layer::zeros(l.inputs(), l.outputs()))
        .collect();

    let mut best = net.clone();
    let mut best_val = score(&net);
    let mut report = TrainReport {
        curve: Vec::new(),
        best_epoch: 0,
        best_val_mse: best_val,
    };
    let mut since_best = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let mut grad: Vec<Layer> = velocity.iter().map(|l| Layer::zeros(l.inputs(), l.outputs())).collect();
            for &i in batch {
                let (_, g) = net.loss_gradient(&tr.x[i], tr.y[i]);
                for (acc, gk) in grad.iter_mut().zip(&g) {
                    acc.w += &gk.w;
                    acc.b += &gk.b;
                }
            }
            let scale = config.learning_rate / batch.len() as f64;
            for (v, g) in velocity.iter_mut().zip(&grad) {
                v.w = &v.w * config.momentum - &g.w * scale;
                v.b = &v.b * config.momentum - &g.b * scale;
            }
            net.apply_step(&velocity, 1.0);
        }
        let train_mse = mse(&net, &tr);
        let val_mse = score(&net);
        if !train_mse.is_finite() || !val_mse.is_finite() {
            return Err(NavError::TrainingDiverged { epoch, loss: train_mse });
        }
        report.curve.push(EpochStats {
            epoch,
            train_mse,
            val_mse: if va.y.is_empty() { f64::NAN } else { val_mse },
        });
        if val_mse < best_val {
            best_val = val_mse;
            best = net.clone();
            report.best_epoch = epoch;
            report.best_val_mse = val_mse;
            since_best = 0;
        } else {
            since_best += 1;
            if config.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    Ok((best, report))
}

/// Trains the surrogate on the train and val splits of `set`.
pub fn train(set: &SampleSet, config: &TrainConfig) -> Result<(MlpNetwork, TrainReport)> {
    let t = Table::from_split(set, Split::Train);
    if t.is_empty() {
        return Err(param("dataset", "no training rows"));
    }
    train_tables(&t, &Table::from_split(set, Split::Val), config)
}

/// Root-mean-square prediction error divided by the spread (max - min) of
/// the targets.
pub fn normalized_rmse(net: &MlpNetwork, table: &Table) -> Result<f64> {
    if table.is_empty() {
        return Err(param("table", "no rows to evaluate"));
    }
    let n = table.len() as f64;
    let sse: f64 = table
        .x
        .iter()
        .zip(&table.y)
        .map(|(x, y)| (net.forward(x) - y).powi(2))
        .sum();
    let spread = Range::covering(table.y.iter().copied())?.width();
    Ok((sse / n).sqrt() / spread)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn relu_table(n: usize, seed: u64) -> Table {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let y = x.iter().map(|r| r[0].max(0.0)).collect();
        Table { x, y }
    }

    #[test]
    fn recovers_relu() {
        let all = relu_table(1000, 1);
        let split = |r: std::ops::Range<usize>| Table {
            x: all.x[r.clone()].to_vec(),
            y: all.y[r].to_vec(),
        };
        let (train, val, test) = (split(0..700), split(700..900), split(900..1000));
        let config = TrainConfig {
            hidden: vec![8, 8],
            epochs: 300,
            patience: None,
            seed: 3,
            ..TrainConfig::default()
        };
        let (net, report) = train_tables(&train, &val, &config).unwrap();
        let test_mse: f64 = test
            .x
            .iter()
            .zip(&test.y)
            .map(|(x, y)| (net.forward(x) - y).powi(2))
            .sum::<f64>()
            / test.len() as f64;
        assert!(test_mse <= 1e-3, "test mse {test_mse}");
        assert!(report.best_epoch > 0);
        assert!(report.curve.windows(2).all(|w| w[1].epoch == w[0].epoch + 1));
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let train = relu_table(100, 2);
        let config = TrainConfig {
            hidden: vec![4],
            epochs: 5,
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        let (net, report) = train_tables(&train, &Table::default(), &config).unwrap();
        let init = initial_network(1, fit_norms(&train).unwrap(), &config).unwrap();
        assert_eq!(net, init);
        assert_eq!(report.best_epoch, 0);
    }

    #[test]
    fn divergence_is_reported() {
        // a NaN target makes the loss NaN on the first epoch
        let mut train = relu_table(100, 2);
        train.y[7] = f64::NAN;
        let config = TrainConfig {
            hidden: vec![8],
            epochs: 5,
            ..TrainConfig::default()
        };
        match train_tables(&train, &Table::default(), &config) {
            Err(NavError::TrainingDiverged { epoch: 1, loss }) => assert!(loss.is_nan()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let train = relu_table(10, 2);
        for bad in [
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                momentum: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: -1.0,
                ..TrainConfig::default()
            },
        ] {
            assert!(train_tables(&train, &Table::default(), &bad).is_err());
        }
        assert!(train_tables(&Table::default(), &Table::default(), &TrainConfig::default()).is_err());
    }

    #[test]
    fn output_range_keeps_targets_reachable() {
        let t = Table {
            x: vec![vec![0.0], vec![1.0]],
            y: vec![2.0, 5.0],
        };
        let n = fit_norms(&t).unwrap();
        assert_eq!(n.output.normalize(2.0), 0.0);
        assert_eq!(n.output.normalize(5.0), 1.0);
    }
}
