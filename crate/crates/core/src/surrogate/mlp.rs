//! Fully connected ReLU network with min-max normalization at both ends.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::normalize::Range;
use crate::error::{param, NavError, Result};

/// Names of the six surrogate inputs, in order.
pub const INPUT_NAMES: [&str; 6] = ["v", "sigma_v", "rho_max", "sigma_range", "L", "lambda"];

/// Index of the overlap factor among the inputs.
pub const LAMBDA: usize = 5;

/// ReLU that lets NaN through, so a broken network is not silently masked.
fn relu(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Weights `w` (outputs x inputs) and biases `b` of one layer. Every layer,
/// the output layer included, applies a ReLU after the affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            w: DMatrix::zeros(outputs, inputs),
            b: DVector::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn pre_activation(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.w * x + &self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    #[serde(rename = "in")]
    pub input: Vec<Range>,
    #[serde(rename = "out")]
    pub output: Range,
}

/// Per-layer intermediate values of one forward pass on normalized inputs.
#[derive(Debug, Clone)]
pub struct Activations {
    /// Normalized input.
    pub input: DVector<f64>,
    /// Pre-activations per layer.
    pub pre: Vec<DVector<f64>>,
    /// Post-activations per layer.
    pub post: Vec<DVector<f64>>,
}

impl Activations {
    /// Normalized network output.
    pub fn output(&self) -> f64 {
        self.post.last().map_or(0.0, |p| p[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    sizes: Vec<usize>,
    layers: Vec<Layer>,
    norms: Norms,
}

impl MlpNetwork {
    /// Network with all weights and biases zero.
    pub fn zeros(sizes: &[usize], norms: Norms) -> Result<Self> {
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        MlpNetwork::from_layers(layers, norms)
    }

    /// Glorot-uniform weights and zero biases. Output weights are drawn
    /// nonnegative so the output ReLU starts active wherever a hidden unit
    /// is; a dead output unit has no gradient and would never recover.
    pub fn random<R: Rng>(sizes: &[usize], norms: Norms, rng: &mut R) -> Result<Self> {
        let mut net = MlpNetwork::zeros(sizes, norms)?;
        let last = net.layers.len() - 1;
        for (k, layer) in net.layers.iter_mut().enumerate() {
            let bound = (6.0 / (layer.inputs() + layer.outputs()) as f64).sqrt();
            let lo = if k == last && k > 0 { 0.0 } else { -bound };
            layer.w.iter_mut().for_each(|w| *w = rng.random_range(lo..bound));
        }
        Ok(net)
    }

    pub fn from_layers(layers: Vec<Layer>, norms: Norms) -> Result<Self> {
        if layers.is_empty() {
            return Err(param("layers", "need at least one layer"));
        }
        let mut sizes = vec![layers[0].inputs()];
        for (k, layer) in layers.iter().enumerate() {
            if layer.inputs() != *sizes.last().unwrap() || layer.b.len() != layer.outputs() {
                return Err(param("layers", format!("layer {k} has inconsistent shape")));
            }
            if layer.w.iter().chain(layer.b.iter()).any(|v| !v.is_finite()) {
                return Err(param("layers", format!("layer {k} has non-finite entries")));
            }
            sizes.push(layer.outputs());
        }
        if *sizes.last().unwrap() != 1 {
            return Err(param("sizes", "network must have a single output"));
        }
        if layers.last().unwrap().b[0] != 0.0 {
            return Err(param("layers", "output bias must be 0"));
        }
        if norms.input.len() != sizes[0] {
            return Err(param(
                "norms.in",
                format!("need {} ranges, got {}", sizes[0], norms.input.len()),
            ));
        }
        Ok(MlpNetwork { sizes, layers, norms })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn norms(&self) -> &Norms {
        &self.norms
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn normalize_input(&self, raw: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            raw.len(),
            raw.iter().zip(&self.norms.input).map(|(x, r)| r.normalize(*x)),
        )
    }

    /// Forward pass on a normalized input, keeping every intermediate value.
    pub fn activations(&self, x: &DVector<f64>) -> Activations {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        for layer in &self.layers {
            let z = layer.pre_activation(&a);
            a = z.map(relu);
            pre.push(z);
            post.push(a.clone());
        }
        Activations {
            input: x.clone(),
            pre,
            post,
        }
    }

    /// Normalized output for a normalized input.
    pub fn forward_normalized(&self, x: &DVector<f64>) -> f64 {
        let mut a = x.clone();
        for layer in &self.layers {
            a = layer.pre_activation(&a).map(relu);
        }
        a[0]
    }

    /// Prediction in raw output units for raw inputs.
    pub fn forward(&self, raw: &[f64]) -> f64 {
        self.norms
            .output
            .denormalize(self.forward_normalized(&self.normalize_input(raw)))
    }

    /// Rejects inputs outside the ranges seen in training.
    pub fn check_inputs(&self, raw: &[f64]) -> Result<()> {
        if raw.len() != self.input_dim() {
            return Err(param(
                "input",
                format!("need {} values, got {}", self.input_dim(), raw.len()),
            ));
        }
        for (k, (x, r)) in raw.iter().zip(&self.norms.input).enumerate() {
            if !r.contains(*x) {
                let field = INPUT_NAMES.get(k).map_or_else(|| format!("x{k}"), |s| s.to_string());
                return Err(NavError::Extrapolation {
                    field,
                    value: *x,
                    lo: r.lo(),
                    hi: r.hi(),
                });
            }
        }
        Ok(())
    }

    /// Squared error `(y_hat - y)^2` on normalized values and its gradient.
    /// The output bias is fixed, so its gradient entry is always 0.
    pub fn loss_gradient(&self, x: &DVector<f64>, y: f64) -> (f64, Vec<Layer>) {
        let act = self.activations(x);
        let err = act.output() - y;
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        let mut delta = DVector::from_element(1, 2.0 * err);
        for k in (0..self.layers.len()).rev() {
            delta.zip_apply(&act.pre[k], |d, z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            let input = if k == 0 { &act.input } else { &act.post[k - 1] };
            let gw = &delta * input.transpose();
            let mut gb = delta.clone();
            if k + 1 == self.layers.len() {
                gb.fill(0.0);
            }
            let next = self.layers[k].w.transpose() * &delta;
            grads.push(Layer { w: gw, b: gb });
            delta = next;
        }
        grads.reverse();
        (err * err, grads)
    }

    /// Adds `step * direction` to every trainable parameter.
    pub fn apply_step(&mut self, direction: &[Layer], step: f64) {
        let last = self.layers.len() - 1;
        for (k, (layer, d)) in self.layers.iter_mut().zip(direction).enumerate() {
            layer.w += &d.w * step;
            if k != last {
                layer.b += &d.b * step;
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&WeightsFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightsFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        MlpNetwork::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    sizes: Vec<usize>,
    layers: Vec<LayerFile>,
    norms: Norms,
}

impl From<&MlpNetwork> for WeightsFile {
    fn from(net: &MlpNetwork) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| LayerFile {
                w: l.w.row_iter().map(|r| r.iter().copied().collect()).collect(),
                b: l.b.iter().copied().collect(),
            })
            .collect();
        WeightsFile {
            sizes: net.sizes.clone(),
            layers,
            norms: net.norms.clone(),
        }
    }
}

impl TryFrom<WeightsFile> for MlpNetwork {
    type Error = NavError;

    fn try_from(file: WeightsFile) -> Result<Self> {
        if file.sizes.len() != file.layers.len() + 1 {
            return Err(param("sizes", "must list one more size than there are layers"));
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        for (k, l) in file.layers.into_iter().enumerate() {
            let (rows, cols) = (file.sizes[k + 1], file.sizes[k]);
            if l.w.len() != rows || l.w.iter().any(|r| r.len() != cols) || l.b.len() != rows {
                return Err(param("layers", format!("layer {k} does not match sizes {rows}x{cols}")));
            }
            let w = DMatrix::from_row_iterator(rows, cols, l.w.into_iter().flatten());
            layers.push(Layer {
                w,
                b: DVector::from_vec(l.b),
            });
        }
        MlpNetwork::from_layers(layers, file.norms)
    }
}
