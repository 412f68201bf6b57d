//! Interval bounds on every pre-activation over a box of normalized inputs.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::surrogate::{MlpNetwork, LAMBDA};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Sign status of a neuron's pre-activation over the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// Never positive: the output is identically 0.
    Inactive,
    /// Never negative: the ReLU is the identity.
    Active,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronBounds {
    /// Pre-activation interval per layer and neuron.
    pub pre: Vec<Vec<Interval>>,
}

impl NeuronBounds {
    pub fn phase(&self, layer: usize, neuron: usize) -> Phase {
        let b = self.pre[layer][neuron];
        if b.hi <= 0.0 {
            Phase::Inactive
        } else if b.lo >= 0.0 {
            Phase::Active
        } else {
            Phase::Unstable
        }
    }

    /// Big-M constants `(M, M_neg)` = `(max(0, hi), max(0, -lo))`.
    pub fn big_m(&self, layer: usize, neuron: usize) -> (f64, f64) {
        let b = self.pre[layer][neuron];
        (b.hi.max(0.0), (-b.lo).max(0.0))
    }

    pub fn unstable_count(&self) -> usize {
        (0..self.pre.len())
            .map(|k| {
                (0..self.pre[k].len())
                    .filter(|&j| self.phase(k, j) == Phase::Unstable)
                    .count()
            })
            .sum()
    }
}

/// Interval forward pass. `fixed[k][j]`, when set, forces neuron `j` of
/// layer `k` active (`true`) or inactive (`false`); returns `None` when a
/// forced state contradicts the propagated interval.
pub fn propagate(net: &MlpNetwork, input: &[Interval], fixed: Option<&[Vec<Option<bool>>]>) -> Option<NeuronBounds> {
    let mut lo: Vec<f64> = input.iter().map(|i| i.lo).collect();
    let mut hi: Vec<f64> = input.iter().map(|i| i.hi).collect();
    let mut pre = Vec::with_capacity(net.layers().len());
    for (k, layer) in net.layers().iter().enumerate() {
        let mut layer_pre = Vec::with_capacity(layer.outputs());
        let (mut next_lo, mut next_hi) = (Vec::with_capacity(layer.outputs()), Vec::with_capacity(layer.outputs()));
        for j in 0..layer.outputs() {
            let (mut l, mut h) = (layer.b[j], layer.b[j]);
            for i in 0..layer.inputs() {
                let w = layer.w[(j, i)];
                if w >= 0.0 {
                    l += w * lo[i];
                    h += w * hi[i];
                } else {
                    l += w * hi[i];
                    h += w * lo[i];
                }
            }
            layer_pre.push(Interval::new(l, h));
            let (mut ol, mut oh) = (l.max(0.0), h.max(0.0));
            match fixed.and_then(|f| f[k][j]) {
                Some(true) => {
                    if h < 0.0 {
                        return None;
                    }
                }
                Some(false) => {
                    if l > 0.0 {
                        return None;
                    }
                    ol = 0.0;
                    oh = 0.0;
                }
                None => {}
            }
            next_lo.push(ol);
            next_hi.push(oh);
        }
        pre.push(layer_pre);
        lo = next_lo;
        hi = next_hi;
    }
    Some(NeuronBounds { pre })
}

pub fn compute_neuron_bounds(net: &MlpNetwork, input: &[Interval]) -> NeuronBounds {
    propagate(net, input, None).expect("unconstrained propagation cannot conflict")
}

/// Normalized input box of the inversion: the five fixed inputs as points
/// and the overlap factor over `[0, 1 - eps]`. Fixed inputs must lie inside
/// the training ranges.
pub fn inverse_box(net: &MlpNetwork, fixed: &[f64; 5], eps: f64) -> Result<Vec<Interval>> {
    if net.input_dim() != 6 {
        return Err(param(
            "network",
            format!("inversion needs 6 inputs, network has {}", net.input_dim()),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param("epsilon", format!("must lie in (0, 1), got {eps}")));
    }
    let mut probe = [0.0; 6];
    probe[..5].copy_from_slice(fixed);
    probe[LAMBDA] = net.norms().input[LAMBDA].lo();
    net.check_inputs(&probe)?;
    let norms = &net.norms().input;
    let mut b: Vec<Interval> = (0..5).map(|i| Interval::point(norms[i].normalize(fixed[i]))).collect();
    let r = norms[LAMBDA];
    b.push(Interval::new(r.normalize(0.0), r.normalize(1.0 - eps)));
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{Layer, Norms, Range};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_norms(n: usize) -> Norms {
        let r = Range::new(-1.0, 1.0).unwrap();
        Norms {
            input: vec![r; n],
            output: r,
        }
    }

    #[test]
    fn zero_weights_fix_every_neuron() {
        let net = MlpNetwork::zeros(&[6, 20, 20, 1], unit_norms(6)).unwrap();
        let b = compute_neuron_bounds(&net, &vec![Interval::new(-1.0, 1.0); 6]);
        assert!(b.pre.iter().flatten().all(|i| i.lo == 0.0 && i.hi == 0.0));
        assert_eq!(b.unstable_count(), 0);
    }

    #[test]
    fn toy_bound() {
        let layers = vec![
            Layer {
                w: DMatrix::from_element(1, 1, 1.0),
                b: DVector::zeros(1),
            },
            Layer {
                w: DMatrix::from_element(1, 1, 1.0),
                b: DVector::zeros(1),
            },
        ];
        let net = MlpNetwork::from_layers(layers, unit_norms(1)).unwrap();
        let b = compute_neuron_bounds(&net, &[Interval::new(-1.0, 1.0)]);
        assert_eq!(b.pre[0][0], Interval::new(-1.0, 1.0));
        assert_eq!(b.big_m(0, 0), (1.0, 1.0));
        assert_eq!(b.phase(0, 0), Phase::Unstable);
        assert_eq!(b.phase(1, 0), Phase::Active);
    }

    #[test]
    fn bounds_contain_sampled_pre_activations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut violations = 0;
        for net_seed in 0..10 {
            let net =
                MlpNetwork::random(&[6, 20, 20, 1], unit_norms(6), &mut ChaCha8Rng::seed_from_u64(net_seed)).unwrap();
            let fixed: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut bx: Vec<Interval> = fixed.iter().map(|v| Interval::point(*v)).collect();
            bx.push(Interval::new(-1.0, 1.0));
            let b = compute_neuron_bounds(&net, &bx);
            for _ in 0..10_000 {
                let mut x = fixed.clone();
                x.push(rng.random_range(-1.0..=1.0));
                let act = net.activations(&DVector::from_vec(x));
                for (k, z) in act.pre.iter().enumerate() {
                    for (j, v) in z.iter().enumerate() {
                        let i = b.pre[k][j];
                        if !(v >= &(i.lo - 1e-12) && v <= &(i.hi + 1e-12)) {
                            violations += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn forced_states_clip_and_conflict() {
        let layers = vec![
            Layer {
                w: DMatrix::from_element(1, 1, 1.0),
                b: DVector::zeros(1),
            },
            Layer {
                w: DMatrix::from_element(1, 1, 1.0),
                b: DVector::zeros(1),
            },
        ];
        let net = MlpNetwork::from_layers(layers, unit_norms(1)).unwrap();
        let off = vec![vec![Some(false)], vec![None]];
        let b = propagate(&net, &[Interval::new(-1.0, 1.0)], Some(&off)).unwrap();
        assert_eq!(b.pre[1][0], Interval::new(0.0, 0.0));
        let on = vec![vec![Some(true)], vec![None]];
        assert!(propagate(&net, &[Interval::new(-1.0, -0.5)], Some(&on)).is_none());
    }
}
