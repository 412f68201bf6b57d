//! Exact network response along the overlap factor, as a piecewise-affine
//! function, and the closed-form inverse on it.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{bounds::inverse_box, InverseSolution, Method};
use crate::error::{param, Result};
use crate::surrogate::{MlpNetwork, LAMBDA};

/// `f(lambda) = a + b * lambda` on one piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub fn eval(&self, x: f64) -> f64 {
        self.a + self.b * x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwlFunction {
    /// `pieces.len() + 1` increasing breakpoints.
    breakpoints: Vec<f64>,
    pieces: Vec<Affine>,
}

impl PwlFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Affine>) -> Result<Self> {
        if pieces.is_empty() || breakpoints.len() != pieces.len() + 1 {
            return Err(param("pwl", "need one more breakpoint than pieces"));
        }
        if breakpoints
            .windows(2)
            .any(|w| !(w[0] < w[1]) && !(w[0] == w[1] && pieces.len() == 1))
        {
            return Err(param("pwl", "breakpoints must increase"));
        }
        Ok(PwlFunction { breakpoints, pieces })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    fn piece_index(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|b| *b <= x);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Largest jump between adjacent pieces at their shared breakpoint.
    pub fn max_discontinuity(&self) -> f64 {
        (1..self.pieces.len())
            .map(|k| {
                let x = self.breakpoints[k];
                (self.pieces[k - 1].eval(x) - self.pieces[k].eval(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A segment of the overlap-factor domain on which the current layer's
/// outputs are `a + lambda * b`.
struct Segment {
    lo: f64,
    hi: f64,
    a: DVector<f64>,
    b: DVector<f64>,
}

/// Propagates the affine input family `lambda -> (fixed, lambda)` through the
/// network, splitting at every zero crossing, and returns the denormalized
/// output over `[0, 1 - eps]`.
pub fn pwl_propagate(net: &MlpNetwork, fixed: &[f64; 5], eps: f64) -> Result<PwlFunction> {
    let bx = inverse_box(net, fixed, eps)?;
    let r = net.norms().input[LAMBDA];
    let mut a = DVector::from_iterator(6, bx.iter().map(|i| i.lo));
    let mut b = DVector::zeros(6);
    // normalized lambda = 2 (lambda - lo) / w - 1
    b[LAMBDA] = 2.0 / r.width();
    a[LAMBDA] = -2.0 * r.lo() / r.width() - 1.0;
    let mut segs = vec![Segment {
        lo: 0.0,
        hi: 1.0 - eps,
        a,
        b,
    }];

    for layer in net.layers() {
        let mut next = Vec::with_capacity(segs.len());
        for s in segs {
            let pa = &layer.w * &s.a + &layer.b;
            let pb = &layer.w * &s.b;
            let mut cuts: Vec<f64> = (0..pa.len())
                .filter(|&j| pb[j] != 0.0)
                .map(|j| -pa[j] / pb[j])
                .filter(|x| *x > s.lo && *x < s.hi)
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut edges = vec![s.lo];
            edges.extend(cuts);
            edges.push(s.hi);
            for w in edges.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let mut oa = pa.clone();
                let mut ob = pb.clone();
                for j in 0..oa.len() {
                    if oa[j] + ob[j] * mid <= 0.0 {
                        oa[j] = 0.0;
                        ob[j] = 0.0;
                    }
                }
                next.push(Segment {
                    lo: w[0],
                    hi: w[1],
                    a: oa,
                    b: ob,
                });
            }
        }
        segs = next;
    }

    let out = net.norms().output;
    let s = 0.5 * out.width();
    let mut breakpoints = vec![segs[0].lo];
    let mut pieces: Vec<Affine> = Vec::new();
    for seg in &segs {
        let piece = Affine {
            a: out.lo() + s * (seg.a[0] + 1.0),
            b: s * seg.b[0],
        };
        let same = pieces.last().is_some_and(|p| {
            let tol = 1e-12 * (1.0 + p.a.abs() + p.b.abs());
            (p.a - piece.a).abs() <= tol && (p.b - piece.b).abs() <= tol
        });
        if same {
            *breakpoints.last_mut().unwrap() = seg.hi;
        } else {
            pieces.push(piece);
            breakpoints.push(seg.hi);
        }
    }
    PwlFunction::new(breakpoints, pieces)
}

/// Candidate comparison: lower objective, then smaller lambda.
pub(crate) fn better(obj: f64, lambda: f64, best: Option<(f64, f64)>) -> bool {
    match best {
        None => true,
        Some((bo, bl)) => obj < bo - 1e-12 || (obj <= bo + 1e-12 && lambda < bl),
    }
}

/// Minimizes `(f(lambda) - p_e)^2` piece by piece in closed form.
pub fn solve_inverse_exact(pwl: &PwlFunction, p_e: f64, rho_max: f64) -> InverseSolution {
    let start = Instant::now();
    let mut best: Option<(f64, f64)> = None;
    for (k, p) in pwl.pieces().iter().enumerate() {
        let (lo, hi) = (pwl.breakpoints()[k], pwl.breakpoints()[k + 1]);
        let mut cands = vec![lo, hi];
        if p.b != 0.0 {
            let root = (p_e - p.a) / p.b;
            if root >= lo && root <= hi {
                cands.push(root);
            }
        }
        for x in cands {
            let obj = (p.eval(x) - p_e).abs();
            if better(obj, x, best) {
                best = Some((obj, x));
            }
        }
    }
    let (_, lambda) = best.expect("at least one piece");
    let p = pwl.eval(lambda);
    InverseSolution::new(Method::Exact, lambda, p, p_e, rho_max, 0, 0, start)
}

/// Dense evaluation of the forward pass on `points` evenly spaced values of
/// the overlap factor over `[0, 1 - eps]`.
pub fn grid_search(net: &MlpNetwork, fixed: &[f64; 5], p_e: f64, eps: f64, points: usize) -> Result<InverseSolution> {
    let start = Instant::now();
    inverse_box(net, fixed, eps)?;
    if points < 2 {
        return Err(param("points", "need at least 2 grid points"));
    }
    let mut x = [0.0; 6];
    x[..5].copy_from_slice(fixed);
    let mut best: Option<(f64, f64)> = None;
    for k in 0..points {
        let lambda = (1.0 - eps) * k as f64 / (points - 1) as f64;
        x[LAMBDA] = lambda;
        let obj = (net.forward(&x) - p_e).abs();
        if better(obj, lambda, best) {
            best = Some((obj, lambda));
        }
    }
    let (_, lambda) = best.unwrap();
    x[LAMBDA] = lambda;
    Ok(InverseSolution::new(
        Method::Grid,
        lambda,
        net.forward(&x),
        p_e,
        fixed[2],
        0,
        0,
        start,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{Layer, Norms, Range};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norms_with_lambda_identity() -> Norms {
        let mut input = vec![Range::new(0.0, 10.0).unwrap(); 6];
        input[LAMBDA] = Range::new(-1.0, 1.0).unwrap();
        Norms {
            input,
            output: Range::new(-1.0, 1.0).unwrap(),
        }
    }

    /// The 1-1-1 toy lifted to six inputs that only look at lambda.
    fn toy() -> MlpNetwork {
        let mut w1 = DMatrix::zeros(1, 6);
        w1[(0, LAMBDA)] = 1.0;
        let layers = vec![
            Layer {
                w: w1,
                b: DVector::from_element(1, -0.5),
            },
            Layer {
                w: DMatrix::from_element(1, 1, 1.0),
                b: DVector::zeros(1),
            },
        ];
        MlpNetwork::from_layers(layers, norms_with_lambda_identity()).unwrap()
    }

    const FIXED: [f64; 5] = [1.0, 1.0, 1.0, 1.0, 1.0];

    #[test]
    fn toy_has_two_pieces() {
        let f = pwl_propagate(&toy(), &FIXED, 1e-9).unwrap();
        assert_eq!(f.pieces().len(), 2);
        assert!((f.breakpoints()[1] - 0.5).abs() < 1e-15);
        assert_eq!(f.eval(0.25), 0.0);
        assert!((f.eval(0.75) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn linear_net_is_one_piece() {
        let mut w1 = DMatrix::zeros(2, 6);
        w1[(0, LAMBDA)] = 0.5;
        w1[(1, 0)] = 0.1;
        let layers = vec![
            Layer {
                w: w1,
                b: DVector::from_vec(vec![2.0, 2.0]),
            },
            Layer {
                w: DMatrix::from_row_slice(1, 2, &[0.3, 0.2]),
                b: DVector::zeros(1),
            },
        ];
        let net = MlpNetwork::from_layers(layers, norms_with_lambda_identity()).unwrap();
        let f = pwl_propagate(&net, &FIXED, 0.01).unwrap();
        assert_eq!(f.pieces().len(), 1);
    }

    #[test]
    fn identity_piece_inverse() {
        let f = PwlFunction::new(vec![0.0, 0.99], vec![Affine { a: 0.0, b: 1.0 }]).unwrap();
        let s = solve_inverse_exact(&f, 0.4, 90.0);
        assert!((s.lambda_star - 0.4).abs() < 1e-15 && s.objective == 0.0);
        assert!((s.d_star - 54.0).abs() < 1e-12);
    }

    #[test]
    fn constant_breaks_ties_toward_zero() {
        let f = PwlFunction::new(
            vec![0.0, 0.5, 0.99],
            vec![Affine { a: 1.0, b: 0.0 }, Affine { a: 1.0, b: 0.0 }],
        )
        .unwrap();
        let s = solve_inverse_exact(&f, 0.3, 90.0);
        assert_eq!(s.lambda_star, 0.0);
        assert!((s.objective - 0.7).abs() < 1e-15);
    }

    #[test]
    fn matches_forward_on_dense_grid() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut input = vec![Range::new(0.0, 1.0).unwrap(); 6];
            input[LAMBDA] = Range::new(0.0, 0.7).unwrap();
            let norms = Norms {
                input,
                output: Range::new(0.0, 2.0).unwrap(),
            };
            let net = MlpNetwork::random(&[6, 20, 20, 1], norms, &mut rng).unwrap();
            let fixed: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
            let f = pwl_propagate(&net, &fixed, 0.01).unwrap();
            assert!(f.max_discontinuity() <= 1e-9);
            let mut x = [0.0; 6];
            x[..5].copy_from_slice(&fixed);
            for k in 0..=10_000 {
                x[LAMBDA] = 0.99 * k as f64 / 10_000.0;
                assert!((f.eval(x[LAMBDA]) - net.forward(&x)).abs() <= 1e-9);
            }
            let exact = solve_inverse_exact(&f, 1.0, fixed[2]);
            let grid = grid_search(&net, &fixed, 1.0, 0.01, 10_001).unwrap();
            assert!(exact.objective <= grid.objective + 1e-12);
        }
    }
}
