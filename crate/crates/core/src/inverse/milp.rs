//! Big-M mixed-integer encoding of the ReLU network and a best-first
//! branch-and-bound over its activation binaries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use nalgebra::DVector;

use super::bounds::{inverse_box, propagate, Interval, NeuronBounds, Phase};
use super::lp::{solve_lp, LinearProgram, LpSolution, LpStatus, RowKind};
use super::{InverseSolution, Method};
use crate::error::{param, NavError, Result};
use crate::surrogate::{MlpNetwork, LAMBDA};

/// Forced activation states per layer and neuron (`true` = active).
type Forcing = Vec<Vec<Option<bool>>>;

/// LP variables of one neuron. `post` is `None` when the neuron is
/// eliminated as provably inactive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeuronVars {
    pub post: Option<usize>,
    pub neg: Option<usize>,
    pub z: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Binary {
    pub var: usize,
    pub layer: usize,
    pub neuron: usize,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub lp: LinearProgram,
    /// Normalized input variables; all but the overlap factor have equal bounds.
    pub inputs: Vec<usize>,
    pub neurons: Vec<Vec<NeuronVars>>,
    pub binaries: Vec<Binary>,
    /// Epigraph variable of the normalized deviation from the target.
    pub t: usize,
    pub bounds: NeuronBounds,
    /// Neurons removed as provably inactive.
    pub eliminated: usize,
    /// Normalized target output.
    pub target: f64,
    /// Raw output units per normalized unit.
    pub scale: f64,
}

impl MilpModel {
    pub fn lambda_var(&self) -> usize {
        self.inputs[LAMBDA]
    }

    /// Post-activation variable of the single output, `None` if it is
    /// identically 0.
    pub fn output_var(&self) -> Option<usize> {
        self.neurons.last().and_then(|l| l[0].post)
    }

    /// Normalized output value in an LP solution.
    pub fn output_value(&self, x: &[f64]) -> f64 {
        self.output_var().map_or(0.0, |v| x[v])
    }
}

/// Builds the encoding over `input` with per-neuron bounds `bounds`. Neurons
/// in `forcing` take the given state regardless of their interval; a forced
/// inactive neuron keeps the row `pre <= 0`.
fn build_model(
    net: &MlpNetwork,
    input: &[Interval],
    bounds: NeuronBounds,
    forcing: Option<&Forcing>,
    target: f64,
    scale: f64,
) -> MilpModel {
    let mut lp = LinearProgram::new();
    let inputs: Vec<usize> = input.iter().map(|i| lp.add_var(i.lo, i.hi, 0.0)).collect();
    let mut prev: Vec<Option<usize>> = inputs.iter().map(|&v| Some(v)).collect();
    let mut neurons = Vec::with_capacity(net.layers().len());
    let mut binaries = Vec::new();
    let mut eliminated = 0;

    for (k, layer) in net.layers().iter().enumerate() {
        let mut vars = Vec::with_capacity(layer.outputs());
        for j in 0..layer.outputs() {
            let mut coeffs: Vec<(usize, f64)> = (0..layer.inputs())
                .filter_map(|i| prev[i].map(|v| (v, layer.w[(j, i)])))
                .filter(|&(_, w)| w != 0.0)
                .collect();
            let rhs = -layer.b[j];
            let forced = forcing.and_then(|f| f[k][j]);
            let phase = match forced {
                Some(true) => Phase::Active,
                Some(false) => Phase::Inactive,
                None => bounds.phase(k, j),
            };
            let (m, m_neg) = bounds.big_m(k, j);
            let nv = match phase {
                Phase::Inactive => {
                    if bounds.pre[k][j].hi > 0.0 {
                        lp.add_row(coeffs, RowKind::Le, rhs);
                    }
                    eliminated += 1;
                    NeuronVars {
                        post: None,
                        neg: None,
                        z: None,
                    }
                }
                Phase::Active => {
                    let y = lp.add_var(bounds.pre[k][j].lo.max(0.0), m, 0.0);
                    coeffs.push((y, -1.0));
                    lp.add_row(coeffs, RowKind::Eq, rhs);
                    NeuronVars {
                        post: Some(y),
                        neg: None,
                        z: None,
                    }
                }
                Phase::Unstable => {
                    let y = lp.add_var(0.0, m, 0.0);
                    let yn = lp.add_var(0.0, m_neg, 0.0);
                    let z = lp.add_var(0.0, 1.0, 0.0);
                    coeffs.push((y, -1.0));
                    coeffs.push((yn, 1.0));
                    lp.add_row(coeffs, RowKind::Eq, rhs);
                    lp.add_row(vec![(y, 1.0), (z, -m)], RowKind::Le, 0.0);
                    lp.add_row(vec![(yn, 1.0), (z, m_neg)], RowKind::Le, m_neg);
                    binaries.push(Binary {
                        var: z,
                        layer: k,
                        neuron: j,
                    });
                    NeuronVars {
                        post: Some(y),
                        neg: Some(yn),
                        z: Some(z),
                    }
                }
            };
            vars.push(nv);
        }
        prev = vars.iter().map(|v| v.post).collect();
        neurons.push(vars);
    }

    // t >= |y - target|
    let out = neurons.last().and_then(|l| l[0].post);
    let out_hi = out.map_or(0.0, |v| lp.upper[v]);
    let t_hi = (out_hi - target).abs().max(target.abs()) + 1.0;
    let t = lp.add_var(0.0, t_hi, 1.0);
    match out {
        Some(y) => {
            lp.add_row(vec![(t, 1.0), (y, -1.0)], RowKind::Ge, -target);
            lp.add_row(vec![(t, 1.0), (y, 1.0)], RowKind::Ge, target);
        }
        None => {
            lp.add_row(vec![(t, 1.0)], RowKind::Ge, -target);
            lp.add_row(vec![(t, 1.0)], RowKind::Ge, target);
        }
    }
    MilpModel {
        lp,
        inputs,
        neurons,
        binaries,
        t,
        bounds,
        eliminated,
        target,
        scale,
    }
}

/// Encodes the inversion for the five fixed raw inputs and target `p_e`:
/// minimize the deviation of the output from `p_e` over the overlap factor
/// in `[0, 1 - eps]`.
pub fn encode_relu_milp(net: &MlpNetwork, fixed: &[f64; 5], p_e: f64, eps: f64) -> Result<MilpModel> {
    if !p_e.is_finite() {
        return Err(param("p_e", "must be finite"));
    }
    let input = inverse_box(net, fixed, eps)?;
    let bounds = propagate(net, &input, None).expect("unconstrained propagation cannot conflict");
    let out = net.norms().output;
    Ok(build_model(
        net,
        &input,
        bounds,
        None,
        out.normalize(p_e),
        0.5 * out.width(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbOptions {
    /// Absolute optimality gap in raw output units.
    pub gap: f64,
    pub node_limit: usize,
    /// Re-derive interval bounds and activation states at every node from
    /// its overlap-factor range and branching decisions.
    pub bound_fixing: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            gap: 1e-6,
            node_limit: 200_000,
            bound_fixing: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BnbStats {
    pub nodes: usize,
    pub lp_iters: usize,
    /// Incumbent objective (raw units) each time it improved.
    pub incumbents: Vec<f64>,
    /// Lowest open bound when the search stopped (raw units).
    pub final_bound: f64,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    lambda: Interval,
    forcing: Forcing,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest: lowest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

/// Raw output and its slope in the raw overlap factor at one point.
struct Probe {
    lambda: f64,
    value: f64,
    slope: f64,
}

struct Context<'a> {
    net: &'a MlpNetwork,
    /// Normalized fixed inputs.
    base: DVector<f64>,
    lambda_range: crate::surrogate::Range,
    p_e: f64,
    target: f64,
    scale: f64,
    input: Vec<Interval>,
}

impl Context<'_> {
    fn probe(&self, lambda: f64) -> Probe {
        let mut x = self.base.clone();
        x[LAMBDA] = self.lambda_range.normalize(lambda);
        let mut a = x;
        let mut da = DVector::zeros(a.len());
        da[LAMBDA] = 2.0 / self.lambda_range.width();
        for layer in self.net.layers() {
            let z = layer.pre_activation(&a);
            let dz = &layer.w * &da;
            let on: Vec<bool> = z.iter().map(|v| *v > 0.0).collect();
            a = DVector::from_iterator(z.len(), z.iter().zip(&on).map(|(v, o)| if *o { *v } else { 0.0 }));
            da = DVector::from_iterator(dz.len(), dz.iter().zip(&on).map(|(v, o)| if *o { *v } else { 0.0 }));
        }
        let out = self.net.norms().output;
        Probe {
            lambda,
            value: out.denormalize(a[0]),
            slope: self.scale * da[0],
        }
    }

    fn deviation(&self, p: &Probe) -> f64 {
        (p.value - self.p_e).abs()
    }

    fn lambda_box(&self, lam: Interval) -> Vec<Interval> {
        let mut b = self.input.clone();
        b[LAMBDA] = Interval::new(self.lambda_range.normalize(lam.lo), self.lambda_range.normalize(lam.hi));
        b
    }

    fn raw_lambda(&self, normalized: f64) -> f64 {
        self.lambda_range.denormalize(normalized)
    }
}

/// Incumbent tracking with the smaller-lambda tie-break.
#[derive(Default)]
struct Incumbent {
    best: Option<(f64, f64)>,
}

impl Incumbent {
    fn objective(&self) -> f64 {
        self.best.map_or(f64::INFINITY, |b| b.0)
    }

    fn offer(&mut self, obj: f64, lambda: f64, stats: &mut BnbStats) {
        if super::pwl::better(obj, lambda, self.best) {
            let improved = obj < self.objective();
            self.best = Some((obj, lambda));
            if improved {
                stats.incumbents.push(obj);
            }
        }
    }
}

/// Node work: bound fixing, the relaxation, and the tightened overlap-factor
/// range. Returns `None` when the node is infeasible.
struct Evaluated {
    model: MilpModel,
    lp: LpSolution,
    lambda: Interval,
    forcing: Forcing,
}

fn solve_counted(lp: &LinearProgram, stats: &mut BnbStats) -> Result<LpSolution> {
    let s = solve_lp(lp)?;
    stats.lp_iters += s.iterations;
    if s.status == LpStatus::Unbounded {
        return Err(NavError::Solver("node relaxation is unbounded".into()));
    }
    Ok(s)
}

fn evaluate_node(
    ctx: &Context,
    lambda: Interval,
    mut forcing: Forcing,
    cutoff: f64,
    opts: &BnbOptions,
    stats: &mut BnbStats,
) -> Result<Option<Evaluated>> {
    let input = ctx.lambda_box(lambda);
    let bounds = if opts.bound_fixing {
        match propagate(ctx.net, &input, Some(&forcing)) {
            Some(b) => b,
            None => return Ok(None),
        }
    } else {
        propagate(ctx.net, &ctx.lambda_box(lambda), None).expect("unconstrained propagation cannot conflict")
    };
    if opts.bound_fixing {
        for (k, layer) in forcing.iter_mut().enumerate() {
            for (j, f) in layer.iter_mut().enumerate() {
                if f.is_none() {
                    *f = match bounds.phase(k, j) {
                        Phase::Active => Some(true),
                        Phase::Inactive => Some(false),
                        Phase::Unstable => None,
                    };
                }
            }
        }
    }
    let mut model = build_model(ctx.net, &input, bounds, Some(&forcing), ctx.target, ctx.scale);
    if cutoff.is_finite() {
        let t = model.t;
        model.lp.upper[t] = model.lp.upper[t].min((cutoff / ctx.scale).max(0.0));
    }
    let lp = solve_counted(&model.lp, stats)?;
    if lp.status == LpStatus::Infeasible {
        return Ok(None);
    }
    Ok(Some(Evaluated {
        lambda,
        forcing,
        model,
        lp,
    }))
}

/// Tries the relaxation's overlap factor and a few Newton steps on the local
/// affine response as incumbents.
fn repair(ctx: &Context, lambda: f64, range: Interval, inc: &mut Incumbent, stats: &mut BnbStats) {
    let mut p = ctx.probe(lambda.clamp(range.lo, range.hi));
    inc.offer(ctx.deviation(&p), p.lambda, stats);
    for _ in 0..4 {
        if p.slope == 0.0 {
            break;
        }
        let next = (p.lambda - (p.value - ctx.p_e) / p.slope).clamp(range.lo, range.hi);
        if (next - p.lambda).abs() < 1e-15 {
            break;
        }
        p = ctx.probe(next);
        inc.offer(ctx.deviation(&p), p.lambda, stats);
    }
}

fn most_fractional(model: &MilpModel, x: &[f64]) -> Option<Binary> {
    let mut best: Option<(f64, Binary)> = None;
    for b in &model.binaries {
        let frac = (x[b.var] - x[b.var].round()).abs();
        if frac > 1e-9 && best.is_none_or(|(f, _)| frac > f) {
            best = Some((frac, *b));
        }
    }
    best.map(|b| b.1)
}

fn lambda_of(model: &MilpModel, x: &[f64], ctx: &Context) -> f64 {
    ctx.raw_lambda(x[model.lambda_var()])
}

/// Minimizes the deviation over the tree. Returns the incumbent `(objective,
/// lambda)` in raw units.
fn minimize_deviation(
    ctx: &Context,
    opts: &BnbOptions,
    stats: &mut BnbStats,
    root_lambda: Interval,
) -> Result<(f64, f64)> {
    let sizes: Vec<usize> = ctx.net.layers().iter().map(|l| l.outputs()).collect();
    let root_forcing: Forcing = sizes.iter().map(|&n| vec![None; n]).collect();
    let mut inc = Incumbent::default();
    for l in [root_lambda.lo, root_lambda.hi] {
        repair(ctx, l, root_lambda, &mut inc, stats);
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        bound: 0.0,
        depth: 0,
        id: next_id,
        lambda: root_lambda,
        forcing: root_forcing,
    });
    next_id += 1;
    while let Some(node) = heap.pop() {
        if node.bound >= inc.objective() - opts.gap {
            heap.push(node);
            break;
        }
        stats.nodes += 1;
        if stats.nodes > opts.node_limit {
            return Err(NavError::Solver(format!("node limit {} reached", opts.node_limit)));
        }
        let Some(ev) = evaluate_node(ctx, node.lambda, node.forcing, inc.objective() - opts.gap, opts, stats)? else {
            continue;
        };
        let bound = ev.lp.objective * ctx.scale;
        let lam = lambda_of(&ev.model, &ev.lp.x, ctx);
        repair(ctx, lam, ev.lambda, &mut inc, stats);
        if bound >= inc.objective() - opts.gap {
            continue;
        }
        let Some(b) = most_fractional(&ev.model, &ev.lp.x) else {
            // Integral relaxation: its point is exact and was offered above.
            continue;
        };
        let lambda = if opts.bound_fixing {
            tighten(ctx, &ev, stats)?
        } else {
            Some(ev.lambda)
        };
        let Some(lambda) = lambda else { continue };
        for state in [false, true] {
            let mut f = ev.forcing.clone();
            f[b.layer][b.neuron] = Some(state);
            heap.push(Node {
                bound,
                depth: node.depth + 1,
                id: next_id,
                lambda,
                forcing: f,
            });
            next_id += 1;
        }
    }
    stats.final_bound = heap.peek().map_or(inc.objective(), |n| n.bound.min(inc.objective()));
    inc.best
        .ok_or_else(|| NavError::Solver("no feasible point found".into()))
}

/// Shrinks the node's overlap-factor range to what its relaxation (including
/// the incumbent cutoff) allows.
fn tighten(ctx: &Context, ev: &Evaluated, stats: &mut BnbStats) -> Result<Option<Interval>> {
    let mut lp = ev.model.lp.clone();
    let lv = ev.model.lambda_var();
    lp.cost.iter_mut().for_each(|c| *c = 0.0);
    let mut ends = [0.0; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        lp.cost[lv] = sign;
        let s = solve_counted(&lp, stats)?;
        if s.status == LpStatus::Infeasible {
            return Ok(None);
        }
        ends[k] = ctx.raw_lambda(s.x[lv]);
    }
    let lo = ends[0].max(ev.lambda.lo);
    let hi = ends[1].min(ev.lambda.hi);
    if lo > hi {
        return Ok(Some(Interval::new(hi, hi)));
    }
    Ok(Some(Interval::new(lo, hi)))
}

/// Smallest overlap factor whose deviation is within `level`.
fn minimize_lambda(
    ctx: &Context,
    opts: &BnbOptions,
    stats: &mut BnbStats,
    root: Interval,
    level: f64,
    start: f64,
) -> Result<f64> {
    let sizes: Vec<usize> = ctx.net.layers().iter().map(|l| l.outputs()).collect();
    let mut best = start;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        bound: root.lo,
        depth: 0,
        id: next_id,
        lambda: root,
        forcing: sizes.iter().map(|&n| vec![None; n]).collect(),
    });
    next_id += 1;
    let tol = 1e-12;
    let accept = level + 1e-12;
    while let Some(node) = heap.pop() {
        if node.bound >= best - tol {
            break;
        }
        stats.nodes += 1;
        if stats.nodes > opts.node_limit {
            return Err(NavError::Solver(format!("node limit {} reached", opts.node_limit)));
        }
        let Some(ev) = evaluate_node(ctx, node.lambda, node.forcing, level, opts, stats)? else {
            continue;
        };
        let Some(range) = tighten(ctx, &ev, stats)? else {
            continue;
        };
        if range.lo >= best - tol {
            continue;
        }
        let p = ctx.probe(range.lo);
        if ctx.deviation(&p) <= accept {
            best = range.lo;
            continue;
        }
        // Lowest point of the local affine piece reaching the level.
        if p.slope != 0.0 {
            for goal in [ctx.p_e - level, ctx.p_e + level] {
                let l = range.lo + (goal - p.value) / p.slope;
                if l > range.lo && l < best {
                    let q = ctx.probe(l);
                    if ctx.deviation(&q) <= accept {
                        best = l;
                    }
                }
            }
        }
        let Some(b) = most_fractional(&ev.model, &ev.lp.x).or_else(|| first_unforced(&ev)) else {
            continue;
        };
        for state in [false, true] {
            let mut f = ev.forcing.clone();
            f[b.layer][b.neuron] = Some(state);
            heap.push(Node {
                bound: range.lo,
                depth: node.depth + 1,
                id: next_id,
                lambda: range,
                forcing: f,
            });
            next_id += 1;
        }
    }
    Ok(best)
}

/// Some still-free activation binary, used when the relaxation is integral
/// but the node's range is not yet decided.
fn first_unforced(ev: &Evaluated) -> Option<Binary> {
    ev.model
        .binaries
        .iter()
        .copied()
        .find(|b| ev.forcing[b.layer][b.neuron].is_none())
}

/// Solves the inversion by branch-and-bound: first the smallest deviation
/// from `p_e`, then the smallest overlap factor attaining it.
pub fn solve_milp(
    net: &MlpNetwork,
    fixed: &[f64; 5],
    p_e: f64,
    eps: f64,
    opts: &BnbOptions,
) -> Result<(InverseSolution, BnbStats)> {
    let start = Instant::now();
    let model = encode_relu_milp(net, fixed, p_e, eps)?;
    let ctx = Context {
        net,
        base: DVector::from_iterator(6, model.inputs.iter().map(|&v| model.lp.lower[v])),
        lambda_range: net.norms().input[LAMBDA],
        p_e,
        target: model.target,
        scale: model.scale,
        input: inverse_box(net, fixed, eps)?,
    };
    let root = Interval::new(0.0, 1.0 - eps);
    let mut stats = BnbStats::default();
    let (obj, lambda) = minimize_deviation(&ctx, opts, &mut stats, root)?;
    let level = obj + opts.gap.min(1e-7);
    let lambda = minimize_lambda(&ctx, opts, &mut stats, root, level, lambda)?;
    let p = ctx.probe(lambda);
    let sol = InverseSolution::new(
        Method::Milp,
        lambda,
        p.value,
        p_e,
        fixed[2],
        stats.nodes,
        stats.lp_iters,
        start,
    );
    Ok((sol, stats))
}

/// Minimum and maximum of the encoded output (raw units) with the overlap
/// factor fixed at `lambda`, over the root encoding and its big-M rows. Both
/// equal the forward pass when the encoding is exact.
pub fn output_extremes(net: &MlpNetwork, fixed: &[f64; 5], eps: f64, lambda: f64) -> Result<(f64, f64, BnbStats)> {
    let mut model = encode_relu_milp(net, fixed, 0.0, eps)?;
    let lv = model.lambda_var();
    let ln = net.norms().input[LAMBDA].normalize(lambda);
    model.lp.lower[lv] = ln;
    model.lp.upper[lv] = ln;
    model.lp.cost.iter_mut().for_each(|c| *c = 0.0);
    let out = net.norms().output;
    let mut stats = BnbStats::default();
    let Some(y) = model.output_var() else {
        let v = out.denormalize(0.0);
        return Ok((v, v, stats));
    };
    let mut ends = [0.0; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let mut lp = model.lp.clone();
        lp.cost[y] = sign;
        let best = plain_bnb(net, &model, lp, &mut stats)?;
        ends[k] = out.denormalize(sign * best);
    }
    Ok((ends[0], ends[1], stats))
}

/// Fixes the binaries whose sign is decided by interval propagation from the
/// node's input bounds and binary fixings. Returns false on a conflict.
fn presolve(net: &MlpNetwork, model: &MilpModel, lp: &mut LinearProgram) -> bool {
    let input: Vec<Interval> = model
        .inputs
        .iter()
        .map(|&v| Interval::new(lp.lower[v], lp.upper[v]))
        .collect();
    let mut forcing: Forcing = model.neurons.iter().map(|l| vec![None; l.len()]).collect();
    for b in &model.binaries {
        if lp.lower[b.var] == lp.upper[b.var] {
            forcing[b.layer][b.neuron] = Some(lp.lower[b.var] == 1.0);
        }
    }
    let Some(bounds) = propagate(net, &input, Some(&forcing)) else {
        return false;
    };
    for b in &model.binaries {
        let v = match bounds.phase(b.layer, b.neuron) {
            Phase::Active => 1.0,
            Phase::Inactive => 0.0,
            Phase::Unstable => continue,
        };
        if forcing[b.layer][b.neuron].is_none() {
            lp.lower[b.var] = v;
            lp.upper[b.var] = v;
        }
    }
    true
}

/// Depth-first branch-and-bound over the activation binaries of `model`
/// with objective and bounds taken from `lp`.
fn plain_bnb(net: &MlpNetwork, model: &MilpModel, lp: LinearProgram, stats: &mut BnbStats) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut stack = vec![lp];
    while let Some(mut node) = stack.pop() {
        stats.nodes += 1;
        if !presolve(net, model, &mut node) {
            continue;
        }
        let s = solve_counted(&node, stats)?;
        if s.status == LpStatus::Infeasible || s.objective >= best - 1e-12 {
            continue;
        }
        let frac = model
            .binaries
            .iter()
            .map(|b| (b.var, (s.x[b.var] - s.x[b.var].round()).abs()))
            .filter(|&(_, f)| f > 1e-9)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match frac {
            None => best = s.objective,
            Some((v, _)) => {
                for val in [0.0, 1.0] {
                    let mut child = node.clone();
                    child.lower[v] = val;
                    child.upper[v] = val;
                    stack.push(child);
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(NavError::Solver("encoding infeasible at a fixed input".into()))
    }
}
