//! Bounded-variable primal simplex on a dense tableau.
//!
//! Structural variables carry finite bounds; each row gets a slack (or is an
//! equality) and, when the slack cannot start feasible, an artificial
//! variable removed by a phase-1 pass.

use serde::{Deserialize, Serialize};

use crate::error::{param, NavError, Result};

/// Feasibility and optimality tolerance.
pub const LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// `min c'x` subject to the rows and `lower <= x <= upper`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram::default()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) {
        self.rows.push(Row { coeffs, kind, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(param("lp", "bound vectors do not match the variable count"));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !(l.is_finite() && u.is_finite()) || l > u || !self.cost[j].is_finite() {
                return Err(param(
                    "lp",
                    format!("variable {j} needs finite bounds lo <= hi, got [{l}, {u}]"),
                ));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err(param("lp", format!("row {i} is malformed")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for r in &self.rows {
            let ax: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match r.kind {
                RowKind::Le => ax - r.rhs,
                RowKind::Ge => r.rhs - ax,
                RowKind::Eq => (ax - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y` with reduced costs `c - A'y`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    Dantzig,
    Bland,
}

struct Tableau {
    m: usize,
    n: usize,
    /// Row-major `m x n` matrix `B^-1 A`.
    t: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Reduced costs for the current cost vector.
    reduced: Vec<f64>,
    iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.n + j]
    }

    fn price(&mut self) {
        self.reduced.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.n..(i + 1) * self.n];
                for (r, a) in self.reduced.iter_mut().zip(row) {
                    *r -= cb * a;
                }
            }
        }
    }

    fn choose_entering(&self, rule: Rule) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n {
            if self.is_basic[j] || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let at_upper = self.x[j] >= self.upper[j];
            let at_lower = self.x[j] <= self.lower[j];
            let dir = if d < -LP_TOL && !at_upper {
                1.0
            } else if d > LP_TOL && !at_lower {
                -1.0
            } else {
                continue;
            };
            match rule {
                Rule::Bland => return Some((j, dir)),
                Rule::Dantzig => {
                    if d.abs() > best_score {
                        best_score = d.abs();
                        best = Some((j, dir));
                    }
                }
            }
        }
        best
    }

    fn step(&mut self, rule: Rule) -> Step {
        let Some((q, dir)) = self.choose_entering(rule) else {
            return Step::Optimal;
        };
        // x_B moves by -dir * theta * T[:, q]
        let mut theta = self.upper[q] - self.lower[q];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_pivot = 0.0;
        for i in 0..self.m {
            let alpha = dir * self.at(i, q);
            let b = self.basis[i];
            let limit = if alpha > PIVOT_TOL {
                (self.x[b] - self.lower[b]).max(0.0) / alpha
            } else if alpha < -PIVOT_TOL {
                let room = self.upper[b] - self.x[b];
                if room.is_infinite() {
                    continue;
                }
                room.max(0.0) / -alpha
            } else {
                continue;
            };
            let better = match leave {
                None => limit < theta,
                Some((li, _)) => {
                    limit < theta - 1e-12
                        || (limit <= theta + 1e-12
                            && match rule {
                                Rule::Bland => b < self.basis[li],
                                Rule::Dantzig => alpha.abs() > leave_pivot,
                            })
                }
            };
            if better {
                theta = limit;
                leave = Some((i, alpha > 0.0));
                leave_pivot = alpha.abs();
            }
        }
        if theta.is_infinite() {
            return Step::Unbounded;
        }
        // move along the edge
        self.x[q] += dir * theta;
        for i in 0..self.m {
            let b = self.basis[i];
            self.x[b] -= dir * theta * self.at(i, q);
        }
        self.iterations += 1;
        let Some((r, to_lower)) = leave else {
            // bound flip of the entering variable
            self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            return Step::Moved;
        };
        let out = self.basis[r];
        self.x[out] = if to_lower { self.lower[out] } else { self.upper[out] };
        self.pivot(r, q);
        Step::Moved
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let p = self.at(r, q);
        for v in &mut self.t[r * n..(r + 1) * n] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * n..(r + 1) * n].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + q];
            if f != 0.0 {
                for (v, pr) in self.t[i * n..(i + 1) * n].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.t[i * n + q] = 0.0;
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (v, pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.reduced[q] = 0.0;
        }
        let out = self.basis[r];
        self.is_basic[out] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    /// Pivots to optimality for the current costs. Falls back to Bland's
    /// rule after a run of degenerate steps.
    fn optimize(&mut self, cap: usize) -> Result<bool> {
        self.price();
        let mut rule = Rule::Dantzig;
        let mut stall = 0;
        let start = self.iterations;
        loop {
            if self.iterations - start > cap {
                return Err(NavError::LpStalled {
                    iterations: self.iterations,
                });
            }
            let before = self.current_objective();
            match self.step(rule) {
                Step::Optimal => return Ok(true),
                Step::Unbounded => return Ok(false),
                Step::Moved => {
                    if self.current_objective() >= before - 1e-14 * (1.0 + before.abs()) {
                        stall += 1;
                        if stall > 50 {
                            rule = Rule::Bland;
                        }
                    } else {
                        stall = 0;
                    }
                }
            }
        }
    }

    fn current_objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }
}

/// Solves `lp`. Returns `Infeasible` or `Unbounded` in the status rather than
/// as an error; errors are reserved for malformed input and stalls.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    match solve_with_cap(lp, 50 * (lp.num_vars() + lp.num_rows()) + 1000) {
        Err(NavError::LpStalled { .. }) => solve_with_cap(lp, 500 * (lp.num_vars() + lp.num_rows()) + 10_000),
        other => other,
    }
}

fn solve_with_cap(lp: &LinearProgram, cap: usize) -> Result<LpSolution> {
    let m = lp.num_rows();
    let ns = lp.num_vars();

    // Column layout: structural, one slack per inequality, then artificials.
    let mut slack_of = vec![None; m];
    let mut n = ns;
    for (i, r) in lp.rows.iter().enumerate() {
        if r.kind != RowKind::Eq {
            slack_of[i] = Some(n);
            n += 1;
        }
    }
    let mut x: Vec<f64> = lp.lower.clone();
    x.resize(n, 0.0);
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    lower.resize(n, 0.0);
    upper.resize(n, f64::INFINITY);

    // Residual of each row with structural variables at their lower bounds.
    let residual: Vec<f64> = lp
        .rows
        .iter()
        .map(|r| r.rhs - r.coeffs.iter().map(|&(j, a)| a * x[j]).sum::<f64>())
        .collect();

    // Per row: the initial basic column and its sign.
    let mut init_col = vec![(0usize, 1.0f64); m];
    let mut artificials = Vec::new();
    for i in 0..m {
        let sign = match lp.rows[i].kind {
            RowKind::Le => 1.0,
            RowKind::Ge => -1.0,
            RowKind::Eq => 0.0,
        };
        match slack_of[i] {
            Some(s) if sign * residual[i] >= 0.0 => {
                init_col[i] = (s, sign);
                x[s] = sign * residual[i];
            }
            _ => {
                let a = n + artificials.len();
                let sgn = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                artificials.push((i, sgn));
                init_col[i] = (a, sgn);
            }
        }
    }
    let n_total = n + artificials.len();
    lower.resize(n_total, 0.0);
    upper.resize(n_total, f64::INFINITY);
    x.resize(n_total, 0.0);
    for &(i, sgn) in &artificials {
        x[init_col[i].0] = sgn * residual[i];
    }

    // Tableau B^-1 A with B the signed unit columns chosen above.
    let mut t = vec![0.0; m * n_total];
    for (i, r) in lp.rows.iter().enumerate() {
        let s = init_col[i].1;
        for &(j, a) in &r.coeffs {
            t[i * n_total + j] += a / s;
        }
        if let Some(sl) = slack_of[i] {
            let coef = if r.kind == RowKind::Le { 1.0 } else { -1.0 };
            t[i * n_total + sl] = coef / s;
        }
    }
    for &(i, sgn) in &artificials {
        t[i * n_total + init_col[i].0] = sgn / init_col[i].1;
    }
    let basis: Vec<usize> = init_col.iter().map(|c| c.0).collect();
    let mut is_basic = vec![false; n_total];
    for &b in &basis {
        is_basic[b] = true;
    }

    let mut tab = Tableau {
        m,
        n: n_total,
        t,
        cost: vec![0.0; n_total],
        lower,
        upper,
        x,
        basis,
        is_basic,
        reduced: vec![0.0; n_total],
        iterations: 0,
    };

    if !artificials.is_empty() {
        for k in n..n_total {
            tab.cost[k] = 1.0;
        }
        tab.optimize(cap)?;
        let infeasibility: f64 = (n..n_total).map(|k| tab.x[k]).sum();
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-7 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: tab.x[..ns].to_vec(),
                objective: f64::NAN,
                duals: vec![0.0; m],
                iterations: tab.iterations,
            });
        }
        for k in n..n_total {
            tab.cost[k] = 0.0;
            tab.upper[k] = 0.0;
        }
    }
    tab.cost[..ns].copy_from_slice(&lp.cost);
    let bounded = tab.optimize(cap)?;
    // Refresh the basic values from the nonbasic ones to shed pivot drift.
    refresh_basics(lp, &mut tab, &init_col);
    let x_struct = tab.x[..ns].to_vec();
    // y_i from the reduced cost of the row's initial unit column (cost 0).
    let duals = (0..m).map(|i| -tab.reduced[init_col[i].0] * init_col[i].1).collect();
    Ok(LpSolution {
        status: if bounded {
            LpStatus::Optimal
        } else {
            LpStatus::Unbounded
        },
        objective: lp.objective(&x_struct),
        x: x_struct,
        duals,
        iterations: tab.iterations,
    })
}

/// Recomputes the basic values as `B^-1 b - sum_N T_j x_j` to shed the
/// drift accumulated by incremental updates. Column `init_col[i]` of the
/// tableau is `B^-1` applied to the signed unit vector of row `i`.
fn refresh_basics(lp: &LinearProgram, tab: &mut Tableau, init_col: &[(usize, f64)]) {
    for r in 0..tab.m {
        let mut v: f64 = (0..tab.m)
            .map(|i| tab.at(r, init_col[i].0) / init_col[i].1 * lp.rows[i].rhs)
            .sum();
        for j in 0..tab.n {
            if !tab.is_basic[j] && tab.x[j] != 0.0 {
                v -= tab.at(r, j) * tab.x[j];
            }
        }
        let b = tab.basis[r];
        tab.x[b] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-10.0, 10.0, 1.0);
        lp.add_row(vec![(x, 1.0)], RowKind::Ge, 3.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.objective - 3.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn facet_optimum() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 1.0, -1.0);
        let y = lp.add_var(0.0, 1.0, -1.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], RowKind::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_is_flagged() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 1.0, 1.0);
        lp.add_row(vec![(x, 1.0)], RowKind::Ge, 2.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
        let mut eq = LinearProgram::new();
        let a = eq.add_var(0.0, 1.0, 0.0);
        let b = eq.add_var(0.0, 1.0, 0.0);
        eq.add_row(vec![(a, 1.0), (b, 1.0)], RowKind::Eq, 3.0);
        assert_eq!(solve_lp(&eq).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn rejects_infinite_structural_bounds() {
        let mut lp = LinearProgram::new();
        lp.add_var(0.0, f64::INFINITY, 1.0);
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn equality_rows() {
        // min x + 2y st x + y = 1.5, x - y <= 0.5, box [0, 1]
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 1.0, 1.0);
        let y = lp.add_var(0.0, 1.0, 2.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], RowKind::Eq, 1.5);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], RowKind::Le, 0.5);
        let s = solve_lp(&lp).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random LP with a known interior-ish feasible point.
    fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
        let mut lp = LinearProgram::new();
        let mut x0 = Vec::new();
        for _ in 0..n {
            let lo = rng.random_range(-5.0..0.0);
            let hi = lo + rng.random_range(0.5..6.0);
            lp.add_var(lo, hi, rng.random_range(-3.0..3.0));
            x0.push(rng.random_range(lo..hi));
        }
        for k in 0..m {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for j in 0..n {
                if rng.random_bool(0.7) {
                    coeffs.push((j, rng.random_range(-2.0..2.0)));
                }
            }
            let ax: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
            let kind = match k % 5 {
                0 => RowKind::Eq,
                1 | 2 => RowKind::Le,
                _ => RowKind::Ge,
            };
            let rhs = match kind {
                RowKind::Eq => ax,
                RowKind::Le => ax + rng.random_range(0.0..1.0),
                RowKind::Ge => ax - rng.random_range(0.0..1.0),
            };
            lp.add_row(coeffs, kind, rhs);
        }
        lp
    }

    /// Minimum over all vertices: every choice of `n` tight constraints
    /// among the rows and the bounds.
    fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for r in &lp.rows {
            let mut a = vec![0.0; n];
            for &(j, v) in &r.coeffs {
                a[j] += v;
            }
            planes.push((a, r.rhs));
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e.clone(), lp.lower[j]));
            planes.push((e, lp.upper[j]));
        }
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn rec(
            k: usize,
            start: usize,
            pick: &mut Vec<usize>,
            planes: &[(Vec<f64>, f64)],
            lp: &LinearProgram,
            best: &mut Option<f64>,
        ) {
            let n = pick.len();
            if k == n {
                let a = DMatrix::from_fn(n, n, |i, j| planes[pick[i]].0[j]);
                let b = DVector::from_fn(n, |i, _| planes[pick[i]].1);
                if a.determinant().abs() < 1e-9 {
                    return;
                }
                let Some(x) = a.lu().solve(&b) else { return };
                let x: Vec<f64> = x.iter().copied().collect();
                if lp.max_violation(&x) <= 1e-9 {
                    let f = lp.objective(&x);
                    if best.is_none_or(|b| f < b) {
                        *best = Some(f);
                    }
                }
                return;
            }
            for p in start..planes.len() {
                pick[k] = p;
                rec(k + 1, p + 1, pick, planes, lp, best);
            }
        }
        rec(0, 0, &mut pick, &planes, lp, &mut best);
        best
    }

    #[test]
    fn matches_vertex_enumeration_on_small_lps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..50 {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=6);
            let lp = random_lp(&mut rng, n, m);
            let s = solve_lp(&lp).unwrap();
            let oracle = vertex_oracle(&lp).expect("constructed feasible");
            assert_eq!(s.status, LpStatus::Optimal, "case {case}");
            assert!(lp.max_violation(&s.x) <= 1e-9, "case {case}");
            assert!(
                (s.objective - oracle).abs() <= 1e-6,
                "case {case}: {} vs {oracle}",
                s.objective
            );
        }
    }

    /// Checks primal feasibility, dual sign conditions, complementary
    /// slackness and a zero duality gap from the original data alone.
    fn certify(lp: &LinearProgram, s: &LpSolution) {
        let tol = 1e-7;
        assert!(lp.max_violation(&s.x) <= 1e-9);
        let n = lp.num_vars();
        let mut d = lp.cost.clone();
        for (r, y) in lp.rows.iter().zip(&s.duals) {
            for &(j, a) in &r.coeffs {
                d[j] -= a * y;
            }
            let ax: f64 = r.coeffs.iter().map(|&(j, a)| a * s.x[j]).sum();
            match r.kind {
                RowKind::Le => assert!(*y <= tol && (*y == 0.0 || (ax - r.rhs).abs() <= 1e-6 || y.abs() <= tol)),
                RowKind::Ge => assert!(*y >= -tol && (*y == 0.0 || (ax - r.rhs).abs() <= 1e-6 || y.abs() <= tol)),
                RowKind::Eq => {}
            }
        }
        let mut dual_obj: f64 = lp.rows.iter().zip(&s.duals).map(|(r, y)| r.rhs * y).sum();
        for j in 0..n {
            let at_lo = (s.x[j] - lp.lower[j]).abs() <= 1e-9;
            let at_hi = (s.x[j] - lp.upper[j]).abs() <= 1e-9;
            if d[j] > tol {
                assert!(at_lo, "var {j} reduced cost {} but not at lower", d[j]);
            } else if d[j] < -tol {
                assert!(at_hi, "var {j} reduced cost {} but not at upper", d[j]);
            }
            dual_obj += if d[j] >= 0.0 {
                d[j] * lp.lower[j]
            } else {
                d[j] * lp.upper[j]
            };
        }
        assert!(
            (dual_obj - s.objective).abs() <= 1e-6 * (1.0 + s.objective.abs()),
            "gap {dual_obj} vs {}",
            s.objective
        );
    }

    #[test]
    fn large_lps_carry_optimality_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(10..=40);
            let m = rng.random_range(5..=60);
            let lp = random_lp(&mut rng, n, m);
            let s = solve_lp(&lp).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            certify(&lp, &s);
        }
    }

    #[test]
    fn small_lps_also_certify() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let (n, m) = (rng.random_range(1..=5), rng.random_range(1..=8));
            let lp = random_lp(&mut rng, n, m);
            certify(&lp, &solve_lp(&lp).unwrap());
        }
    }
}
