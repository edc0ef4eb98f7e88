//! Primal revised simplex over bounded variables.
//!
//! Every row `i` gets a logical variable `s_i = −(A x)_i` bounded by
//! `[−row_hi, −row_lo]`, turning the problem into `[A I] (x, s) = 0` with
//! only bound constraints left. The all-logical basis is always available,
//! so no artificial columns are needed: phase 1 minimizes the sum of bound
//! violations of the basic variables (recomputed every iteration) and hands
//! over to the true objective once the basis is feasible. Equality rows are
//! logicals fixed at a single value.

use std::sync::atomic::Ordering;
use std::time::Instant;

use super::lu::Factor;
use super::{
    LpError, LpOptions, LpProblem, LpSolution, LpStatus, DEGENERATE_LIMIT, ITERATION_FACTOR,
    PIVOT_TOL,
};

/// Refactorize after this many eta updates.
const REFACTOR_EVERY: usize = 100;
/// Step lengths at or below this count as degenerate.
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column held at zero.
    Zero,
}

/// A simplex basis over structural columns followed by row logicals; usable
/// as a warm start for a problem of the same shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    head: Vec<usize>,
    status: Vec<VarStatus>,
}

impl Basis {
    /// Status of every structural column followed by every row logical.
    pub fn status(&self) -> &[VarStatus] {
        &self.status
    }
}

pub(crate) struct Simplex<'a> {
    p: &'a LpProblem,
    opts: &'a LpOptions<'a>,
    col_bounds: &'a [(f64, f64)],
    n: usize,
    m: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    status: Vec<VarStatus>,
    factor: Factor,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    /// True when basic values were just recomputed from a fresh factor.
    fresh: bool,
    dual_tol: f64,
}

fn feas_tol(bound: f64) -> f64 {
    1e-9 * bound.abs().max(1.0)
}

impl<'a> Simplex<'a> {
    pub fn new(p: &'a LpProblem, col_bounds: &'a [(f64, f64)], opts: &'a LpOptions<'a>) -> Self {
        let n = p.n_cols();
        let m = p.n_rows();
        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        for &(l, h) in col_bounds {
            lo.push(l);
            hi.push(h);
        }
        for &(l, h) in &p.row_bounds {
            lo.push(-h);
            hi.push(-l);
        }
        let mut cost = p.objective.clone();
        cost.resize(n + m, 0.0);
        let cost_scale = p.objective.iter().fold(1.0f64, |a, c| a.max(c.abs()));

        let warm = opts
            .warm_start
            .filter(|b| b.head.len() == m && b.status.len() == n + m);
        let (head, status) = match warm {
            Some(b) => (b.head.clone(), b.status.clone()),
            None => {
                let mut status = vec![VarStatus::AtLower; n + m];
                for s in &mut status[n..] {
                    *s = VarStatus::Basic;
                }
                ((n..n + m).collect(), status)
            }
        };
        let mut s = Simplex {
            p,
            opts,
            col_bounds,
            n,
            m,
            lo,
            hi,
            cost,
            x: vec![0.0; n + m],
            head,
            status,
            factor: Factor::new(0, &[]).expect("empty factor"),
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            fresh: false,
            dual_tol: 1e-9f64.max(1e-11 * cost_scale),
        };
        for j in 0..n + m {
            if s.status[j] != VarStatus::Basic {
                s.place_nonbasic(j, s.status[j]);
            }
        }
        s.refactor();
        s
    }

    /// Puts nonbasic `j` at the bound named by `want`, falling back to any
    /// finite bound (or zero for a free column).
    fn place_nonbasic(&mut self, j: usize, want: VarStatus) {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        let status = match want {
            VarStatus::AtUpper if hi.is_finite() => VarStatus::AtUpper,
            VarStatus::AtLower if lo.is_finite() => VarStatus::AtLower,
            _ if lo.is_finite() => VarStatus::AtLower,
            _ if hi.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Zero,
        };
        self.status[j] = status;
        self.x[j] = match status {
            VarStatus::AtLower => lo,
            VarStatus::AtUpper => hi,
            _ => 0.0,
        };
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.p.matrix.col(j).collect()
        } else {
            vec![(j - self.n, 1.0)]
        }
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.p.matrix.col_dot(j, y)
        } else {
            y[j - self.n]
        }
    }

    /// Fresh factorization of the current basis, replacing dependent
    /// columns by logicals, followed by recomputation of basic values.
    fn refactor(&mut self) {
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self.head.iter().map(|&j| self.column(j)).collect();
            match Factor::new(self.m, &cols) {
                Ok(f) => {
                    self.factor = f;
                    break;
                }
                Err(singular) => {
                    log::debug!("basis singular at {} positions; repairing", singular.positions.len());
                    for (&pos, &row) in singular.positions.iter().zip(&singular.rows) {
                        let out = self.head[pos];
                        let nearer = if (self.x[out] - self.lo[out]).abs() <= (self.hi[out] - self.x[out]).abs() {
                            VarStatus::AtLower
                        } else {
                            VarStatus::AtUpper
                        };
                        self.place_nonbasic(out, nearer);
                        self.head[pos] = self.n + row;
                        self.status[self.n + row] = VarStatus::Basic;
                    }
                }
            }
        }
        self.compute_basics();
        self.fresh = true;
    }

    fn compute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                let v = self.x[j];
                if j < self.n {
                    for (r, a) in self.p.matrix.col(j) {
                        rhs[r] -= a * v;
                    }
                } else {
                    rhs[j - self.n] -= v;
                }
            }
        }
        let xb = self.factor.ftran(&mut rhs);
        for (p, &j) in self.head.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    fn check_interrupt(&self) -> Result<(), LpError> {
        if let Some(stop) = self.opts.stop {
            if stop.load(Ordering::Relaxed) {
                return Err(LpError::Interrupted);
            }
        }
        if let Some(deadline) = self.opts.deadline {
            if self.iterations % 16 == 0 && Instant::now() >= deadline {
                return Err(LpError::Interrupted);
            }
        }
        Ok(())
    }

    /// Phase-1 cost of basic position `p`: −1 below, +1 above, 0 within bounds.
    fn infeasibility_cost(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lo[j] - feas_tol(self.lo[j]) {
            -1.0
        } else if v > self.hi[j] + feas_tol(self.hi[j]) {
            1.0
        } else {
            0.0
        }
    }

    pub fn run(mut self) -> Result<LpSolution, LpError> {
        let cap = ITERATION_FACTOR * (self.m + self.n).max(1);
        let mut rejected: Vec<usize> = Vec::new();
        loop {
            self.check_interrupt()?;
            if self.iterations >= cap {
                return Err(LpError::Numerical(format!(
                    "iteration cap {cap} reached without convergence"
                )));
            }
            if self.factor.eta_count() >= REFACTOR_EVERY {
                self.refactor();
            }

            let phase_one_costs: Vec<f64> =
                self.head.iter().map(|&j| self.infeasibility_cost(j)).collect();
            let phase_one = phase_one_costs.iter().any(|&c| c != 0.0);
            let mut cb = if phase_one {
                phase_one_costs
            } else {
                self.head.iter().map(|&j| self.cost[j]).collect()
            };
            let y = self.factor.btran(&mut cb);

            let tol = if phase_one { 1e-9 } else { self.dual_tol };
            let entering = self.price(&y, phase_one, tol, &rejected);
            let Some((q, d_q)) = entering else {
                if !self.fresh {
                    self.refactor();
                    rejected.clear();
                    continue;
                }
                return Ok(if phase_one {
                    self.infeasible(y)
                } else {
                    self.optimal(y)
                });
            };

            let dir = if d_q < 0.0 { 1.0 } else { -1.0 };
            let mut rhs = vec![0.0; self.m];
            for (r, a) in self.column(q) {
                rhs[r] = a;
            }
            let alpha = self.factor.ftran(&mut rhs);

            match self.ratio_test(q, dir, &alpha) {
                Step::Unbounded if phase_one => {
                    // Every improving breakpoint hid behind a tiny pivot.
                    rejected.push(q);
                    continue;
                }
                Step::Unbounded => {
                    if !self.fresh {
                        self.refactor();
                        rejected.clear();
                        continue;
                    }
                    return Ok(self.unbounded());
                }
                Step::Flip(t) => {
                    self.advance(q, dir * t, &alpha);
                    let j = q;
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                    self.status[j] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.after_step(t);
                }
                Step::Pivot { pos, t, to_upper } => {
                    self.advance(q, dir * t, &alpha);
                    let out = self.head[pos];
                    self.x[out] = if to_upper { self.hi[out] } else { self.lo[out] };
                    self.status[out] = if to_upper { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.head[pos] = q;
                    self.status[q] = VarStatus::Basic;
                    self.factor.update(pos, &alpha);
                    self.after_step(t);
                }
            }
            rejected.clear();
        }
    }

    fn after_step(&mut self, t: f64) {
        self.iterations += 1;
        self.fresh = false;
        if t <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run >= DEGENERATE_LIMIT && !self.bland {
                log::debug!("switching to Bland's rule after {} degenerate pivots", self.degenerate_run);
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    /// Moves the entering column by `delta` and the basics along `−alpha`.
    fn advance(&mut self, q: usize, delta: f64, alpha: &[f64]) {
        if delta == 0.0 {
            return;
        }
        self.x[q] += delta;
        for (p, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.head[p];
                self.x[j] -= delta * a;
            }
        }
    }

    /// Dantzig pricing, or the lowest eligible index in Bland mode.
    fn price(&self, y: &[f64], phase_one: bool, tol: f64, rejected: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lo[j] == self.hi[j] || rejected.contains(&j) {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost[j] };
            let d = c - self.col_dot(j, y);
            let up = matches!(st, VarStatus::AtLower | VarStatus::Zero) && d < -tol;
            let down = matches!(st, VarStatus::AtUpper | VarStatus::Zero) && d > tol;
            if !(up || down) {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Step {
        let mut best_t = f64::INFINITY;
        let mut best: Option<(usize, bool, f64)> = None;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.head[p];
            let rate = -dir * a;
            let (lo, hi, v) = (self.lo[j], self.hi[j], self.x[j]);
            let (t, to_upper) = if rate < 0.0 {
                if v > hi + feas_tol(hi) {
                    ((v - hi) / -rate, true)
                } else if lo.is_finite() && v >= lo - feas_tol(lo) {
                    (((v - lo).max(0.0)) / -rate, false)
                } else {
                    continue;
                }
            } else if v < lo - feas_tol(lo) {
                ((lo - v) / rate, false)
            } else if hi.is_finite() && v <= hi + feas_tol(hi) {
                (((hi - v).max(0.0)) / rate, true)
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((bp, _, ba)) => {
                    if t < best_t - 1e-12 {
                        true
                    } else if t <= best_t + 1e-12 {
                        if self.bland {
                            j < self.head[bp]
                        } else {
                            a.abs() > ba
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best_t = best_t.min(t);
                best = Some((p, to_upper, a.abs()));
            }
        }
        let range = self.hi[q] - self.lo[q];
        if range.is_finite() && range <= best_t {
            return Step::Flip(range);
        }
        match best {
            Some((pos, to_upper, _)) => Step::Pivot {
                pos,
                t: best_t,
                to_upper,
            },
            None => Step::Unbounded,
        }
    }

    fn structural_x(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    fn basis(&self) -> Basis {
        Basis {
            head: self.head.clone(),
            status: self.status.clone(),
        }
    }

    fn optimal(self, y: Vec<f64>) -> LpSolution {
        let x = self.structural_x();
        let mut reduced = self.p.reduced_costs(&y);
        for (j, d) in reduced.iter_mut().enumerate() {
            if self.status[j] == VarStatus::Basic {
                *d = 0.0;
            }
        }
        let objective = self.p.objective_value(&x);
        let dual_objective = self.p.dual_objective_with(&y, self.col_bounds);
        LpSolution {
            status: LpStatus::Optimal,
            objective,
            dual_objective,
            reduced_costs: reduced,
            farkas: None,
            iterations: self.iterations,
            basis: Some(self.basis()),
            duals: y,
            x,
        }
    }

    fn infeasible(self, y: Vec<f64>) -> LpSolution {
        LpSolution {
            status: LpStatus::Infeasible,
            x: self.structural_x(),
            objective: f64::INFINITY,
            duals: vec![0.0; self.m],
            reduced_costs: vec![0.0; self.n],
            dual_objective: f64::INFINITY,
            farkas: Some(y),
            iterations: self.iterations,
            basis: Some(self.basis()),
        }
    }

    fn unbounded(self) -> LpSolution {
        LpSolution {
            status: LpStatus::Unbounded,
            x: self.structural_x(),
            objective: f64::NEG_INFINITY,
            duals: vec![0.0; self.m],
            reduced_costs: vec![0.0; self.n],
            dual_objective: f64::NEG_INFINITY,
            farkas: None,
            iterations: self.iterations,
            basis: Some(self.basis()),
        }
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { pos: usize, t: f64, to_upper: bool },
}
