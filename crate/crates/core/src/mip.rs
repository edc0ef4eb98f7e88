//! Best-bound branch-and-bound with relative-gap termination.
//!
//! Each node solves the LP relaxation under its branching bounds, warm
//! started from the parent's basis. The most fractional integer column is
//! branched on (ties go to the lowest column), and the open node with the
//! smallest bound is expanded next (ties in creation order). At every node
//! the LP point is rounded, the integer columns are fixed, and the remaining
//! LP is solved; feasible results become incumbent candidates.
//!
//! The run stops once `(UB − LB) / max(|UB|, 1e-9) ≤ rel_gap`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::CompactModel;
use crate::lp::{self, Basis, LpError, LpOptions, LpProblem, LpSolution, LpStatus};

/// Relative gap used when the caller does not say otherwise (0.5%).
pub const DEFAULT_REL_GAP: f64 = 0.005;
/// Distance from an integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Residual an incumbent must meet on every block when replayed.
pub const INCUMBENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative optimality gap, `0 ≤ rel_gap < 1`.
    pub rel_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub worker_count: usize,
    /// Carried into records; the search itself is deterministic.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_gap: DEFAULT_REL_GAP,
            time_limit: None,
            worker_count: 1,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), MipError> {
        if !(self.rel_gap >= 0.0 && self.rel_gap < 1.0) {
            return Err(MipError::Options(format!("rel_gap must lie in [0, 1), got {}", self.rel_gap)));
        }
        if self.worker_count < 1 {
            return Err(MipError::Options("worker_count must be at least 1".into()));
        }
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t >= 0.0) {
                return Err(MipError::Options(format!("time_limit must be a nonnegative number, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MipError {
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error("model has no integer columns")]
    NoIntegerColumns,
    #[error("root relaxation failed: {0}")]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    OptimalWithinGap,
    TimeLimit,
    Infeasible,
    /// Stopped by the caller's stop flag.
    Cancelled,
}

impl fmt::Display for MipStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MipStatus::OptimalWithinGap => "optimal_within_gap",
            MipStatus::TimeLimit => "time_limit",
            MipStatus::Infeasible => "infeasible",
            MipStatus::Cancelled => "cancelled",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub status: MipStatus,
    /// Incumbent binaries; empty when there is no incumbent.
    pub z: Vec<f64>,
    /// Incumbent continuous values; empty when there is no incumbent.
    pub y: Vec<f64>,
    /// Upper bound (incumbent objective), `+∞` without incumbent.
    pub objective: f64,
    /// Lower bound.
    pub best_bound: f64,
    pub rel_gap_achieved: f64,
    pub nodes_explored: usize,
    pub solve_seconds: f64,
}

impl MipResult {
    pub fn has_incumbent(&self) -> bool {
        !self.z.is_empty() || (!self.y.is_empty() && self.objective.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchDir {
    Down,
    Up,
}

/// How a node came to be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub depth: usize,
    pub branch_var: Option<usize>,
    pub branch_dir: Option<BranchDir>,
    /// LP bound of this node, never below its parent's.
    pub local_bound: f64,
    pub parent_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOutcome {
    Branched,
    Integral,
    Infeasible,
    Pruned,
    Failed,
}

/// One line of the event log, emitted after each evaluated node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEvent {
    pub node: usize,
    pub record: NodeRecord,
    pub outcome: NodeOutcome,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
}

impl NodeEvent {
    /// `node depth bound ub lb gap outcome`, whitespace separated, values
    /// printed in shortest round-trip form.
    pub fn to_line(&self) -> String {
        format!(
            "{} {} {:?} {:?} {:?} {:?} {:?}",
            self.node,
            self.record.depth,
            self.record.local_bound,
            self.upper,
            self.lower,
            self.gap,
            self.outcome
        )
    }
}

pub trait EventSink: Sync {
    fn node(&self, event: &NodeEvent);
}

impl<F: Fn(&NodeEvent) + Sync> EventSink for F {
    fn node(&self, event: &NodeEvent) {
        self(event)
    }
}

/// Caller-side controls that are not part of the options document.
#[derive(Default, Clone, Copy)]
pub struct SolveControl<'a> {
    pub stop: Option<&'a AtomicBool>,
    pub events: Option<&'a dyn EventSink>,
    /// Refuse models without integer columns instead of solving the LP.
    pub require_integrality: bool,
}

/// `(ub − lb) / max(|ub|, 1e-9)`.
pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if upper == f64::INFINITY || lower == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    ((upper - lower) / upper.abs().max(1e-9)).max(0.0)
}

pub fn solve_mip(model: &CompactModel, options: &SolverOptions) -> Result<MipResult, MipError> {
    solve_mip_with(model, options, SolveControl::default())
}

pub fn solve_mip_with(
    model: &CompactModel,
    options: &SolverOptions,
    ctl: SolveControl,
) -> Result<MipResult, MipError> {
    let problem = model.lp_relaxation();
    let nz = model.z_len();
    let accept = |x: &[f64]| match model.evaluate(&x[..nz], &x[nz..]) {
        Ok(e) => {
            let r = e.residuals;
            if r.max_block() <= INCUMBENT_TOL && r.bounds <= INCUMBENT_TOL && r.integrality <= INTEGRALITY_TOL {
                Some(e.objective)
            } else {
                log::warn!("rejecting incumbent candidate with residuals {r:?}");
                None
            }
        }
        Err(_) => None,
    };
    let mut result = branch_and_bound(&problem, options, ctl, &accept)?;
    if result.has_incumbent() {
        let y = result.z.split_off(nz);
        result.y = y;
    }
    Ok(result)
}

/// Solves an LP problem whose `integrality` mask marks binary columns. The
/// incumbent is returned entirely in `z`.
pub fn solve_problem(
    problem: &LpProblem,
    options: &SolverOptions,
    ctl: SolveControl,
) -> Result<MipResult, MipError> {
    let accept = |x: &[f64]| {
        let int_ok = x
            .iter()
            .zip(&problem.integrality)
            .all(|(v, &int)| !int || (v - v.round()).abs() <= INTEGRALITY_TOL);
        (int_ok && problem.primal_residual(x) <= INCUMBENT_TOL).then(|| problem.objective_value(x))
    };
    branch_and_bound(problem, options, ctl, &accept)
}

/// LP relaxation of the model; its objective bounds the MIP optimum from below.
pub fn root_relaxation(model: &CompactModel) -> Result<LpSolution, LpError> {
    lp::solve_lp(&model.lp_relaxation())
}

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
    basis: Option<Arc<Basis>>,
    branch: Option<(usize, BranchDir)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}
impl Node {
    /// Max-heap key: smallest bound first, then lowest id.
    fn key(&self) -> (Reverse<OrderedFloat<f64>>, Reverse<usize>) {
        (Reverse(OrderedFloat(self.bound)), Reverse(self.id))
    }
}

struct Shared {
    open: BinaryHeap<Node>,
    in_flight: Vec<(usize, f64)>,
    next_id: usize,
    upper: f64,
    incumbent: Vec<f64>,
    /// Smallest bound among nodes closed by the gap test or left unresolved.
    floor: f64,
    lower: f64,
    nodes: usize,
    tried: HashSet<u64>,
    finished: Option<MipStatus>,
}

impl Shared {
    fn current_lower(&self) -> f64 {
        let mut lb = self.floor.min(self.upper);
        if let Some(top) = self.open.peek() {
            lb = lb.min(top.bound);
        }
        for &(_, b) in &self.in_flight {
            lb = lb.min(b);
        }
        lb
    }

    fn refresh_lower(&mut self) {
        let lb = self.current_lower();
        if lb > self.lower {
            self.lower = lb;
        }
        if self.lower > self.upper {
            self.lower = self.upper;
        }
    }

    fn closes(&self, bound: f64, rel_gap: f64) -> bool {
        self.upper.is_finite() && relative_gap(self.upper, bound) <= rel_gap
    }
}

struct Search<'a> {
    problem: &'a LpProblem,
    options: &'a SolverOptions,
    ctl: SolveControl<'a>,
    accept: &'a (dyn Fn(&[f64]) -> Option<f64> + Sync),
    int_cols: Vec<usize>,
    deadline: Option<Instant>,
    shared: Mutex<Shared>,
    wake: Condvar,
}

fn branch_and_bound(
    problem: &LpProblem,
    options: &SolverOptions,
    ctl: SolveControl,
    accept: &(dyn Fn(&[f64]) -> Option<f64> + Sync),
) -> Result<MipResult, MipError> {
    options.validate()?;
    let start = Instant::now();
    let int_cols: Vec<usize> = (0..problem.n_cols()).filter(|&j| problem.integrality[j]).collect();
    if int_cols.is_empty() && ctl.require_integrality {
        return Err(MipError::NoIntegerColumns);
    }
    let deadline = options
        .time_limit
        .map(|s| start + Duration::from_secs_f64(s.min(1e9)));

    let box_bound = box_lower_bound(problem);
    let search = Search {
        problem,
        options,
        ctl,
        accept,
        int_cols,
        deadline,
        shared: Mutex::new(Shared {
            open: BinaryHeap::from([Node {
                id: 0,
                depth: 0,
                bound: box_bound,
                fixings: Vec::new(),
                basis: None,
                branch: None,
            }]),
            in_flight: Vec::new(),
            next_id: 1,
            upper: f64::INFINITY,
            incumbent: Vec::new(),
            floor: f64::INFINITY,
            lower: box_bound,
            nodes: 0,
            tried: HashSet::new(),
            finished: None,
        }),
        wake: Condvar::new(),
    };

    let root_error = if options.worker_count == 1 {
        search.work()
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..options.worker_count).map(|_| s.spawn(|| search.work())).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .fold(None, |acc, e| acc.or(e))
        })
    };
    if let Some(e) = root_error {
        return Err(MipError::Lp(e));
    }

    let sh = search.shared.into_inner().expect("lock");
    let mut status = sh.finished.unwrap_or(MipStatus::OptimalWithinGap);
    let has_incumbent = sh.upper.is_finite();
    let (lower, gap) = if status == MipStatus::Infeasible {
        (f64::INFINITY, 0.0)
    } else {
        (sh.lower, relative_gap(sh.upper, sh.lower))
    };
    if status == MipStatus::OptimalWithinGap && !has_incumbent {
        status = MipStatus::Infeasible;
    }
    if status == MipStatus::OptimalWithinGap && gap > options.rel_gap {
        log::warn!("search exhausted with gap {gap} above target {}", options.rel_gap);
    }
    Ok(MipResult {
        status,
        z: sh.incumbent,
        y: Vec::new(),
        objective: sh.upper,
        best_bound: if status == MipStatus::Infeasible { f64::INFINITY } else { lower },
        rel_gap_achieved: if status == MipStatus::Infeasible { 0.0 } else { gap },
        nodes_explored: sh.nodes,
        solve_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `Σ min(c_j·lo_j, c_j·hi_j)`, the bound from column boxes alone.
fn box_lower_bound(p: &LpProblem) -> f64 {
    p.objective
        .iter()
        .zip(&p.col_bounds)
        .map(|(&c, &(lo, hi))| {
            if c > 0.0 {
                c * lo
            } else if c < 0.0 {
                c * hi
            } else {
                0.0
            }
        })
        .sum()
}

fn pattern_hash(values: &[(usize, f64)]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for &(j, v) in values {
        j.hash(&mut h);
        (v as i64).hash(&mut h);
    }
    h.finish()
}

impl Search<'_> {
    fn interrupted(&self) -> Option<MipStatus> {
        if self.ctl.stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
            return Some(MipStatus::Cancelled);
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Some(MipStatus::TimeLimit);
        }
        None
    }

    fn bounds_for(&self, fixings: &[(usize, f64)]) -> Vec<(f64, f64)> {
        let mut b = self.problem.col_bounds.clone();
        for &(j, v) in fixings {
            let (lo, hi) = b[j];
            b[j] = (lo.max(v), hi.min(v));
        }
        b
    }

    /// Worker loop. Returns an error only when the root LP fails.
    fn work(&self) -> Option<LpError> {
        let rel_gap = self.options.rel_gap;
        let mut guard = self.shared.lock().expect("lock");
        loop {
            if guard.finished.is_some() {
                self.wake.notify_all();
                return None;
            }
            if let Some(status) = self.interrupted() {
                guard.finished = Some(status);
                continue;
            }
            guard.refresh_lower();
            let lower = guard.current_lower();
            if guard.closes(lower, rel_gap) && guard.in_flight.is_empty() {
                guard.finished = Some(MipStatus::OptimalWithinGap);
                continue;
            }
            let Some(node) = guard.open.pop() else {
                if guard.in_flight.is_empty() {
                    guard.finished = Some(MipStatus::OptimalWithinGap);
                    continue;
                }
                guard = self
                    .wake
                    .wait_timeout(guard, Duration::from_millis(20))
                    .expect("lock")
                    .0;
                continue;
            };
            if guard.closes(node.bound, rel_gap) {
                guard.floor = guard.floor.min(node.bound);
                continue;
            }
            guard.in_flight.push((node.id, node.bound));
            drop(guard);

            let outcome = self.evaluate(node);

            guard = self.shared.lock().expect("lock");
            match outcome {
                Err((id, e)) if id == 0 => {
                    guard.in_flight.clear();
                    guard.finished = Some(MipStatus::Infeasible);
                    self.wake.notify_all();
                    return Some(e);
                }
                Err((id, _)) => guard.in_flight.retain(|f| f.0 != id),
                Ok(id) => guard.in_flight.retain(|f| f.0 != id),
            }
            self.wake.notify_all();
        }
    }

    /// Solves one node and folds the result into the shared state.
    fn evaluate(&self, node: Node) -> Result<usize, (usize, LpError)> {
        let bounds = self.bounds_for(&node.fixings);
        let opts = LpOptions {
            stop: self.ctl.stop,
            deadline: self.deadline,
            warm_start: node.basis.as_deref(),
        };
        let id = node.id;
        let record = NodeRecord {
            depth: node.depth,
            branch_var: node.branch.map(|b| b.0),
            branch_dir: node.branch.map(|b| b.1),
            local_bound: node.bound,
            parent_bound: node.bound,
        };
        let sol = match lp::solve_with_bounds(self.problem, &bounds, &opts) {
            Ok(s) => s,
            Err(LpError::Interrupted) => {
                let mut sh = self.shared.lock().expect("lock");
                sh.open.push(node);
                return Ok(id);
            }
            Err(e) if id == 0 => return Err((id, e)),
            Err(e) => {
                log::warn!("node {id} LP failed ({e}); keeping its bound unresolved");
                let mut sh = self.shared.lock().expect("lock");
                sh.floor = sh.floor.min(node.bound);
                sh.nodes += 1;
                self.emit(&mut sh, id, record, NodeOutcome::Failed);
                return Ok(id);
            }
        };

        if sol.status != LpStatus::Optimal {
            let mut sh = self.shared.lock().expect("lock");
            sh.nodes += 1;
            if sol.status == LpStatus::Unbounded {
                log::warn!("node {id} relaxation unbounded");
                sh.floor = f64::NEG_INFINITY;
            }
            self.emit(&mut sh, id, record, NodeOutcome::Infeasible);
            return Ok(id);
        }

        let bound = sol.objective.max(node.bound);
        let record = NodeRecord {
            local_bound: bound,
            ..record
        };

        // rounding heuristic
        let rounded: Vec<(usize, f64)> = self
            .int_cols
            .iter()
            .map(|&j| (j, sol.x[j].round().clamp(bounds[j].0.ceil(), bounds[j].1.floor())))
            .collect();
        let key = pattern_hash(&rounded);
        let fresh_pattern = self.shared.lock().expect("lock").tried.insert(key);
        if fresh_pattern {
            self.try_incumbent(&rounded, sol.basis.as_ref());
        }

        let branch = self
            .int_cols
            .iter()
            .map(|&j| (j, sol.x[j] - sol.x[j].floor()))
            .filter(|&(_, f)| f > INTEGRALITY_TOL && f < 1.0 - INTEGRALITY_TOL)
            .min_by(|a, b| {
                let da = (a.1 - 0.5).abs();
                let db = (b.1 - 0.5).abs();
                da.total_cmp(&db).then(a.0.cmp(&b.0))
            });

        let mut sh = self.shared.lock().expect("lock");
        sh.nodes += 1;
        let Some((col, _)) = branch else {
            self.emit(&mut sh, id, record, NodeOutcome::Integral);
            return Ok(id);
        };
        if sh.closes(bound, self.options.rel_gap) {
            sh.floor = sh.floor.min(bound);
            self.emit(&mut sh, id, record, NodeOutcome::Pruned);
            return Ok(id);
        }
        let basis = sol.basis.map(Arc::new);
        let value = sol.x[col];
        for (dir, fixed) in [(BranchDir::Down, value.floor()), (BranchDir::Up, value.ceil())] {
            let mut fixings = node.fixings.clone();
            fixings.push((col, fixed));
            let child = Node {
                id: sh.next_id,
                depth: node.depth + 1,
                bound,
                fixings,
                basis: basis.clone(),
                branch: Some((col, dir)),
            };
            sh.next_id += 1;
            sh.open.push(child);
        }
        self.emit(&mut sh, id, record, NodeOutcome::Branched);
        Ok(id)
    }

    fn try_incumbent(&self, fixings: &[(usize, f64)], basis: Option<&Basis>) {
        let opts = LpOptions {
            stop: self.ctl.stop,
            deadline: self.deadline,
            warm_start: basis,
        };
        let Ok(sol) = lp::solve_lp_fixed_with(self.problem, fixings, &opts) else {
            return;
        };
        if sol.status != LpStatus::Optimal {
            return;
        }
        let mut x = sol.x;
        for &(j, v) in fixings {
            x[j] = v;
        }
        if let Some(obj) = (self.accept)(&x) {
            let mut sh = self.shared.lock().expect("lock");
            if obj < sh.upper {
                sh.upper = obj;
                sh.incumbent = x;
                sh.refresh_lower();
            }
        }
    }

    fn emit(&self, sh: &mut Shared, id: usize, record: NodeRecord, outcome: NodeOutcome) {
        // the node is resolved: its children, the floor or the incumbent now carry its bound
        sh.in_flight.retain(|f| f.0 != id);
        let Some(sink) = self.ctl.events else {
            return;
        };
        sh.refresh_lower();
        sink.node(&NodeEvent {
            node: id,
            record,
            outcome,
            upper: sh.upper,
            lower: sh.lower,
            gap: relative_gap(sh.upper, sh.lower),
        });
    }
}
