//! Bounded-variable linear programming.
//!
//! Problems are `min cᵀx` subject to `row_lo ≤ A x ≤ row_hi` and
//! `col_lo ≤ x ≤ col_hi`, with infinite bounds allowed. One-sided rows are
//! the usual `≤`/`≥` constraints and rows with equal bounds are equalities.

mod lu;
mod simplex;

use std::sync::atomic::AtomicBool;
use std::time::Instant;

use thiserror::Error;

use crate::sparse::CscMatrix;

pub use simplex::{Basis, VarStatus};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Smallest acceptable pivot magnitude.
pub const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
pub const DEGENERATE_LIMIT: usize = 1000;
/// Iteration cap factor: `cap = ITERATION_FACTOR · (rows + cols)`.
pub const ITERATION_FACTOR: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("interrupted")]
    Interrupted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
    Range,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub col_bounds: Vec<(f64, f64)>,
    pub row_bounds: Vec<(f64, f64)>,
    pub matrix: CscMatrix,
    /// Columns that a MIP caller treats as binary/integer. Ignored by the LP.
    pub integrality: Vec<bool>,
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl LpProblem {
    /// Builds and checks a problem from coefficient triplets `(row, col, value)`.
    pub fn new(
        objective: Vec<f64>,
        col_bounds: Vec<(f64, f64)>,
        row_bounds: Vec<(f64, f64)>,
        triplets: &[(usize, usize, f64)],
    ) -> Result<LpProblem, LpError> {
        let n = objective.len();
        let m = row_bounds.len();
        if col_bounds.len() != n {
            return Err(LpError::Invalid(format!(
                "{} column bounds for {n} columns",
                col_bounds.len()
            )));
        }
        if let Some(j) = objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Invalid(format!("objective coefficient {j} is not finite")));
        }
        for (j, &(lo, hi)) in col_bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Invalid(format!("column {j} has bounds [{lo}, {hi}]")));
            }
        }
        for (i, &(lo, hi)) in row_bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Invalid(format!("row {i} has bounds [{lo}, {hi}]")));
            }
        }
        for &(r, c, v) in triplets {
            if r >= m || c >= n || !v.is_finite() {
                return Err(LpError::Invalid(format!("bad coefficient ({r}, {c}) = {v}")));
            }
        }
        Ok(LpProblem {
            objective,
            col_bounds,
            row_bounds,
            matrix: CscMatrix::from_triplets(m, n, triplets),
            integrality: vec![false; n],
            col_names: (0..n).map(|j| format!("x{j}")).collect(),
            row_names: (0..m).map(|i| format!("r{i}")).collect(),
        })
    }

    pub fn with_integrality(mut self, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), self.n_cols());
        self.integrality = mask;
        self
    }

    pub fn with_names(mut self, cols: Vec<String>, rows: Vec<String>) -> Self {
        assert_eq!(cols.len(), self.n_cols());
        assert_eq!(rows.len(), self.n_rows());
        self.col_names = cols;
        self.row_names = rows;
        self
    }

    pub fn n_rows(&self) -> usize {
        self.row_bounds.len()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn row_sense(&self, i: usize) -> Sense {
        let (lo, hi) = self.row_bounds[i];
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => Sense::Eq,
            (true, true) => Sense::Range,
            (false, true) => Sense::Le,
            (true, false) => Sense::Ge,
            (false, false) => Sense::Free,
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or column bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let act = self.matrix.mul_vec(x);
        let rows = act
            .iter()
            .zip(&self.row_bounds)
            .map(|(&a, &(lo, hi))| (lo - a).max(a - hi).max(0.0));
        let cols = x
            .iter()
            .zip(&self.col_bounds)
            .map(|(&v, &(lo, hi))| (lo - v).max(v - hi).max(0.0));
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Lagrangian dual value for row multipliers `duals` and reduced costs
    /// `d = c − Aᵀ duals`. Infinite when a multiplier of meaningful size
    /// meets an infinite bound.
    pub fn dual_objective(&self, duals: &[f64]) -> f64 {
        self.dual_objective_with(duals, &self.col_bounds)
    }

    pub fn dual_objective_with(&self, duals: &[f64], col_bounds: &[(f64, f64)]) -> f64 {
        let reduced = self.reduced_costs(duals);
        let scale = self
            .objective
            .iter()
            .chain(duals)
            .fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = 1e-9 * scale;
        let row_part: f64 = duals
            .iter()
            .zip(&self.row_bounds)
            .map(|(&y, &(lo, hi))| bound_term(y, lo, hi, tol))
            .sum();
        let col_part: f64 = reduced
            .iter()
            .zip(col_bounds)
            .map(|(&d, &(lo, hi))| bound_term(d, lo, hi, tol))
            .sum();
        row_part + col_part
    }

    pub fn reduced_costs(&self, duals: &[f64]) -> Vec<f64> {
        (0..self.n_cols())
            .map(|j| self.objective[j] - self.matrix.col_dot(j, duals))
            .collect()
    }

    /// `sup { (Aᵀy)ᵀx − yᵀr : x in column box, r in row box }`. A negative
    /// value proves infeasibility, since every feasible `(x, r = A x)` makes
    /// the expression zero. An empty box yields `−∞`.
    pub fn farkas_value(&self, ray: &[f64]) -> f64 {
        self.farkas_value_with(ray, &self.col_bounds)
    }

    /// [`LpProblem::farkas_value`] with `col_bounds` in place of the
    /// problem's own column bounds.
    pub fn farkas_value_with(&self, ray: &[f64], col_bounds: &[(f64, f64)]) -> f64 {
        if col_bounds
            .iter()
            .chain(&self.row_bounds)
            .any(|&(lo, hi)| lo > hi)
        {
            return f64::NEG_INFINITY;
        }
        let scale = ray.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let clean = |v: f64| if v.abs() <= 1e-9 * scale { 0.0 } else { v };
        let mut total = 0.0;
        for j in 0..self.n_cols() {
            let g = clean(self.matrix.col_dot(j, ray));
            let (lo, hi) = col_bounds[j];
            total += sup_linear(g, lo, hi);
        }
        for (i, &(lo, hi)) in self.row_bounds.iter().enumerate() {
            total += sup_linear(-clean(ray[i]), lo, hi);
        }
        total
    }
}

/// `min_{v ∈ [lo, hi]} coef · v`; coefficients within `tol` of zero
/// contribute nothing against an infinite bound.
fn bound_term(coef: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let bound = if coef > 0.0 { lo } else { hi };
    if coef.abs() <= tol && !bound.is_finite() {
        0.0
    } else if coef > 0.0 {
        coef * lo
    } else if coef < 0.0 {
        coef * hi
    } else {
        0.0
    }
}

fn sup_linear(g: f64, lo: f64, hi: f64) -> f64 {
    if g > 0.0 {
        g * hi
    } else if g < 0.0 {
        g * lo
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers. For a minimization, `≤` rows carry nonpositive and
    /// `≥` rows nonnegative values at optimality.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub dual_objective: f64,
    /// Certificate ray on `Infeasible`; see [`LpProblem::farkas_value`].
    pub farkas: Option<Vec<f64>>,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

/// Per-call controls: cooperative cancellation, deadline and warm start.
#[derive(Default, Clone, Copy)]
pub struct LpOptions<'a> {
    pub stop: Option<&'a AtomicBool>,
    pub deadline: Option<Instant>,
    pub warm_start: Option<&'a Basis>,
}

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    solve_lp_with(p, &LpOptions::default())
}

pub fn solve_lp_with(p: &LpProblem, opts: &LpOptions) -> Result<LpSolution, LpError> {
    solve_with_bounds(p, &p.col_bounds, opts)
}

/// Solves with each `(col, value)` pinned: the column's bounds become
/// `[max(lo, value), min(hi, value)]`, so values outside the original
/// bounds make the problem infeasible.
pub fn solve_lp_fixed(p: &LpProblem, fixings: &[(usize, f64)]) -> Result<LpSolution, LpError> {
    solve_lp_fixed_with(p, fixings, &LpOptions::default())
}

pub fn solve_lp_fixed_with(
    p: &LpProblem,
    fixings: &[(usize, f64)],
    opts: &LpOptions,
) -> Result<LpSolution, LpError> {
    let mut bounds = p.col_bounds.clone();
    for &(j, v) in fixings {
        if j >= bounds.len() {
            return Err(LpError::Invalid(format!("fixing index {j} out of range")));
        }
        let (lo, hi) = bounds[j];
        bounds[j] = (lo.max(v), hi.min(v));
    }
    solve_with_bounds(p, &bounds, opts)
}

/// Solves `p` with `bounds` in place of its column bounds.
pub fn solve_with_bounds(
    p: &LpProblem,
    bounds: &[(f64, f64)],
    opts: &LpOptions,
) -> Result<LpSolution, LpError> {
    if let Some(j) = bounds.iter().position(|&(lo, hi)| lo > hi) {
        log::debug!("column {j} has crossing bounds; infeasible without pivoting");
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: bounds.iter().map(|b| b.0).collect(),
            objective: f64::INFINITY,
            duals: vec![0.0; p.n_rows()],
            reduced_costs: p.objective.clone(),
            dual_objective: f64::INFINITY,
            farkas: Some(vec![0.0; p.n_rows()]),
            iterations: 0,
            basis: None,
        });
    }
    simplex::Simplex::new(p, bounds, opts).run()
}
