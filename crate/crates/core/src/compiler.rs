//! Lowers a [`UcInstance`] into the compact MILP
//!
//! ```text
//! min  cᵀz + bᵀy
//! s.t. F z          {≤,=} f      commitment rows
//!      H y            ≤   h      dispatch rows (line limits)
//!      A z + B y    {≤,=} g      coupling rows (segments, output, ramps)
//!      I_u y          =   d      nodal balance
//!      z ∈ {0,1}
//! ```
//!
//! z holds on/off, startup and shutdown per generator-period; y holds output,
//! segment outputs and the angles of every non-reference bus. Line flows are
//! `susceptance · (θ_from − θ_to)` and appear only as expressions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::instance::{validate_instance, UcInstance, Violation};
use crate::lp::LpProblem;
use crate::sparse::CooMatrix;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("instance is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
}

/// A named variable of the compact model. Periods are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    On { gen: usize, t: usize },
    Startup { gen: usize, t: usize },
    Shutdown { gen: usize, t: usize },
    Power { gen: usize, t: usize },
    Segment { gen: usize, t: usize, k: usize },
    Angle { bus: usize, t: usize },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::On { gen, t } => write!(f, "u_g{gen}_t{t}"),
            Var::Startup { gen, t } => write!(f, "v_g{gen}_t{t}"),
            Var::Shutdown { gen, t } => write!(f, "w_g{gen}_t{t}"),
            Var::Power { gen, t } => write!(f, "p_g{gen}_t{t}"),
            Var::Segment { gen, t, k } => write!(f, "pseg_g{gen}_t{t}_k{k}"),
            Var::Angle { bus, t } => write!(f, "theta_b{bus}_t{t}"),
        }
    }
}

/// Bijection between named variables and columns. Commitment columns come
/// first (u, v, w families), then dispatch columns (p, p_seg, θ); each
/// family is contiguous. Column numbers are global (z then y).
#[derive(Debug, Clone, PartialEq)]
pub struct VariableIndex {
    n_gens: usize,
    horizon: usize,
    /// Cumulative segment-column offsets, length `n_gens + 1`.
    seg_offsets: Vec<usize>,
    seg_counts: Vec<usize>,
    /// Rank of each bus among non-reference buses.
    angle_rank: Vec<Option<usize>>,
    angle_bus: Vec<usize>,
}

impl VariableIndex {
    pub fn new(inst: &UcInstance) -> Self {
        let seg_counts: Vec<usize> = inst.generators.iter().map(|g| g.segments.len()).collect();
        let mut seg_offsets = vec![0];
        for &k in &seg_counts {
            seg_offsets.push(seg_offsets.last().unwrap() + k * inst.horizon);
        }
        let mut angle_rank = Vec::with_capacity(inst.buses.len());
        let mut angle_bus = Vec::new();
        for (i, b) in inst.buses.iter().enumerate() {
            if b.is_reference {
                angle_rank.push(None);
            } else {
                angle_rank.push(Some(angle_bus.len()));
                angle_bus.push(i);
            }
        }
        VariableIndex {
            n_gens: inst.generators.len(),
            horizon: inst.horizon,
            seg_offsets,
            seg_counts,
            angle_rank,
            angle_bus,
        }
    }

    fn gt(&self) -> usize {
        self.n_gens * self.horizon
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_generators(&self) -> usize {
        self.n_gens
    }

    pub fn segments_of(&self, gen: usize) -> usize {
        self.seg_counts[gen]
    }

    /// Length of the binary block z.
    pub fn z_len(&self) -> usize {
        3 * self.gt()
    }

    /// Length of the continuous block y.
    pub fn y_len(&self) -> usize {
        self.gt() + self.seg_offsets[self.n_gens] + self.angle_bus.len() * self.horizon
    }

    pub fn len(&self) -> usize {
        self.z_len() + self.y_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn seg_base(&self) -> usize {
        4 * self.gt()
    }

    fn angle_base(&self) -> usize {
        self.seg_base() + self.seg_offsets[self.n_gens]
    }

    /// Global column of `var`, or `None` for variables that do not exist
    /// (e.g. the reference-bus angle).
    pub fn col(&self, var: Var) -> Option<usize> {
        let h = self.horizon;
        match var {
            Var::On { gen, t } if gen < self.n_gens && t < h => Some(gen * h + t),
            Var::Startup { gen, t } if gen < self.n_gens && t < h => Some(self.gt() + gen * h + t),
            Var::Shutdown { gen, t } if gen < self.n_gens && t < h => {
                Some(2 * self.gt() + gen * h + t)
            }
            Var::Power { gen, t } if gen < self.n_gens && t < h => Some(3 * self.gt() + gen * h + t),
            Var::Segment { gen, t, k } if gen < self.n_gens && t < h && k < self.seg_counts[gen] => {
                Some(self.seg_base() + self.seg_offsets[gen] + t * self.seg_counts[gen] + k)
            }
            Var::Angle { bus, t } if t < h => self
                .angle_rank
                .get(bus)
                .copied()
                .flatten()
                .map(|r| self.angle_base() + r * h + t),
            _ => None,
        }
    }

    /// Column of a variable known to exist.
    pub(crate) fn at(&self, var: Var) -> usize {
        self.col(var).unwrap_or_else(|| panic!("no column for {var:?}"))
    }

    /// Inverse lookup.
    pub fn var(&self, col: usize) -> Option<Var> {
        let h = self.horizon;
        let gt = self.gt();
        if col >= self.len() || h == 0 {
            return None;
        }
        let family = col / gt.max(1);
        if col < 4 * gt {
            let r = col - family * gt;
            let (gen, t) = (r / h, r % h);
            return Some(match family {
                0 => Var::On { gen, t },
                1 => Var::Startup { gen, t },
                2 => Var::Shutdown { gen, t },
                _ => Var::Power { gen, t },
            });
        }
        if col < self.angle_base() {
            let r = col - self.seg_base();
            let gen = self.seg_offsets.partition_point(|&o| o <= r) - 1;
            let local = r - self.seg_offsets[gen];
            let k = self.seg_counts[gen];
            return Some(Var::Segment {
                gen,
                t: local / k,
                k: local % k,
            });
        }
        let r = col - self.angle_base();
        Some(Var::Angle {
            bus: self.angle_bus[r / h],
            t: r % h,
        })
    }
}

/// One constraint block. Coefficients are split into the z-part and the
/// y-part; each part has the full width of its variable block.
#[derive(Debug, Clone, PartialEq)]
pub struct RowBlock {
    pub on_z: CooMatrix,
    pub on_y: CooMatrix,
    pub rhs: Vec<f64>,
    pub sense: Vec<RowSense>,
    pub names: Vec<String>,
}

impl RowBlock {
    fn new(nz: usize, ny: usize) -> Self {
        RowBlock {
            on_z: CooMatrix::new(0, nz),
            on_y: CooMatrix::new(0, ny),
            rhs: Vec::new(),
            sense: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.on_z.nnz() + self.on_y.nnz()
    }

    /// Max violation over the block's rows: `max(0, lhs − rhs)` for `≤`,
    /// `|lhs − rhs|` for `=`.
    pub fn max_violation(&self, z: &[f64], y: &[f64]) -> f64 {
        let mut lhs = vec![0.0; self.len()];
        self.on_z.mul_add(z, &mut lhs);
        self.on_y.mul_add(y, &mut lhs);
        lhs.iter()
            .zip(&self.rhs)
            .zip(&self.sense)
            .map(|((a, b), s)| match s {
                RowSense::Le => (a - b).max(0.0),
                RowSense::Eq => (a - b).abs(),
            })
            .fold(0.0, f64::max)
    }
}

/// Builder for one row: accumulates global-column coefficients.
struct RowBuf {
    terms: BTreeMap<usize, f64>,
}

impl RowBuf {
    fn new() -> Self {
        RowBuf {
            terms: BTreeMap::new(),
        }
    }
    fn add(&mut self, col: usize, coef: f64) -> &mut Self {
        *self.terms.entry(col).or_insert(0.0) += coef;
        self
    }
}

/// Which block a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Commitment,
    Dispatch,
    Coupling,
    Balance,
}

pub const BLOCK_KINDS: [BlockKind; 4] = [
    BlockKind::Commitment,
    BlockKind::Dispatch,
    BlockKind::Coupling,
    BlockKind::Balance,
];

#[derive(Debug, Clone, PartialEq)]
pub struct CompactModel {
    pub name: String,
    pub index: VariableIndex,
    /// Commitment costs over z ($).
    pub commitment_cost: Vec<f64>,
    /// Dispatch costs over y ($ per MW of segment output per period).
    pub dispatch_cost: Vec<f64>,
    /// F z {≤,=} f.
    pub commitment: RowBlock,
    /// H y ≤ h.
    pub dispatch: RowBlock,
    /// A z + B y {≤,=} g.
    pub coupling: RowBlock,
    /// I_u y = d.
    pub balance: RowBlock,
    pub z_bounds: Vec<(f64, f64)>,
    pub y_bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelStats {
    pub n_vars: usize,
    pub n_binary: usize,
    pub n_continuous: usize,
    pub n_rows_commitment: usize,
    pub n_rows_dispatch: usize,
    pub n_rows_coupling: usize,
    pub n_rows_balance: usize,
    pub nonzeros: usize,
}

impl ModelStats {
    pub fn n_rows(&self) -> usize {
        self.n_rows_commitment + self.n_rows_dispatch + self.n_rows_coupling + self.n_rows_balance
    }
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} variables ({} binary, {} continuous), {} rows (commitment {}, dispatch {}, coupling {}, balance {}), {} nonzeros",
            self.n_vars,
            self.n_binary,
            self.n_continuous,
            self.n_rows(),
            self.n_rows_commitment,
            self.n_rows_dispatch,
            self.n_rows_coupling,
            self.n_rows_balance,
            self.nonzeros
        )
    }
}

/// Per-block max violations of a candidate point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub commitment: f64,
    pub dispatch: f64,
    pub coupling: f64,
    pub balance: f64,
    /// Max distance outside the column bounds.
    pub bounds: f64,
    /// Max distance of a z entry from {0, 1}.
    pub integrality: f64,
}

impl Residuals {
    /// Max over the four constraint blocks.
    pub fn max_block(&self) -> f64 {
        self.commitment
            .max(self.dispatch)
            .max(self.coupling)
            .max(self.balance)
    }

    pub fn max(&self) -> f64 {
        self.max_block().max(self.bounds).max(self.integrality)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub residuals: Residuals,
}

struct Assembler {
    nz: usize,
    blocks: [RowBlock; 4],
}

impl Assembler {
    fn push(&mut self, kind: BlockKind, name: String, row: &RowBuf, sense: RowSense, rhs: f64) {
        let nz = self.nz;
        let block = &mut self.blocks[kind as usize];
        let r = block.rhs.len();
        block.on_z.n_rows += 1;
        block.on_y.n_rows += 1;
        for (&col, &v) in &row.terms {
            if col < nz {
                block.on_z.push(r, col, v);
            } else {
                block.on_y.push(r, col - nz, v);
            }
        }
        block.rhs.push(rhs);
        block.sense.push(sense);
        block.names.push(name);
    }
}

/// Compiles a validated instance.
pub fn compile(inst: &UcInstance) -> Result<CompactModel, CompileError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(CompileError::Invalid(violations));
    }
    let index = VariableIndex::new(inst);
    let nz = index.z_len();
    let ny = index.y_len();
    let horizon = inst.horizon;
    let mut asm = Assembler {
        nz,
        blocks: std::array::from_fn(|_| RowBlock::new(nz, ny)),
    };
    let mut commitment_cost = vec![0.0; nz];
    let mut dispatch_cost = vec![0.0; ny];
    let z_bounds = vec![(0.0, 1.0); nz];
    let mut y_bounds = vec![(0.0, 0.0); ny];

    for (gi, g) in inst.generators.iter().enumerate() {
        let u = |t| index.at(Var::On { gen: gi, t });
        let v = |t| index.at(Var::Startup { gen: gi, t });
        let w = |t| index.at(Var::Shutdown { gen: gi, t });
        let p = |t| index.at(Var::Power { gen: gi, t });
        let seg = |t, k| index.at(Var::Segment { gen: gi, t, k });
        let init_u = if g.init_on { 1.0 } else { 0.0 };

        for t in 0..horizon {
            commitment_cost[u(t)] = g.no_load_cost;
            commitment_cost[v(t)] = g.startup_cost;
            commitment_cost[w(t)] = g.shutdown_cost;
            y_bounds[p(t) - nz] = (0.0, g.p_max);
            for (k, s) in g.segments.iter().enumerate() {
                dispatch_cost[seg(t, k) - nz] = s.marginal_cost * inst.period_hours;
                y_bounds[seg(t, k) - nz] = (0.0, s.width);
            }

            // u[t] − u[t−1] − v[t] + w[t] = 0
            let mut row = RowBuf::new();
            row.add(u(t), 1.0).add(v(t), -1.0).add(w(t), 1.0);
            let rhs = if t == 0 {
                init_u
            } else {
                row.add(u(t - 1), -1.0);
                0.0
            };
            asm.push(BlockKind::Commitment, format!("logic_g{gi}_t{t}"), &row, RowSense::Eq, rhs);

            let mut row = RowBuf::new();
            row.add(v(t), 1.0).add(w(t), 1.0);
            asm.push(BlockKind::Commitment, format!("onoff_g{gi}_t{t}"), &row, RowSense::Le, 1.0);

            // Σ_{τ=t−UT+1..t} v[τ] ≤ u[t]
            let mut row = RowBuf::new();
            let first = (t + 1).saturating_sub(g.min_up as usize);
            for tau in first..=t {
                row.add(v(tau), 1.0);
            }
            row.add(u(t), -1.0);
            asm.push(BlockKind::Commitment, format!("minup_g{gi}_t{t}"), &row, RowSense::Le, 0.0);

            // Σ_{τ=t−DT+1..t} w[τ] ≤ 1 − u[t]
            let mut row = RowBuf::new();
            let first = (t + 1).saturating_sub(g.min_down as usize);
            for tau in first..=t {
                row.add(w(tau), 1.0);
            }
            row.add(u(t), 1.0);
            asm.push(BlockKind::Commitment, format!("mindown_g{gi}_t{t}"), &row, RowSense::Le, 1.0);

            // p = p_min·u + Σ_k p_seg[k]
            let mut row = RowBuf::new();
            row.add(p(t), 1.0).add(u(t), -g.p_min);
            for k in 0..g.segments.len() {
                row.add(seg(t, k), -1.0);
            }
            asm.push(BlockKind::Coupling, format!("output_g{gi}_t{t}"), &row, RowSense::Eq, 0.0);

            // p_seg[k] ≤ width_k·u
            for (k, s) in g.segments.iter().enumerate() {
                let mut row = RowBuf::new();
                row.add(seg(t, k), 1.0).add(u(t), -s.width);
                asm.push(
                    BlockKind::Coupling,
                    format!("seg_g{gi}_t{t}_k{k}"),
                    &row,
                    RowSense::Le,
                    0.0,
                );
            }

            // p[t] − p[t−1] ≤ RU·u[t−1] + SU·v[t]
            let mut row = RowBuf::new();
            row.add(p(t), 1.0).add(v(t), -g.startup_ramp);
            let rhs = if t == 0 {
                g.init_power + g.ramp_up * init_u
            } else {
                row.add(p(t - 1), -1.0).add(u(t - 1), -g.ramp_up);
                0.0
            };
            asm.push(BlockKind::Coupling, format!("rampup_g{gi}_t{t}"), &row, RowSense::Le, rhs);

            // p[t−1] − p[t] ≤ RD·u[t] + SD·w[t]
            let mut row = RowBuf::new();
            row.add(p(t), -1.0).add(u(t), -g.ramp_down).add(w(t), -g.shutdown_ramp);
            let rhs = if t == 0 {
                -g.init_power
            } else {
                row.add(p(t - 1), 1.0);
                0.0
            };
            asm.push(BlockKind::Coupling, format!("rampdown_g{gi}_t{t}"), &row, RowSense::Le, rhs);
        }

        // Units that have not yet satisfied their minimum time in the
        // initial state are pinned for the remaining deficit.
        let (min_time, fixed) = if g.init_on {
            (g.min_up, 1.0)
        } else {
            (g.min_down, 0.0)
        };
        let deficit = (min_time.saturating_sub(g.init_periods_in_state) as usize).min(horizon);
        for t in 0..deficit {
            let mut row = RowBuf::new();
            row.add(u(t), 1.0);
            asm.push(BlockKind::Commitment, format!("init_g{gi}_t{t}"), &row, RowSense::Eq, fixed);
        }
    }

    for (bi, _) in inst.buses.iter().enumerate() {
        if let Some(r) = index.col(Var::Angle { bus: bi, t: 0 }) {
            for t in 0..horizon {
                y_bounds[r + t - nz] = (f64::NEG_INFINITY, f64::INFINITY);
            }
        }
    }

    let bus_of: Vec<usize> = inst
        .generators
        .iter()
        .map(|g| inst.bus_index(&g.bus).expect("validated"))
        .collect();
    let line_ends: Vec<(usize, usize)> = inst
        .lines
        .iter()
        .map(|l| {
            (
                inst.bus_index(&l.from_bus).expect("validated"),
                inst.bus_index(&l.to_bus).expect("validated"),
            )
        })
        .collect();

    for t in 0..horizon {
        // |susceptance · (θ_from − θ_to)| ≤ limit
        for (li, (l, &(from, to))) in inst.lines.iter().zip(&line_ends).enumerate() {
            let mut flow = RowBuf::new();
            if let Some(c) = index.col(Var::Angle { bus: from, t }) {
                flow.add(c, l.susceptance);
            }
            if let Some(c) = index.col(Var::Angle { bus: to, t }) {
                flow.add(c, -l.susceptance);
            }
            asm.push(
                BlockKind::Dispatch,
                format!("flowmax_l{li}_t{t}"),
                &flow,
                RowSense::Le,
                l.flow_limit,
            );
            let mut reverse = RowBuf::new();
            for (&c, &v) in &flow.terms {
                reverse.add(c, -v);
            }
            asm.push(
                BlockKind::Dispatch,
                format!("flowmin_l{li}_t{t}"),
                &reverse,
                RowSense::Le,
                l.flow_limit,
            );
        }

        // generation − net outflow = demand
        let mut rows: Vec<RowBuf> = (0..inst.buses.len()).map(|_| RowBuf::new()).collect();
        for (gi, &b) in bus_of.iter().enumerate() {
            rows[b].add(index.at(Var::Power { gen: gi, t }), 1.0);
        }
        for (l, &(from, to)) in inst.lines.iter().zip(&line_ends) {
            for (bus, sign) in [(from, -1.0), (to, 1.0)] {
                // flow_l = s·θ_from − s·θ_to, leaving `from` and entering `to`
                if let Some(c) = index.col(Var::Angle { bus: from, t }) {
                    rows[bus].add(c, sign * l.susceptance);
                }
                if let Some(c) = index.col(Var::Angle { bus: to, t }) {
                    rows[bus].add(c, -sign * l.susceptance);
                }
            }
        }
        for (bi, row) in rows.iter_mut().enumerate() {
            row.terms.retain(|_, v| *v != 0.0);
            asm.push(
                BlockKind::Balance,
                format!("balance_b{bi}_t{t}"),
                row,
                RowSense::Eq,
                inst.demand[bi][t],
            );
        }
    }

    let [commitment, dispatch, coupling, balance] = asm.blocks;
    Ok(CompactModel {
        name: inst.name.clone(),
        index,
        commitment_cost,
        dispatch_cost,
        commitment,
        dispatch,
        coupling,
        balance,
        z_bounds,
        y_bounds,
    })
}

impl CompactModel {
    pub fn z_len(&self) -> usize {
        self.commitment_cost.len()
    }

    pub fn y_len(&self) -> usize {
        self.dispatch_cost.len()
    }

    pub fn block(&self, kind: BlockKind) -> &RowBlock {
        match kind {
            BlockKind::Commitment => &self.commitment,
            BlockKind::Dispatch => &self.dispatch,
            BlockKind::Coupling => &self.coupling,
            BlockKind::Balance => &self.balance,
        }
    }

    /// Integrality mask over all columns (z then y).
    pub fn integrality(&self) -> Vec<bool> {
        let mut mask = vec![true; self.z_len()];
        mask.resize(self.z_len() + self.y_len(), false);
        mask
    }

    /// LP relaxation with rows in block order (commitment, dispatch,
    /// coupling, balance) and columns z then y.
    pub fn lp_relaxation(&self) -> LpProblem {
        let nz = self.z_len();
        let n = nz + self.y_len();
        let mut objective = self.commitment_cost.clone();
        objective.extend_from_slice(&self.dispatch_cost);
        let mut bounds = self.z_bounds.clone();
        bounds.extend_from_slice(&self.y_bounds);
        let mut triplets = Vec::new();
        let mut row_bounds = Vec::new();
        let mut offset = 0;
        for kind in BLOCK_KINDS {
            let b = self.block(kind);
            triplets.extend(b.on_z.entries.iter().map(|&(r, c, v)| (offset + r, c, v)));
            triplets.extend(b.on_y.entries.iter().map(|&(r, c, v)| (offset + r, nz + c, v)));
            for (&rhs, &s) in b.rhs.iter().zip(&b.sense) {
                row_bounds.push(match s {
                    RowSense::Le => (f64::NEG_INFINITY, rhs),
                    RowSense::Eq => (rhs, rhs),
                });
            }
            offset += b.len();
        }
        LpProblem::new(objective, bounds, row_bounds, &triplets)
            .expect("compiled model is a well-formed LP")
            .with_integrality(self.integrality())
            .with_names(
                (0..n).map(|j| self.column_name(j)).collect(),
                BLOCK_KINDS
                    .iter()
                    .flat_map(|&k| self.block(k).names.iter().cloned())
                    .collect(),
            )
    }

    pub fn column_name(&self, col: usize) -> String {
        self.index
            .var(col)
            .map(|v| v.to_string())
            .unwrap_or_else(|| format!("x{col}"))
    }

    /// Objective and per-block residuals of `(z, y)`.
    pub fn evaluate(&self, z: &[f64], y: &[f64]) -> Result<Evaluation, EvalError> {
        if z.len() != self.z_len() {
            return Err(EvalError::Dimension {
                what: "z",
                expected: self.z_len(),
                found: z.len(),
            });
        }
        if y.len() != self.y_len() {
            return Err(EvalError::Dimension {
                what: "y",
                expected: self.y_len(),
                found: y.len(),
            });
        }
        let objective = dot(&self.commitment_cost, z) + dot(&self.dispatch_cost, y);
        let out_of = |x: &[f64], b: &[(f64, f64)]| {
            x.iter()
                .zip(b)
                .map(|(&v, &(lo, hi))| (lo - v).max(v - hi).max(0.0))
                .fold(0.0, f64::max)
        };
        let residuals = Residuals {
            commitment: self.commitment.max_violation(z, y),
            dispatch: self.dispatch.max_violation(z, y),
            coupling: self.coupling.max_violation(z, y),
            balance: self.balance.max_violation(z, y),
            bounds: out_of(z, &self.z_bounds).max(out_of(y, &self.y_bounds)),
            integrality: z
                .iter()
                .map(|v| (v - v.round()).abs())
                .fold(0.0, f64::max),
        };
        Ok(Evaluation {
            objective,
            residuals,
        })
    }

    /// Same model with every cost multiplied by `factor`.
    pub fn scaled_costs(&self, factor: f64) -> CompactModel {
        let mut m = self.clone();
        m.commitment_cost.iter_mut().for_each(|c| *c *= factor);
        m.dispatch_cost.iter_mut().for_each(|c| *c *= factor);
        m
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn model_stats(model: &CompactModel) -> ModelStats {
    ModelStats {
        n_vars: model.z_len() + model.y_len(),
        n_binary: model.z_len(),
        n_continuous: model.y_len(),
        n_rows_commitment: model.commitment.len(),
        n_rows_dispatch: model.dispatch.len(),
        n_rows_coupling: model.coupling.len(),
        n_rows_balance: model.balance.len(),
        nonzeros: BLOCK_KINDS.iter().map(|&k| model.block(k).nnz()).sum(),
    }
}
