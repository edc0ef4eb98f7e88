//! Independent reference solvers and random problem generators shared by
//! the integration and acceptance tests.
#![allow(dead_code)]

use rand::Rng;
use scuc_core::instance::{Bus, CostSegment, Generator, UcInstance};
use scuc_core::lp::{solve_lp, LpProblem, LpStatus};

const INF: f64 = f64::INFINITY;

/// A small LP with finite column boxes, kept in a dense form the vertex
/// oracle can read directly.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub objective: Vec<f64>,
    pub col_bounds: Vec<(f64, f64)>,
    pub rows: Vec<Vec<f64>>,
    pub row_bounds: Vec<(f64, f64)>,
}

impl DenseLp {
    pub fn to_problem(&self) -> LpProblem {
        let mut trip = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            for (j, &a) in r.iter().enumerate() {
                if a != 0.0 {
                    trip.push((i, j, a));
                }
            }
        }
        LpProblem::new(
            self.objective.clone(),
            self.col_bounds.clone(),
            self.row_bounds.clone(),
            &trip,
        )
        .expect("generated LP is well formed")
    }
}

pub fn random_dense_lp<R: Rng>(rng: &mut R) -> DenseLp {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=4);
    let int = |rng: &mut R, lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64;
    let objective = (0..n).map(|_| int(rng, -6, 6)).collect();
    let col_bounds = (0..n)
        .map(|_| {
            let lo = int(rng, -6, 2);
            (lo, lo + int(rng, 0, 12))
        })
        .collect();
    let rows = (0..m)
        .map(|_| (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { int(rng, -5, 5) }).collect())
        .collect();
    let row_bounds = (0..m)
        .map(|_| {
            let a = int(rng, -12, 12);
            match rng.gen_range(0..4) {
                0 => (-INF, a),
                1 => (a, INF),
                2 => (a, a),
                _ => (a, a + int(rng, 0, 8)),
            }
        })
        .collect();
    DenseLp {
        objective,
        col_bounds,
        rows,
        row_bounds,
    }
}

/// Solves `a x = b` for square `a` by Gaussian elimination with partial
/// pivoting; `None` when (near) singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimum objective over all basic feasible points, `None` if infeasible.
/// Every column box is finite, so a nonempty feasible set has a vertex.
pub fn vertex_oracle(lp: &DenseLp) -> Option<f64> {
    let n = lp.objective.len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (j, &(lo, hi)) in lp.col_bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        if hi != lo {
            planes.push((e, hi));
        }
    }
    for (r, &(lo, hi)) in lp.rows.iter().zip(&lp.row_bounds) {
        if lo.is_finite() {
            planes.push((r.clone(), lo));
        }
        if hi.is_finite() && hi != lo {
            planes.push((r.clone(), hi));
        }
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7;
        lp.col_bounds
            .iter()
            .zip(x)
            .all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
            && lp.rows.iter().zip(&lp.row_bounds).all(|(r, &(lo, hi))| {
                let a: f64 = r.iter().zip(x).map(|(p, q)| p * q).sum();
                a >= lo - tol * (1.0 + lo.abs()) && a <= hi + tol * (1.0 + hi.abs())
            })
    };
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn combos(k: usize, start: usize, total: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if k == pick.len() {
            f(pick);
            return;
        }
        for i in start..total {
            pick[k] = i;
            combos(k + 1, i + 1, total, pick, f);
        }
    }
    combos(0, 0, planes.len(), &mut pick, &mut |idx| {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

/// Random single-bus instance with `gens` units and `horizon` periods.
pub fn random_single_bus<R: Rng>(rng: &mut R, gens: usize, horizon: usize) -> UcInstance {
    let half = |rng: &mut R, lo: f64, hi: f64| (rng.gen_range(lo..hi) * 2.0).round() / 2.0;
    let generators: Vec<Generator> = (0..gens)
        .map(|i| {
            let p_max = half(rng, 20.0, 100.0);
            let p_min = half(rng, 0.0, 0.5 * p_max);
            let k = rng.gen_range(1..=3);
            let width = (p_max - p_min) / k as f64;
            let mut mc = half(rng, 5.0, 20.0);
            let segments = (0..k)
                .map(|_| {
                    let s = CostSegment {
                        width,
                        marginal_cost: mc,
                    };
                    mc += half(rng, 0.0, 10.0);
                    s
                })
                .collect();
            let ramp = |rng: &mut R| half(rng, 0.3 * p_max, p_max);
            let init_on = rng.gen_bool(0.5);
            Generator {
                id: format!("g{i}"),
                bus: "b1".into(),
                p_min,
                p_max,
                ramp_up: ramp(rng),
                ramp_down: ramp(rng),
                startup_ramp: ramp(rng).max(p_min),
                shutdown_ramp: ramp(rng).max(p_min),
                min_up: rng.gen_range(1..=3),
                min_down: rng.gen_range(1..=3),
                no_load_cost: half(rng, 0.0, 60.0),
                startup_cost: half(rng, 0.0, 300.0),
                shutdown_cost: half(rng, 0.0, 50.0),
                segments,
                init_on,
                init_power: if init_on { half(rng, p_min, p_max).clamp(p_min, p_max) } else { 0.0 },
                init_periods_in_state: rng.gen_range(1..=4),
            }
        })
        .collect();
    let cap: f64 = generators.iter().map(|g| g.p_max).sum();
    let demand = vec![(0..horizon).map(|_| half(rng, 0.15 * cap, 0.85 * cap)).collect()];
    UcInstance {
        name: "oracle".into(),
        horizon,
        period_hours: 1.0,
        buses: vec![Bus {
            id: "b1".into(),
            is_reference: true,
        }],
        lines: vec![],
        generators,
        demand,
    }
}

/// Whether the on/off sequence of one unit respects its minimum up and
/// down times, counting the periods already spent in the initial state.
pub fn run_lengths_ok(g: &Generator, on: &[bool]) -> bool {
    let mut state = g.init_on;
    let mut run = g.init_periods_in_state;
    for &u in on {
        if u == state {
            run += 1;
            continue;
        }
        let needed = if state { g.min_up } else { g.min_down };
        if run < needed {
            return false;
        }
        state = u;
        run = 1;
    }
    true
}

/// Cheapest dispatch for a fixed on/off pattern on a single-bus instance,
/// `None` when no dispatch meets demand and ramp limits.
///
/// Columns are the segment outputs only; unit output is `p_min·u` plus the
/// segment sum, and switched-off units get zero-width boxes.
pub fn dispatch_cost(inst: &UcInstance, on: &[Vec<bool>]) -> Option<f64> {
    let horizon = inst.horizon;
    let mut col_of = Vec::new();
    let mut objective = Vec::new();
    let mut col_bounds = Vec::new();
    let mut fixed_cost = 0.0;
    for (gi, g) in inst.generators.iter().enumerate() {
        let mut per_t = Vec::new();
        for t in 0..horizon {
            let u = on[gi][t];
            let prev = if t == 0 { g.init_on } else { on[gi][t - 1] };
            if u {
                fixed_cost += g.no_load_cost;
            }
            if u && !prev {
                fixed_cost += g.startup_cost;
            }
            if !u && prev {
                fixed_cost += g.shutdown_cost;
            }
            let mut cols = Vec::new();
            for s in &g.segments {
                cols.push(objective.len());
                objective.push(s.marginal_cost * inst.period_hours);
                col_bounds.push((0.0, if u { s.width } else { 0.0 }));
            }
            per_t.push(cols);
        }
        col_of.push(per_t);
    }

    let mut trip = Vec::new();
    let mut row_bounds = Vec::new();
    for t in 0..horizon {
        let r = row_bounds.len();
        let mut committed_min = 0.0;
        for (gi, g) in inst.generators.iter().enumerate() {
            if on[gi][t] {
                committed_min += g.p_min;
            }
            for &c in &col_of[gi][t] {
                trip.push((r, c, 1.0));
            }
        }
        let d = inst.demand[0][t] - committed_min;
        row_bounds.push((d, d));
    }
    for (gi, g) in inst.generators.iter().enumerate() {
        let base = |t: usize| if on[gi][t] { g.p_min } else { 0.0 };
        for t in 0..horizon {
            let u = on[gi][t];
            let (prev_u, prev_base) = if t == 0 {
                (g.init_on, 0.0)
            } else {
                (on[gi][t - 1], base(t - 1))
            };
            let started = u && !prev_u;
            let stopped = !u && prev_u;
            // segment sums: S_t − S_{t−1} within ramp allowances
            let mut up_lim = if prev_u { g.ramp_up } else { 0.0 } + if started { g.startup_ramp } else { 0.0 };
            let mut down_lim = if u { g.ramp_down } else { 0.0 } + if stopped { g.shutdown_ramp } else { 0.0 };
            up_lim -= base(t) - prev_base;
            down_lim += base(t) - prev_base;
            if t == 0 {
                up_lim += g.init_power;
                down_lim -= g.init_power;
            }
            let r = row_bounds.len();
            for &c in &col_of[gi][t] {
                trip.push((r, c, 1.0));
            }
            if t > 0 {
                for &c in &col_of[gi][t - 1] {
                    trip.push((r, c, -1.0));
                }
            }
            row_bounds.push((-down_lim, up_lim));
        }
    }
    if row_bounds.iter().any(|&(lo, hi)| lo > hi + 1e-9) {
        return None;
    }
    let row_bounds = row_bounds.into_iter().map(|(lo, hi)| (lo.min(hi), hi)).collect();
    let p = LpProblem::new(objective, col_bounds, row_bounds, &trip).expect("dispatch LP");
    let sol = solve_lp(&p).expect("dispatch LP solves");
    (sol.status == LpStatus::Optimal).then(|| sol.objective + fixed_cost)
}

/// Exact optimum of a single-bus instance by enumerating every on/off
/// pattern. `None` when no pattern admits a feasible dispatch.
pub fn enumeration_oracle(inst: &UcInstance) -> Option<f64> {
    assert_eq!(inst.buses.len(), 1, "oracle handles single-bus instances");
    let g_count = inst.generators.len();
    let horizon = inst.horizon;
    let bits = g_count * horizon;
    assert!(bits <= 16, "pattern space too large");
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bits) {
        let on: Vec<Vec<bool>> = (0..g_count)
            .map(|g| (0..horizon).map(|t| mask >> (g * horizon + t) & 1 == 1).collect())
            .collect();
        if !inst.generators.iter().zip(&on).all(|(g, o)| run_lengths_ok(g, o)) {
            continue;
        }
        if let Some(v) = dispatch_cost(inst, &on) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
