//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The basis is factorized by right-looking Gaussian elimination. Pivots are
//! chosen from the active column with the fewest entries, taking within that
//! column the entry with the sparsest row among those passing a threshold
//! test. Basis changes are appended as eta columns until the next
//! refactorization.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Relative threshold for accepting a pivot within its column.
const PIVOT_THRESHOLD: f64 = 0.01;
/// Absolute floor below which an entry is treated as zero when pivoting.
const SINGULAR_TOL: f64 = 1e-11;

struct Elimination {
    row: usize,
    /// (row, multiplier)
    lower: Vec<(usize, f64)>,
}

struct UpperRow {
    row: usize,
    col: usize,
    pivot: f64,
    /// (basis position, value) for positions pivoted later.
    rest: Vec<(usize, f64)>,
}

struct Eta {
    pos: usize,
    pivot: f64,
    /// (position, value) excluding `pos`.
    others: Vec<(usize, f64)>,
}

pub(crate) struct Factor {
    m: usize,
    lower: Vec<Elimination>,
    upper: Vec<UpperRow>,
    etas: Vec<Eta>,
}

/// Positions that could not be pivoted, and rows left without a pivot.
#[derive(Debug)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

impl Factor {
    /// Factorizes the `m × m` matrix whose column `p` is `cols[p]`.
    pub fn new(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<Factor, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut active: Vec<Vec<(usize, f64)>> = cols.to_vec();
        let mut row_pattern: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, col) in active.iter().enumerate() {
            for &(r, _) in col {
                row_pattern[r].push(p);
            }
        }
        let mut col_done = vec![false; m];
        let mut row_done = vec![false; m];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            active.iter().enumerate().map(|(p, c)| Reverse((c.len(), p))).collect();
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        let mut singular_positions = Vec::new();
        let mut slot = vec![usize::MAX; m];

        while let Some(Reverse((count, pc))) = heap.pop() {
            if col_done[pc] || active[pc].len() != count {
                continue;
            }
            let col_max = active[pc].iter().map(|e| e.1.abs()).fold(0.0, f64::max);
            if col_max <= SINGULAR_TOL {
                col_done[pc] = true;
                singular_positions.push(pc);
                for &(r, _) in &active[pc] {
                    row_pattern[r].retain(|&c| c != pc);
                }
                active[pc].clear();
                continue;
            }
            let threshold = (PIVOT_THRESHOLD * col_max).max(SINGULAR_TOL);
            let (pr, pv) = active[pc]
                .iter()
                .filter(|e| e.1.abs() >= threshold)
                .min_by_key(|e| (row_pattern[e.0].len(), e.0))
                .copied()
                .expect("column max passes threshold");

            col_done[pc] = true;
            row_done[pr] = true;
            let pivot_col = std::mem::take(&mut active[pc]);
            let multipliers: Vec<(usize, f64)> = pivot_col
                .iter()
                .filter(|e| e.0 != pr)
                .map(|&(r, v)| (r, v / pv))
                .collect();
            for &(r, _) in &pivot_col {
                row_pattern[r].retain(|&c| c != pc);
            }

            let row_cols = std::mem::take(&mut row_pattern[pr]);
            let mut rest = Vec::with_capacity(row_cols.len());
            for &j in &row_cols {
                let col = &mut active[j];
                let at = col.iter().position(|e| e.0 == pr).expect("pattern is exact");
                let (_, a_rj) = col.swap_remove(at);
                rest.push((j, a_rj));
                if !multipliers.is_empty() {
                    for (i, e) in col.iter().enumerate() {
                        slot[e.0] = i;
                    }
                    for &(r, l) in &multipliers {
                        let i = slot[r];
                        if i != usize::MAX {
                            col[i].1 -= l * a_rj;
                        } else {
                            col.push((r, -l * a_rj));
                            row_pattern[r].push(j);
                        }
                    }
                    for e in col.iter() {
                        slot[e.0] = usize::MAX;
                    }
                }
                heap.push(Reverse((col.len(), j)));
            }
            lower.push(Elimination {
                row: pr,
                lower: multipliers,
            });
            upper.push(UpperRow {
                row: pr,
                col: pc,
                pivot: pv,
                rest,
            });
        }

        if !singular_positions.is_empty() {
            singular_positions.sort_unstable();
            let rows = (0..m).filter(|&r| !row_done[r]).collect();
            return Err(Singular {
                positions: singular_positions,
                rows,
            });
        }
        Ok(Factor {
            m,
            lower,
            upper,
            etas: Vec::new(),
        })
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = rhs`. `rhs` is indexed by row, the result by position.
    pub fn ftran(&self, rhs: &mut [f64]) -> Vec<f64> {
        for e in &self.lower {
            let b = rhs[e.row];
            if b != 0.0 {
                for &(r, l) in &e.lower {
                    rhs[r] -= l * b;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for u in self.upper.iter().rev() {
            let mut v = rhs[u.row];
            for &(j, a) in &u.rest {
                v -= a * x[j];
            }
            x[u.col] = v / u.pivot;
        }
        for eta in &self.etas {
            let xr = x[eta.pos] / eta.pivot;
            x[eta.pos] = xr;
            if xr != 0.0 {
                for &(p, a) in &eta.others {
                    x[p] -= a * xr;
                }
            }
        }
        x
    }

    /// Solves `yᵀ B = cᵀ`. `c` is indexed by position, the result by row.
    pub fn btran(&self, c: &mut [f64]) -> Vec<f64> {
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for &(p, a) in &eta.others {
                v -= a * c[p];
            }
            c[eta.pos] = v / eta.pivot;
        }
        let mut y = vec![0.0; self.m];
        for u in &self.upper {
            let w = c[u.col] / u.pivot;
            y[u.row] = w;
            if w != 0.0 {
                for &(j, a) in &u.rest {
                    c[j] -= a * w;
                }
            }
        }
        for e in self.lower.iter().rev() {
            let mut v = y[e.row];
            for &(r, l) in &e.lower {
                v -= l * y[r];
            }
            y[e.row] = v;
        }
        y
    }

    /// Records that the column at `pos` was replaced by a column whose
    /// FTRAN image is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let others = alpha
            .iter()
            .enumerate()
            .filter(|&(p, a)| p != pos && a.abs() > 1e-14)
            .map(|(p, &a)| (p, a))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            others,
        });
    }
}
