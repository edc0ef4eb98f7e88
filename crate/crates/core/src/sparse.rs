//! Coordinate and compressed-column sparse matrices.

/// Coordinate-form sparse matrix. Entries are kept in insertion order and
/// may not repeat a (row, col) pair once built through [`CooMatrix::push`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CooMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        CooMatrix {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    /// Appends an entry; exact zeros are dropped.
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        if val != 0.0 {
            self.entries.push((row, col, val));
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `out[row] += Σ a[row, col] · x[col]`.
    pub fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
    }
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CscMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CscMatrix {
    /// Builds from triplets, summing duplicates and dropping zeros. Row
    /// indices within each column come out sorted.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n_cols + 1];
        for &(_, c, _) in triplets {
            counts[c + 1] += 1;
        }
        for c in 0..n_cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            rows[next[c]] = r;
            vals[next[c]] = v;
            next[c] += 1;
        }
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut out_vals = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for c in 0..n_cols {
            buf.clear();
            buf.extend((counts[c]..counts[c + 1]).map(|i| (rows[i], vals[i])));
            buf.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < buf.len() {
                let r = buf[i].0;
                let mut v = 0.0;
                while i < buf.len() && buf[i].0 == r {
                    v += buf[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    row_idx.push(r);
                    out_vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            vals: out_vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        self.col(j).map(|(r, v)| v * y[r]).sum()
    }

    /// `A x` for a dense `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (r, v) in self.col(j) {
                    out[r] += v * xj;
                }
            }
        }
        out
    }

    /// Triplets in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n_cols)
            .flat_map(|j| self.col(j).map(move |(r, v)| (r, j, v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csc_sums_duplicates_and_drops_zeros() {
        let m = CscMatrix::from_triplets(
            2,
            3,
            &[(1, 0, 1.0), (0, 0, 2.0), (1, 0, 3.0), (0, 2, 1.0), (0, 2, -1.0)],
        );
        assert_eq!(m.col_ptr, vec![0, 2, 2, 2]);
        assert_eq!(m.row_idx, vec![0, 1]);
        assert_eq!(m.vals, vec![2.0, 4.0]);
        assert_eq!(m.mul_vec(&[1.0, 5.0, 7.0]), vec![2.0, 4.0]);
    }
}
