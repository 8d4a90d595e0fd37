//! Compressed sparse row matrices with a fixed, presorted pattern.
//!
//! The pattern is built once from mesh adjacency and entries are
//! scatter-added into it, so assembly order never changes the stored layout.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a zero matrix over the given pattern. `neighbors[i]` lists the
    /// column indices of row `i` (need not be sorted or deduplicated; the
    /// diagonal is always included).
    pub fn from_pattern(n: usize, neighbors: &[Vec<usize>]) -> Result<Self> {
        if neighbors.len() != n {
            return Err(Error::InvalidInput(format!(
                "pattern has {} rows, expected {n}",
                neighbors.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, row) in neighbors.iter().enumerate() {
            let mut cols: Vec<usize> = row.iter().copied().chain(std::iter::once(i)).collect();
            cols.sort_unstable();
            cols.dedup();
            if let Some(&bad) = cols.iter().find(|&&c| c >= n) {
                return Err(Error::InvalidInput(format!(
                    "column {bad} out of range in row {i}"
                )));
            }
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Ok(CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        })
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn entry_index(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    /// Adds `v` to entry `(i, j)`. The position must exist in the pattern.
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        match self.entry_index(i, j) {
            Some(k) => {
                self.values[k] += v;
                Ok(())
            }
            None => Err(Error::InvalidInput(format!(
                "entry ({i}, {j}) not in sparsity pattern"
            ))),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entry_index(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Overwrites entry `(i, j)`; the position must exist in the pattern.
    pub fn set_at(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        match self.entry_index(i, j) {
            Some(k) => {
                self.values[k] = v;
                Ok(())
            }
            None => Err(Error::InvalidInput(format!(
                "entry ({i}, {j}) not in sparsity pattern"
            ))),
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest relative asymmetry max |a_ij - a_ji| / max |a_ij|.
    pub fn asymmetry(&self) -> f64 {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if j > i {
                    worst = worst.max((self.values[k] - self.get(j, i)).abs());
                }
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                dense[i][self.col_idx[k]] = self.values[k];
            }
        }
        dense
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting on a dense
/// copy. Meant for small reference systems in tests and cross-checks.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() == 0.0 {
            return Err(Error::DegenerateGeometry("singular dense system".into()));
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}
