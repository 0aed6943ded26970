//! Compressed sparse row matrices: just enough for operator assembly,
//! matrix–vector products and symmetrization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; duplicates are summed
    /// and explicit zeros dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                debug_assert!(j < cols);
                if last == Some(j) {
                    *values.last_mut().expect("entry") += v;
                } else {
                    indices.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            indptr.push(indices.len());
        }
        let mut m = Self {
            rows: n,
            cols,
            indptr,
            indices,
            values,
        };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        indptr.push(0);
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                if self.values[p] != 0.0 {
                    indices.push(self.indices[p]);
                    values.push(self.values[p]);
                }
            }
            indptr.push(indices.len());
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_rows(d.len(), d.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect())
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self::from_rows(m.ncols(), rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(p) => self.values[span.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        exec::map_range(self.rows, |i| self.row(i).map(|(j, v)| v * x[j]).sum())
    }

    /// `y = A X` for a dense block `X` (columns are independent vectors).
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(x.nrows(), self.cols);
        let k = x.ncols();
        let rows: Vec<Vec<f64>> = exec::map_range(self.rows, |i| {
            let mut acc = vec![0.0; k];
            for (j, v) in self.row(i) {
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += v * x[(j, c)];
                }
            }
            acc
        });
        DMatrix::from_fn(self.rows, k, |i, c| rows[i][c])
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        Self::from_rows(self.rows, rows)
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{}×{}", self.rows, self.cols),
                got: format!("{}×{}", other.rows, other.cols),
            });
        }
        let rows = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .map(|(j, v)| (j, a * v))
                    .chain(other.row(i).map(|(j, v)| (j, b * v)))
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(self.cols, rows))
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.values[p] *= left[i] * right[self.indices[p]];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Upper bound on the spectral norm: `sqrt(‖A‖₁ ‖A‖_∞)`.
    pub fn norm_bound(&self) -> f64 {
        let mut colsum = vec![0.0; self.cols];
        let mut rowmax: f64 = 0.0;
        for i in 0..self.rows {
            let mut s = 0.0;
            for (j, v) in self.row(i) {
                s += v.abs();
                colsum[j] += v.abs();
            }
            rowmax = rowmax.max(s);
        }
        (rowmax * colsum.iter().fold(0.0f64, |a, &b| a.max(b))).sqrt()
    }

    /// `max |A_ij - A_ji| / max |A_ij|`.
    pub fn relative_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let d = self.lincomb(1.0, &t, -1.0).expect("square");
        let big = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diff = d.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if big == 0.0 {
            0.0
        } else {
            diff / big
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembly_sums_duplicates_and_drops_zeros() {
        let m = CsrMatrix::from_rows(3, vec![vec![(2, 1.0), (0, 2.0), (2, 0.5)], vec![(1, 0.0)], vec![]]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 2), 1.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![5.0, 0.0, 0.0]);
    }

    #[test]
    fn transpose_and_dense_round_trip() {
        let d = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let m = CsrMatrix::from_dense(&d);
        assert_eq!(m.to_dense(), d);
        assert_eq!(m.transpose().to_dense(), d.transpose());
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.mul_dense(&x), &d * &x);
    }

    #[test]
    fn symmetric_part_is_symmetric() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 5.0, 3.0]);
        let m = CsrMatrix::from_dense(&d);
        assert!(m.relative_asymmetry() > 0.5);
        let s = m.lincomb(0.5, &m.transpose(), 0.5).unwrap();
        assert_eq!(s.relative_asymmetry(), 0.0);
        assert!(s.norm_bound() >= 3.5 - 1e-12);
    }
}
