//! Compressed sparse row storage and the handful of products the diffusion
//! kernel needs.
//!
//! Every constructor and operation returns matrices in canonical form:
//! column indices strictly increasing within a row and no stored zeros.
//! Entries are only ever removed when they are exactly `0.0` or when an
//! explicit [`CsrMatrix::threshold`] drops them.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_vec(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::input(format!(
                "dense matrix {n_rows}x{n_cols} needs {} values, got {}",
                n_rows * n_cols,
                values.len()
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::input("ragged rows in dense matrix"));
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            values: rows.concat(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.n_cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    /// Dense-sparse product `self * rhs`.
    pub fn matmul_sparse(&self, rhs: &CsrMatrix) -> Result<DenseMatrix> {
        if self.n_cols != rhs.n_rows() {
            return Err(Error::input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows,
                self.n_cols,
                rhs.n_rows(),
                rhs.n_cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_rows, rhs.n_cols());
        for i in 0..self.n_rows {
            let out_row = &mut out.values[i * rhs.n_cols()..(i + 1) * rhs.n_cols()];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let (cols, vals) = rhs.row(k);
                for (&c, &b) in cols.iter().zip(vals) {
                    out_row[c] += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Count of entries that are not exactly zero.
    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

/// Compressed sparse row matrix of `f64` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a canonical matrix from `(row, col, value)` triplets in any
    /// order. Zero values are dropped; duplicate coordinates are rejected.
    pub fn from_triplets(
        triplets: &[(usize, usize, f64)],
        n_rows: usize,
        n_cols: usize,
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::input(format!(
                    "triplet ({r}, {c}) out of range for {n_rows}x{n_cols} matrix"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = sorted
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::input(format!(
                "duplicate coordinate ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            if v != 0.0 {
                row_offsets[r + 1] += 1;
                col_indices.push(c);
                values.push(v);
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles a matrix from raw CSR arrays, validating canonical form.
    pub fn from_raw(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Copies the non-zero entries of a dense matrix.
    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut row_offsets = Vec::with_capacity(dense.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..dense.n_rows {
            for (c, &v) in dense.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            n_rows: dense.n_rows,
            n_cols: dense.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Checks every canonical-form invariant.
    pub fn validate(&self) -> Result<()> {
        if self.row_offsets.len() != self.n_rows + 1 {
            return Err(Error::input("row_offsets length must be n_rows + 1"));
        }
        if self.row_offsets[0] != 0 {
            return Err(Error::input("row_offsets[0] must be 0"));
        }
        if self.row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("row_offsets must be non-decreasing"));
        }
        let nnz = self.row_offsets[self.n_rows];
        if nnz != self.values.len() || nnz != self.col_indices.len() {
            return Err(Error::input("row_offsets end must equal stored entry count"));
        }
        for i in 0..self.n_rows {
            let cols = &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= self.n_cols) {
                return Err(Error::input(format!("row {i}: column index out of range")));
            }
        }
        if self.values.contains(&0.0) {
            return Err(Error::input("explicit zero stored"));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values stored in `row`.
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().sum())
            .collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row(row);
        cols.binary_search(&col).map_or(0.0, |k| vals[k])
    }

    /// Largest stored value, or `None` for an empty matrix.
    pub fn max_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, c, v) in self.iter() {
            d.set(i, c, v);
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, c, v) in self.iter() {
            let slot = next[c];
            col_indices[slot] = i;
            values[slot] = v;
            next[c] += 1;
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Applies `f` to every stored value; results equal to zero are dropped.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        self.filter_map(|i, c, v| Some(f(i, c, v)))
    }

    fn filter_map(&self, mut f: impl FnMut(usize, usize, f64) -> Option<f64>) -> Self {
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(out) = f(i, c, v).filter(|x| *x != 0.0) {
                    col_indices.push(c);
                    values.push(out);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Keeps entries with `value >= t` and drops the rest.
    pub fn threshold(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::input(format!("threshold must be >= 0, got {t}")));
        }
        Ok(self.filter_map(|_, _, v| (v >= t).then_some(v)))
    }

    /// Sparse-sparse product by row-wise accumulation (Gustavson).
    pub fn matmul(&self, rhs: &CsrMatrix) -> Result<CsrMatrix> {
        let mut workspace = RowAccumulator::new(rhs.n_cols);
        self.matmul_with(rhs, &mut workspace)
    }

    /// As [`CsrMatrix::matmul`], reusing a caller-owned accumulator row.
    pub fn matmul_with(
        &self,
        rhs: &CsrMatrix,
        workspace: &mut RowAccumulator,
    ) -> Result<CsrMatrix> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
            )));
        }
        workspace.resize(rhs.n_cols);
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let (a_cols, a_vals) = self.row(i);
            for (&k, &a) in a_cols.iter().zip(a_vals) {
                let (b_cols, b_vals) = rhs.row(k);
                for (&c, &b) in b_cols.iter().zip(b_vals) {
                    workspace.add(c, a * b);
                }
            }
            workspace.drain_into(&mut col_indices, &mut values);
            row_offsets.push(values.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: rhs.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Sparse-dense product.
    pub fn matmul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != x.n_rows {
            return Err(Error::input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, x.n_rows, x.n_cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_rows, x.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let out_row = out.row_mut(i);
            for (&k, &a) in cols.iter().zip(vals) {
                for (o, &xv) in out_row.iter_mut().zip(x.row(k)) {
                    *o += a * xv;
                }
            }
        }
        Ok(out)
    }
}

/// Dense scratch row used by the Gustavson product. Holds one value slot per
/// output column plus the list of columns touched in the current row.
#[derive(Debug, Default)]
pub struct RowAccumulator {
    acc: Vec<f64>,
    occupied: Vec<bool>,
    touched: Vec<usize>,
}

impl RowAccumulator {
    pub fn new(width: usize) -> Self {
        Self {
            acc: vec![0.0; width],
            occupied: vec![false; width],
            touched: Vec::new(),
        }
    }

    /// Number of value slots held by the scratch row.
    pub fn width(&self) -> usize {
        self.acc.len()
    }

    fn resize(&mut self, width: usize) {
        if self.acc.len() < width {
            self.acc.resize(width, 0.0);
            self.occupied.resize(width, false);
        }
    }

    #[inline]
    fn add(&mut self, col: usize, value: f64) {
        if !self.occupied[col] {
            self.occupied[col] = true;
            self.touched.push(col);
        }
        self.acc[col] += value;
    }

    fn drain_into(&mut self, cols: &mut Vec<usize>, vals: &mut Vec<f64>) {
        self.touched.sort_unstable();
        for &c in &self.touched {
            let v = self.acc[c];
            if v != 0.0 {
                cols.push(c);
                vals.push(v);
            }
            self.acc[c] = 0.0;
            self.occupied[c] = false;
        }
        self.touched.clear();
    }
}
