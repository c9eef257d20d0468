//! COO ingestion, CSR storage, sparse matrix-vector product and matrix
//! sketch statistics.
//!
//! CSR uses three arrays: `values` (AA), `col_idx` (JA) and `row_ptr` (IA).
//! Indices are zero-based in memory; [`CsrMatrix::ia_one_based`] and
//! [`CsrMatrix::ja_one_based`] render the Fortran-style arrays where row `i`
//! spans `IA(i) .. IA(i+1) - 1` and `IA(n+1) = nz + 1`.

mod dump;
mod market;

pub use dump::{read_csr_binary, write_csr_binary};
pub use market::{read_matrix_market, read_matrix_market_from, write_matrix_market, write_matrix_market_to};

use rayon::prelude::*;

use crate::cnum::{cadd, cmul, Cplx, ZERO};
use crate::error::{Error, Result};
use crate::vecops::ZVector;

const PAR_MIN_ROWS: usize = 1 << 14;

/// Coordinate-format matrix. Duplicate coordinates are allowed and are summed
/// when converting to CSR.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CooMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, Cplx)>,
}

impl CooMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        CooMatrix {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn push(&mut self, row: usize, col: usize, value: Cplx) {
        self.entries.push((row, col, value));
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_csr(&self) -> Result<CsrMatrix> {
        coo_to_csr(self)
    }
}

/// Compressed sparse row matrix. Immutable once built; within each row the
/// column indices are strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Cplx>,
}

/// Converts COO to CSR: entries are sorted by `(row, col)`, duplicates are
/// summed, and zeros produced by summation are kept in the pattern.
pub fn coo_to_csr(m: &CooMatrix) -> Result<CsrMatrix> {
    for (k, &(i, j, _)) in m.entries.iter().enumerate() {
        if i >= m.n_rows || j >= m.n_cols {
            return Err(Error::Format(format!(
                "entry {k} at ({i}, {j}) outside {}x{} matrix",
                m.n_rows, m.n_cols
            )));
        }
    }

    // counting sort by row, stable in input order
    let mut counts = vec![0usize; m.n_rows + 1];
    for &(i, _, _) in &m.entries {
        counts[i + 1] += 1;
    }
    for i in 0..m.n_rows {
        counts[i + 1] += counts[i];
    }
    let mut next = counts.clone();
    let mut by_row = vec![(0usize, ZERO); m.entries.len()];
    for &(i, j, v) in &m.entries {
        by_row[next[i]] = (j, v);
        next[i] += 1;
    }

    let mut row_ptr = Vec::with_capacity(m.n_rows + 1);
    let mut col_idx = Vec::with_capacity(m.entries.len());
    let mut values = Vec::with_capacity(m.entries.len());
    row_ptr.push(0);
    for i in 0..m.n_rows {
        let row = &mut by_row[counts[i]..counts[i + 1]];
        row.sort_by_key(|&(j, _)| j);
        for &(j, v) in row.iter() {
            match col_idx.last() {
                Some(&last) if col_idx.len() > row_ptr[i] && last == j => {
                    let acc = values.last_mut().expect("values tracks col_idx");
                    *acc = cadd(*acc, v);
                }
                _ => {
                    col_idx.push(j);
                    values.push(v);
                }
            }
        }
        row_ptr.push(col_idx.len());
    }

    Ok(CsrMatrix {
        n_rows: m.n_rows,
        n_cols: m.n_cols,
        row_ptr,
        col_idx,
        values,
    })
}

impl CsrMatrix {
    /// Builds a matrix from zero-based arrays, checking every CSR invariant.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<Cplx>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::Format(format!(
                "row pointer has {} entries, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if col_idx.len() != values.len() {
            return Err(Error::Format(format!(
                "{} column indices but {} values",
                col_idx.len(),
                values.len()
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != values.len() {
            return Err(Error::Format(format!(
                "row pointer must run from 0 to nz={}",
                values.len()
            )));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::Format(format!("row pointer decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.iter().any(|&j| j >= n_cols) {
                return Err(Error::Format(format!("column index out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_from(&vec![Cplx::real(1.0); n])
    }

    pub fn diagonal_from(diag: &[Cplx]) -> Self {
        let n = diag.len();
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
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

    /// Square dimension `h`; for rectangular matrices this is the row count.
    pub fn n(&self) -> usize {
        self.n_rows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// IA, zero-based.
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    /// JA, zero-based.
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// AA.
    pub fn values(&self) -> &[Cplx] {
        &self.values
    }

    pub fn ia_one_based(&self) -> Vec<usize> {
        self.row_ptr.iter().map(|&p| p + 1).collect()
    }

    pub fn ja_one_based(&self) -> Vec<usize> {
        self.col_idx.iter().map(|&j| j + 1).collect()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[Cplx]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Stored value at `(i, j)`, or `None` outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<Cplx> {
        if i >= self.n_rows {
            return None;
        }
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// Main diagonal, with zero where the pattern has no diagonal entry.
    pub fn diagonal(&self) -> Vec<Cplx> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i).unwrap_or(ZERO))
            .collect()
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut coo = CooMatrix::new(self.n_rows, self.n_cols);
        coo.entries.reserve(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                coo.entries.push((i, j, v));
            }
        }
        coo
    }

    /// Same pattern with every value transformed by `f`.
    pub fn map_values(&self, f: impl Fn(Cplx) -> Cplx) -> CsrMatrix {
        CsrMatrix {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    fn row_dot(&self, i: usize, x: &[Cplx]) -> Cplx {
        let mut acc = ZERO;
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc = cadd(acc, cmul(self.values[k], x[self.col_idx[k]]));
        }
        acc
    }

    /// `y = A x`, overwriting `y`. Each output element is an independent
    /// left-to-right row sum, so row-parallel and sequential execution agree
    /// bit for bit.
    pub fn spmv_into(&self, x: &[Cplx], y: &mut [Cplx]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::dim("spmv", self.n_cols, x.len()));
        }
        if y.len() != self.n_rows {
            return Err(Error::dim("spmv", self.n_rows, y.len()));
        }
        if self.n_rows >= PAR_MIN_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            self.spmv_sequential_into(x, y);
        }
        Ok(())
    }

    pub(crate) fn spmv_sequential_into(&self, x: &[Cplx], y: &mut [Cplx]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }

    pub fn spmv(&self, x: &[Cplx]) -> Result<ZVector> {
        let mut y = ZVector::zeros(self.n_rows);
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// Row-parallel SpMV regardless of size.
    pub fn spmv_parallel(&self, x: &[Cplx]) -> Result<ZVector> {
        if x.len() != self.n_cols {
            return Err(Error::dim("spmv", self.n_cols, x.len()));
        }
        let mut y = ZVector::zeros(self.n_rows);
        y.par_iter_mut()
            .enumerate()
            .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        Ok(y)
    }

    /// Single-threaded SpMV regardless of size.
    pub fn spmv_sequential(&self, x: &[Cplx]) -> Result<ZVector> {
        if x.len() != self.n_cols {
            return Err(Error::dim("spmv", self.n_cols, x.len()));
        }
        let mut y = ZVector::zeros(self.n_rows);
        self.spmv_sequential_into(x, &mut y);
        Ok(y)
    }

    pub fn stats(&self) -> MatrixStats {
        stats(self)
    }
}

/// Sketch of a sparse matrix: size, fill, bandwidth and row-density spread.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixStats {
    pub h: usize,
    pub nz: usize,
    /// Percent of entries stored, `100 * nz / h^2`.
    pub density: f64,
    /// Largest `|i - j|` over stored entries.
    pub bandwidth: usize,
    pub upper_bandwidth: usize,
    pub lower_bandwidth: usize,
    pub max_row: usize,
    pub nz_per_h: f64,
    /// Population standard deviation of per-row nonzero counts.
    pub nz_per_h_stddev: f64,
}

pub fn stats(a: &CsrMatrix) -> MatrixStats {
    let h = a.n_rows;
    let nz = a.nnz();
    let mut upper = 0usize;
    let mut lower = 0usize;
    let mut max_row = 0usize;
    for i in 0..h {
        let (cols, _) = a.row(i);
        max_row = max_row.max(cols.len());
        if let (Some(&first), Some(&last)) = (cols.first(), cols.last()) {
            if first < i {
                lower = lower.max(i - first);
            }
            if last > i {
                upper = upper.max(last - i);
            }
        }
    }
    let (mean, stddev) = if h == 0 {
        (0.0, 0.0)
    } else {
        let mean = nz as f64 / h as f64;
        let var = (0..h)
            .map(|i| {
                let d = a.row_nnz(i) as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / h as f64;
        (mean, var.sqrt())
    };
    let density = if h == 0 {
        0.0
    } else {
        100.0 * nz as f64 / (h as f64 * a.n_cols as f64)
    };
    MatrixStats {
        h,
        nz,
        density,
        bandwidth: upper.max(lower),
        upper_bandwidth: upper,
        lower_bandwidth: lower,
        max_row,
        nz_per_h: mean,
        nz_per_h_stddev: stddev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> Cplx {
        Cplx::real(v)
    }

    /// The 5x5 worked example, entered in scrambled order.
    fn example_5x5() -> CooMatrix {
        let mut m = CooMatrix::square(5);
        let entries = [
            (4, 4, 7.0),
            (0, 1, 14.0),
            (3, 4, -1.0),
            (0, 0, 3.0),
            (1, 2, 1.0),
            (2, 0, 2.0),
            (1, 1, 8.0),
            (3, 1, 4.0),
            (2, 2, 6.0),
            (3, 3, 2.0),
            (4, 2, 9.0),
        ];
        for (i, j, v) in entries {
            m.push(i, j, r(v));
        }
        m
    }

    #[test]
    fn worked_example_arrays() {
        let a = coo_to_csr(&example_5x5()).unwrap();
        let aa: Vec<f64> = a.values().iter().map(|z| z.re).collect();
        assert_eq!(aa, [3.0, 14.0, 8.0, 1.0, 2.0, 6.0, 4.0, 2.0, -1.0, 9.0, 7.0]);
        assert_eq!(a.ja_one_based(), [1, 2, 2, 3, 1, 3, 2, 4, 5, 3, 5]);
        assert_eq!(a.ia_one_based(), [1, 3, 5, 7, 10, 12]);
        assert_eq!(a.ia_one_based()[5], a.nnz() + 1);
    }

    #[test]
    fn empty_matrix() {
        let a = coo_to_csr(&CooMatrix::square(3)).unwrap();
        assert!(a.values().is_empty());
        assert!(a.col_idx().is_empty());
        assert_eq!(a.row_ptr(), [0, 0, 0, 0]);
    }

    #[test]
    fn duplicates_are_summed_and_cancellation_kept() {
        let mut m = CooMatrix::square(2);
        m.push(0, 0, r(1.0));
        m.push(0, 0, r(1.0));
        m.push(1, 0, Cplx::new(1.0, 2.0));
        m.push(1, 0, Cplx::new(-1.0, -2.0));
        let a = coo_to_csr(&m).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), Some(r(2.0)));
        assert_eq!(a.get(1, 0), Some(ZERO));
    }

    #[test]
    fn out_of_range_entry_is_format_error() {
        let mut m = CooMatrix::square(2);
        m.push(0, 2, r(1.0));
        assert!(matches!(coo_to_csr(&m), Err(Error::Format(_))));
    }

    #[test]
    fn rectangular_conversion() {
        let mut m = CooMatrix::new(2, 3);
        m.push(1, 2, r(5.0));
        m.push(0, 0, r(1.0));
        let a = coo_to_csr(&m).unwrap();
        assert_eq!(a.row_ptr(), [0, 1, 2]);
        let y = a.spmv(&[r(1.0), r(1.0), r(2.0)]).unwrap();
        assert_eq!(y.as_slice(), [r(1.0), r(10.0)]);
    }

    #[test]
    fn spmv_example() {
        let a = coo_to_csr(&example_5x5()).unwrap();
        let y = a.spmv(&ZVector::filled(5, r(1.0))).unwrap();
        let expected = [17.0, 9.0, 8.0, 5.0, 16.0].map(r);
        assert_eq!(y.as_slice(), expected);
        assert!(matches!(a.spmv(&ZVector::zeros(4)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn spmv_empty_row() {
        let mut m = CooMatrix::square(3);
        m.push(0, 0, r(1.0));
        m.push(2, 1, r(4.0));
        let a = m.to_csr().unwrap();
        let y = a.spmv(&ZVector::filled(3, Cplx::new(1.0, 1.0))).unwrap();
        assert_eq!(y[1], ZERO);
    }

    #[test]
    fn stats_identity_and_example() {
        let s = stats(&CsrMatrix::identity(4));
        assert_eq!((s.nz, s.max_row, s.bandwidth), (4, 1, 0));
        assert_eq!(s.nz_per_h_stddev, 0.0);
        assert_eq!(s.density, 25.0);

        let s = stats(&coo_to_csr(&example_5x5()).unwrap());
        assert_eq!(s.nz, 11);
        assert!((s.nz_per_h - 2.2).abs() < 1e-15);
        assert_eq!(s.max_row, 3);
        assert_eq!(s.bandwidth, 2);
        // row counts 2,2,2,3,2: population variance 0.16
        assert!((s.nz_per_h_stddev - 0.4).abs() < 1e-15);
    }

    #[test]
    fn from_parts_rejects_broken_invariants() {
        assert!(CsrMatrix::from_parts(2, 2, vec![0, 1, 2], vec![0, 1], vec![ZERO; 2]).is_ok());
        assert!(CsrMatrix::from_parts(2, 2, vec![0, 1], vec![0], vec![ZERO]).is_err());
        assert!(CsrMatrix::from_parts(2, 2, vec![0, 2, 1], vec![0, 1], vec![ZERO; 2]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 2], vec![1, 0], vec![ZERO; 2]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 2], vec![1, 1], vec![ZERO; 2]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 1], vec![2], vec![ZERO]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![1, 1], vec![0], vec![ZERO]).is_err());
    }

    #[test]
    fn diagonal_with_missing_entries() {
        let mut m = CooMatrix::square(3);
        m.push(0, 0, r(2.0));
        m.push(2, 2, r(3.0));
        m.push(1, 0, r(1.0));
        let d = m.to_csr().unwrap().diagonal();
        assert_eq!(d, vec![r(2.0), ZERO, r(3.0)]);
    }
}
