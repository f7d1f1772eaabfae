//! Symmetric matrix storage shared by the graph, spectral and solver modules.
//!
//! [`SparseSym`] is a CSR matrix holding both triangles, built through
//! [`SymBuilder`] so symmetry holds by construction. [`SymMatrix`] wraps
//! either a sparse or a dense matrix; perturbed Laplacians can be either.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Minimal interface the iterative algorithms need.
pub trait SymOperator {
    fn dim(&self) -> usize;

    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn diagonal(&self) -> Vec<f64>;

    /// Per-row sum of absolute off-diagonal entries.
    fn offdiag_abs_sums(&self) -> Vec<f64>;

    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// `xᵀ A x`
    fn quad_form(&self, x: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        x.iter().zip(&ax).map(|(a, b)| a * b).sum()
    }
}

/// Accumulates symmetric entries; `push(i, j, v)` with `i != j` writes both
/// `(i, j)` and `(j, i)`. Repeated pushes to the same entry are summed.
#[derive(Debug, Clone)]
pub struct SymBuilder {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SymBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) -> &mut Self {
        *self.rows[i].entry(j).or_insert(0.0) += v;
        if i != j {
            *self.rows[j].entry(i).or_insert(0.0) += v;
        }
        self
    }

    pub fn build(self) -> SparseSym {
        let n = self.rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in self.rows {
            for (j, v) in row {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSym {
            n,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Symmetric sparse matrix in CSR form (both triangles stored, columns sorted).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn zeros(n: usize) -> Self {
        SymBuilder::new(n).build()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = SymBuilder::new(n);
        for i in 0..n {
            b.push(i, i, 1.0);
        }
        b.build()
    }

    /// Copies the entries of a dense matrix whose magnitude exceeds `drop_tol`.
    /// The input must be symmetric.
    pub fn from_dense(a: &DMatrix<f64>, drop_tol: f64) -> Result<Self> {
        check_symmetric(a, 1e-10)?;
        let n = a.nrows();
        let mut b = SymBuilder::new(n);
        for i in 0..n {
            for j in i..n {
                let v = a[(i, j)];
                if v.abs() > drop_tol {
                    b.push(i, j, v);
                }
            }
        }
        Ok(b.build())
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[s..e].iter().copied().zip(self.vals[s..e].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[s..e].binary_search(&j) {
            Ok(k) => self.vals[s + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates over the upper triangle (including the diagonal) as `(i, j, v)`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i)
                .filter(move |&(j, _)| j >= i)
                .map(move |(j, v)| (i, j, v))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= c);
        out.drop_zeros()
    }

    /// `a·self + b·other`
    pub fn linear_combination(&self, a: f64, other: &SparseSym, b: f64) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut builder = SymBuilder::new(self.n);
        for (i, j, v) in self.upper_entries() {
            builder.push(i, j, a * v);
        }
        for (i, j, v) in other.upper_entries() {
            builder.push(i, j, b * v);
        }
        Ok(builder.build())
    }

    pub fn add_diagonal(&self, shift: f64) -> Self {
        let mut builder = SymBuilder::new(self.n);
        for (i, j, v) in self.upper_entries() {
            builder.push(i, j, v);
        }
        for i in 0..self.n {
            builder.push(i, i, shift);
        }
        builder.build()
    }

    /// Sparse product `self · self` (symmetric because `self` is).
    pub fn square(&self) -> Self {
        let mut builder = SymBuilder::new(self.n);
        for i in 0..self.n {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (k, a_ik) in self.row(i) {
                for (j, a_kj) in self.row(k) {
                    if j >= i {
                        *acc.entry(j).or_insert(0.0) += a_ik * a_kj;
                    }
                }
            }
            for (j, v) in acc {
                builder.push(i, j, v);
            }
        }
        builder.build()
    }

    fn drop_zeros(self) -> Self {
        let mut b = SymBuilder::new(self.n);
        for (i, j, v) in self.upper_entries() {
            b.push(i, j, v);
        }
        b.build()
    }

    /// Writes the upper triangle as `i j value` lines, 0-based ids.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "% symmetric {} {}", self.n, self.n)?;
        for (i, j, v) in self.upper_entries() {
            writeln!(w, "{i} {j} {v}")?;
        }
        Ok(())
    }

    /// Reads the coordinate format written by [`SparseSym::write_coordinate`].
    /// Entries may come from either triangle but each unordered pair must
    /// appear at most once. Without a `% symmetric n n` header the dimension
    /// is one past the largest index.
    pub fn read_coordinate<R: BufRead>(r: R) -> Result<Self> {
        let mut n_hint = None;
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line_no = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('%') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.first() == Some(&"symmetric") && toks.len() == 3 {
                    n_hint = Some(parse_usize(toks[1], line_no)?);
                }
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `i j value`, found {} fields", toks.len()),
                });
            }
            let i = parse_usize(toks[0], line_no)?;
            let j = parse_usize(toks[1], line_no)?;
            let v: f64 = toks[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid value `{}`", toks[2]),
            })?;
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate entry ({i}, {j})"),
                });
            }
            entries.push((key.0, key.1, v));
        }
        let max_idx = entries.iter().map(|&(_, j, _)| j + 1).max().unwrap_or(0);
        let n = n_hint.unwrap_or(max_idx);
        if max_idx > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: max_idx,
            });
        }
        let mut b = SymBuilder::new(n);
        for (i, j, v) in entries {
            b.push(i, j, v);
        }
        Ok(b.build())
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid index `{tok}`"),
    })
}

impl SymOperator for SparseSym {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    fn offdiag_abs_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum())
            .collect()
    }
}

impl SymOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        y.iter_mut().for_each(|v| *v = 0.0);
        // column-major storage: accumulate column by column
        for j in 0..n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let col = self.column(j);
            for i in 0..n {
                y[i] += col[i] * xj;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)]).collect()
    }

    fn offdiag_abs_sums(&self) -> Vec<f64> {
        let n = self.nrows();
        (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| self[(i, j)].abs()).sum())
            .collect()
    }
}

/// A symmetric matrix that is either sparse or dense.
#[derive(Debug, Clone)]
pub enum SymMatrix {
    Sparse(SparseSym),
    Dense(DMatrix<f64>),
}

impl SymMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymMatrix::Sparse(s) => s.to_dense(),
            SymMatrix::Dense(d) => d.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            SymMatrix::Sparse(s) => s.max_abs(),
            SymMatrix::Dense(d) => d.amax(),
        }
    }

    pub fn add_diagonal(&self, shift: f64) -> SymMatrix {
        match self {
            SymMatrix::Sparse(s) => SymMatrix::Sparse(s.add_diagonal(shift)),
            SymMatrix::Dense(d) => {
                let n = d.nrows();
                SymMatrix::Dense(d + DMatrix::identity(n, n) * shift)
            }
        }
    }

    /// `a·self + b·other`; stays sparse only when both operands are sparse.
    pub fn linear_combination(&self, a: f64, other: &SymMatrix, b: f64) -> Result<SymMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        match (self, other) {
            (SymMatrix::Sparse(x), SymMatrix::Sparse(y)) => {
                Ok(SymMatrix::Sparse(x.linear_combination(a, y, b)?))
            }
            _ => Ok(SymMatrix::Dense(self.to_dense() * a + other.to_dense() * b)),
        }
    }
}

impl From<SparseSym> for SymMatrix {
    fn from(s: SparseSym) -> Self {
        SymMatrix::Sparse(s)
    }
}

impl From<DMatrix<f64>> for SymMatrix {
    fn from(d: DMatrix<f64>) -> Self {
        SymMatrix::Dense(d)
    }
}

impl SymOperator for SymMatrix {
    fn dim(&self) -> usize {
        match self {
            SymMatrix::Sparse(s) => s.dim(),
            SymMatrix::Dense(d) => d.dim(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            SymMatrix::Sparse(s) => s.apply(x, y),
            SymMatrix::Dense(d) => d.apply(x, y),
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            SymMatrix::Sparse(s) => s.diagonal(),
            SymMatrix::Dense(d) => SymOperator::diagonal(d),
        }
    }

    fn offdiag_abs_sums(&self) -> Vec<f64> {
        match self {
            SymMatrix::Sparse(s) => s.offdiag_abs_sums(),
            SymMatrix::Dense(d) => d.offdiag_abs_sums(),
        }
    }
}

/// Fails unless `|a_ij - a_ji| <= tol · max(1, max|a|)` for all entries.
pub fn check_symmetric(a: &DMatrix<f64>, tol: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let n = a.nrows();
    let scale = a.amax().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > tol * scale {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SparseSym {
        let mut b = SymBuilder::new(3);
        b.push(0, 0, 1.0).push(1, 1, 2.0).push(2, 2, 1.0);
        b.push(0, 1, -1.0).push(1, 2, -1.0);
        b.build()
    }

    #[test]
    fn builder_mirrors_offdiagonal() {
        let m = path3();
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.nnz(), 7);
    }

    #[test]
    fn square_matches_dense_product() {
        let m = path3();
        let d = m.to_dense();
        assert_eq!(m.square().to_dense(), &d * &d);
    }

    #[test]
    fn dense_and_sparse_apply_agree() {
        let m = path3();
        let x = [0.3, -1.2, 2.0];
        assert_eq!(m.mul_vec(&x), m.to_dense().mul_vec(&x));
    }

    #[test]
    fn coordinate_roundtrip() {
        let m = path3();
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf).unwrap();
        let back = SparseSym::read_coordinate(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn coordinate_rejects_duplicates_and_garbage() {
        let dup = "0 1 1.0\n1 0 2.0\n";
        assert!(matches!(
            SparseSym::read_coordinate(dup.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = "0 1 x\n";
        assert!(matches!(
            SparseSym::read_coordinate(bad.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn non_symmetric_dense_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(check_symmetric(&a, 1e-10), Err(Error::NotSymmetric(_))));
    }
}
