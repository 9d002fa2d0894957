//! Dense matrices over a [`Field`].
//!
//! Matrices are immutable values; every operation returns a fresh matrix.
//! Elimination pivots on the first nonzero entry of a column since there is
//! no magnitude to compare in a finite field.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Element, Field};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Element>, // row-major
    field: Field,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row = self.field.format_list(self.row(i));
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn new(field: &Field, rows: usize, cols: usize, entries: Vec<Element>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| !field.contains(e)) {
            return Err(Error::OutOfRange {
                value: format!("{:#x}", bad.bits()),
                m: field.degree(),
            });
        }
        Ok(Matrix {
            rows,
            cols,
            entries,
            field: field.clone(),
        })
    }

    /// Parses a row-major comma-separated hex list.
    pub fn from_hex(field: &Field, rows: usize, cols: usize, list: &str) -> Result<Self> {
        Matrix::new(field, rows, cols, field.parse_list(list)?)
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![Element::ZERO; rows * cols],
            field: field.clone(),
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = Element::ONE;
        }
        m
    }

    /// Builds a matrix entry by entry; `f` must return elements of `field`.
    pub(crate) fn from_fn(
        field: &Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Element,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix {
            rows,
            cols,
            entries,
            field: field.clone(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn entries(&self) -> &[Element] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Element {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Element] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    fn require_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.require_same_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = &self.field;
        Ok(Matrix::from_fn(f, self.rows, rhs.cols, |i, j| {
            (0..self.cols)
                .map(|k| f.mul(self.get(i, k), rhs.get(k, j)))
                .sum()
        }))
    }

    pub fn mul_vec(&self, v: &[Element]) -> Result<Vec<Element>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| f.mul(a, b)).sum())
            .collect())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    self.get(i, j)
                        == if i == j {
                            Element::ONE
                        } else {
                            Element::ZERO
                        }
                })
            })
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.require_square()?;
        let f = &self.field;
        let w = 2 * n;
        let mut aug = vec![Element::ZERO; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(self.row(i));
            aug[i * w + n + i] = Element::ONE;
        }
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !aug[r * w + col].is_zero())
                .ok_or(Error::Singular)?;
            if pivot != col {
                for k in 0..w {
                    aug.swap(pivot * w + k, col * w + k);
                }
            }
            let inv = f.inv(aug[col * w + col])?;
            for k in 0..w {
                aug[col * w + k] = f.mul(aug[col * w + k], inv);
            }
            for r in 0..n {
                let factor = aug[r * w + col];
                if r == col || factor.is_zero() {
                    continue;
                }
                for k in 0..w {
                    let v = f.mul(factor, aug[col * w + k]);
                    aug[r * w + k] += v;
                }
            }
        }
        Ok(Matrix::from_fn(f, n, n, |i, j| aug[i * w + n + j]))
    }

    /// Determinant by elimination. Row swaps need no sign fix in
    /// characteristic 2.
    pub fn det(&self) -> Result<Element> {
        let n = self.require_square()?;
        let mut buf = self.entries.clone();
        Ok(det_in_place(&self.field, &mut buf, n))
    }

    pub fn rank(&self) -> usize {
        let f = &self.field;
        let (rows, cols) = (self.rows, self.cols);
        let mut a = self.entries.clone();
        let mut rank = 0;
        for col in 0..cols {
            let Some(p) = (rank..rows).find(|&r| !a[r * cols + col].is_zero()) else {
                continue;
            };
            for k in 0..cols {
                a.swap(p * cols + k, rank * cols + k);
            }
            let inv = f.inv(a[rank * cols + col]).expect("pivot is nonzero");
            for r in rank + 1..rows {
                let factor = f.mul(a[r * cols + col], inv);
                if factor.is_zero() {
                    continue;
                }
                for k in col..cols {
                    let v = f.mul(factor, a[rank * cols + k]);
                    a[r * cols + k] += v;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    /// Selects the given rows and columns; both index sets must be strictly
    /// increasing and in bounds.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Matrix> {
        check_index_set(rows, self.rows, "row")?;
        check_index_set(cols, self.cols, "column")?;
        Ok(Matrix::from_fn(&self.field, rows.len(), cols.len(), |i, j| {
            self.get(rows[i], cols[j])
        }))
    }

    pub fn trace(&self) -> Result<Element> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self.get(i, i)).sum())
    }

    /// `D1 * self * D2` computed entrywise as `d_i * A[i,j] * e_j`.
    pub fn sandwich(&self, d1: &DiagonalMatrix, d2: &DiagonalMatrix) -> Result<Matrix> {
        if d1.len() != self.rows || d2.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "diagonals of length {} and {} around a {}x{} matrix",
                d1.len(),
                d2.len(),
                self.rows,
                self.cols
            )));
        }
        let f = &self.field;
        Ok(Matrix::from_fn(f, self.rows, self.cols, |i, j| {
            f.mul(f.mul(d1.get(i), self.get(i, j)), d2.get(j))
        }))
    }
}

fn check_index_set(idx: &[usize], bound: usize, what: &str) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::BadIndex(format!("empty {what} set")));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadIndex(format!("{what} indices {idx:?} not strictly increasing")));
    }
    if idx[idx.len() - 1] >= bound {
        return Err(Error::BadIndex(format!("{what} index {} out of 0..{bound}", idx[idx.len() - 1])));
    }
    Ok(())
}

/// Determinant of the `n x n` row-major matrix in `buf`, destroying it.
pub(crate) fn det_in_place(f: &Field, buf: &mut [Element], n: usize) -> Element {
    let mut det = Element::ONE;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !buf[r * n + col].is_zero()) else {
            return Element::ZERO;
        };
        if p != col {
            for k in col..n {
                buf.swap(p * n + k, col * n + k);
            }
        }
        let pivot = buf[col * n + col];
        det = f.mul(det, pivot);
        let inv = f.inv(pivot).expect("pivot is nonzero");
        for r in col + 1..n {
            let factor = f.mul(buf[r * n + col], inv);
            if factor.is_zero() {
                continue;
            }
            for k in col + 1..n {
                let v = f.mul(factor, buf[col * n + k]);
                buf[r * n + k] += v;
            }
        }
    }
    det
}

/// `diagonal(d_0, ..., d_{n-1})` with implicit zero off-diagonals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiagonalMatrix {
    diag: Vec<Element>,
    field: Field,
}

impl DiagonalMatrix {
    pub fn new(field: &Field, diag: Vec<Element>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::DimensionMismatch("empty diagonal".into()));
        }
        if let Some(bad) = diag.iter().find(|&&e| !field.contains(e)) {
            return Err(Error::OutOfRange {
                value: format!("{:#x}", bad.bits()),
                m: field.degree(),
            });
        }
        Ok(DiagonalMatrix {
            diag,
            field: field.clone(),
        })
    }

    pub fn from_hex(field: &Field, list: &str) -> Result<Self> {
        DiagonalMatrix::new(field, field.parse_list(list)?)
    }

    pub fn scalar(field: &Field, c: Element, n: usize) -> Self {
        DiagonalMatrix {
            diag: vec![c; n],
            field: field.clone(),
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        DiagonalMatrix::scalar(field, Element::ONE, n)
    }

    pub(crate) fn from_vec_unchecked(field: &Field, diag: Vec<Element>) -> Self {
        DiagonalMatrix {
            diag,
            field: field.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize) -> Element {
        self.diag[i]
    }

    pub fn entries(&self) -> &[Element] {
        &self.diag
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_nonsingular(&self) -> bool {
        self.diag.iter().all(|d| !d.is_zero())
    }

    pub fn trace(&self) -> Element {
        self.diag.iter().sum()
    }

    /// Entrywise `k`-th power.
    pub fn power(&self, k: u64) -> DiagonalMatrix {
        let diag = self.diag.iter().map(|&d| self.field.pow(d, k)).collect();
        DiagonalMatrix::from_vec_unchecked(&self.field, diag)
    }

    pub fn scale(&self, c: Element) -> DiagonalMatrix {
        let diag = self.diag.iter().map(|&d| self.field.mul(c, d)).collect();
        DiagonalMatrix::from_vec_unchecked(&self.field, diag)
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.diag.len();
        Matrix::from_fn(&self.field, n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else {
                Element::ZERO
            }
        })
    }
}
