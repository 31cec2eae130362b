//! Dense matrices over `L` with valuation-pivoted elimination.
//!
//! Subspaces of `L^d` are represented by matrices whose columns form a basis;
//! the zero subspace is a `d x 0` matrix.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::padic::{FieldElement, LocalFieldDesc};

#[derive(Clone)]
pub struct Matrix {
    desc: Arc<LocalFieldDesc>,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(desc: &Arc<LocalFieldDesc>, rows: usize, cols: usize) -> Self {
        Matrix {
            desc: desc.clone(),
            rows,
            cols,
            data: vec![FieldElement::zero(desc); rows * cols],
        }
    }

    pub fn identity(desc: &Arc<LocalFieldDesc>, n: usize) -> Self {
        Self::diagonal(desc, &vec![FieldElement::one(desc); n])
    }

    pub fn diagonal(desc: &Arc<LocalFieldDesc>, diag: &[FieldElement]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(desc, n, n);
        for (i, x) in diag.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn scalar(desc: &Arc<LocalFieldDesc>, n: usize, x: &FieldElement) -> Self {
        Self::diagonal(desc, &vec![x.clone(); n])
    }

    /// Build from rows; all rows must have equal length.
    pub fn from_rows(desc: &Arc<LocalFieldDesc>, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        let data: Vec<FieldElement> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| **x.desc() != **desc) {
            return Err(Error::FieldMismatch);
        }
        Ok(Matrix {
            desc: desc.clone(),
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_ints(desc: &Arc<LocalFieldDesc>, rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| FieldElement::from_int(desc, x))
                    .collect()
            })
            .collect();
        Self::from_rows(desc, rows).expect("integer rows")
    }

    /// Matrix whose columns are the given vectors (length `d` each).
    pub fn from_columns(
        desc: &Arc<LocalFieldDesc>,
        d: usize,
        cols: &[Vec<FieldElement>],
    ) -> Result<Self> {
        let mut m = Self::zeros(desc, d, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "column {j} has length {}, expected {d}",
                    col.len()
                )));
            }
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn desc(&self) -> &Arc<LocalFieldDesc> {
        &self.desc
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

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<FieldElement>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<FieldElement> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut m = Self::zeros(&self.desc, self.rows, idx.len());
        for (k, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                m.set(i, k, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Self::zeros(&self.desc, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut m = Self::zeros(&self.desc, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(m)
    }

    fn check_compatible(&self, other: &Matrix) -> Result<()> {
        if Arc::ptr_eq(&self.desc, &other.desc) || *self.desc == *other.desc {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_compatible(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = Self::zeros(&self.desc, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = FieldElement::zero(&self.desc);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_literal_zero() || b.is_literal_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                m.set(i, j, acc);
            }
        }
        Ok(m)
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Matrix,
        f: impl Fn(&FieldElement, &FieldElement) -> FieldElement,
    ) -> Result<Matrix> {
        self.check_compatible(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Matrix {
            desc: self.desc.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, x: &FieldElement) -> Matrix {
        self.map(|a| a * x)
    }

    pub fn map(&self, f: impl Fn(&FieldElement) -> FieldElement) -> Matrix {
        Matrix {
            desc: self.desc.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn apply(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let col = Matrix::from_columns(&self.desc, v.len(), &[v.to_vec()])?;
        Ok(self.try_mul(&col)?.column(0))
    }

    /// Kronecker product; index `(a, b)` of the result is `a * other.rows + b`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut m = Self::zeros(&self.desc, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_literal_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        m
    }

    pub fn pow(&self, k: u32) -> Matrix {
        let mut r = Self::identity(&self.desc, self.rows);
        for _ in 0..k {
            r = r.try_mul(self).expect("square");
        }
        r
    }

    pub fn trace(&self) -> FieldElement {
        (0..self.rows.min(self.cols)).fold(FieldElement::zero(&self.desc), |acc, i| {
            &acc + self.get(i, i)
        })
    }

    /// True when every entry is zero, raising `PrecisionLoss` when that cannot
    /// be decided.
    pub fn decide_zero(&self) -> Result<bool> {
        for x in &self.data {
            if !x.decide_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Entrywise equality, decided at the zero guard.
    pub fn decide_eq(&self, other: &Matrix) -> Result<bool> {
        self.try_sub(other)?.decide_zero()
    }

    /// Reduced row echelon form with pivots chosen by minimal valuation.
    /// Returns the reduced matrix, pivot columns, and the determinant sign
    /// and pivot product accumulated on the first `det_cols` columns.
    fn rref_impl(&self, limit_cols: usize) -> Result<Echelon> {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut swaps = 0usize;
        let mut pivot_product = FieldElement::one(&self.desc);
        let mut row = 0;
        for col in 0..limit_cols {
            if row == a.rows {
                break;
            }
            let mut best: Option<(usize, crate::padic::Rational)> = None;
            for r in row..a.rows {
                if let Some(v) = a.get(r, col).known_valuation() {
                    if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                        best = Some((r, v));
                    }
                }
            }
            let Some((pr, _)) = best else {
                // no certified entry left: the column is zero below `row`, if decidable
                for r in row..a.rows {
                    a.get(r, col).decide_zero()?;
                    a.set(r, col, FieldElement::zero(&self.desc));
                }
                continue;
            };
            if pr != row {
                for j in 0..a.cols {
                    a.data.swap(pr * a.cols + j, row * a.cols + j);
                }
                swaps += 1;
            }
            let piv = a.get(row, col).clone();
            pivot_product = &pivot_product * &piv;
            let inv = piv.invert()?;
            for j in 0..a.cols {
                let x = a.get(row, j);
                if !x.is_literal_zero() {
                    let y = x * &inv;
                    a.set(row, j, y);
                }
            }
            a.set(row, col, FieldElement::one(&self.desc));
            for r in 0..a.rows {
                if r == row {
                    continue;
                }
                let factor = a.get(r, col).clone();
                if factor.is_literal_zero() {
                    continue;
                }
                for j in 0..a.cols {
                    let pj = a.get(row, j);
                    if pj.is_literal_zero() {
                        continue;
                    }
                    let y = a.get(r, j) - &(&factor * pj);
                    a.set(r, j, y);
                }
                a.set(r, col, FieldElement::zero(&self.desc));
            }
            pivots.push(col);
            row += 1;
        }
        Ok(Echelon {
            reduced: a,
            pivots,
            swaps,
            pivot_product,
        })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> Result<(Matrix, Vec<usize>)> {
        let e = self.rref_impl(self.cols)?;
        Ok((e.reduced, e.pivots))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref_impl(self.cols)?.pivots.len())
    }

    /// Determinant; a singular matrix yields the literal zero once the
    /// vanishing pivot column has been decided at the zero guard.
    pub fn det(&self) -> Result<FieldElement> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(
                "determinant of a non-square matrix".into(),
            ));
        }
        let e = self.rref_impl(self.cols)?;
        if e.pivots.len() < self.rows {
            return Ok(FieldElement::zero(&self.desc));
        }
        Ok(if e.swaps % 2 == 1 {
            -e.pivot_product
        } else {
            e.pivot_product
        })
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(&self.desc, n))?;
        let e = aug.rref_impl(n)?;
        if e.pivots.len() < n {
            return Err(Error::ZeroInput("singular matrix".into()));
        }
        Ok(e.reduced.select_columns(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// Basis of the right kernel, as columns.
    pub fn kernel(&self) -> Result<Matrix> {
        let (r, pivots) = self.rref()?;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Self::zeros(&self.desc, self.cols, free.len());
        for (t, &fc) in free.iter().enumerate() {
            k.set(fc, t, FieldElement::one(&self.desc));
            for (pr, &pc) in pivots.iter().enumerate() {
                let x = r.get(pr, fc);
                if !x.is_literal_zero() {
                    k.set(pc, t, -x);
                }
            }
        }
        Ok(k)
    }

    /// Some `X` with `self * X = rhs`, or `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &Matrix) -> Result<Option<Matrix>> {
        let aug = self.hstack(rhs)?;
        let e = aug.rref_impl(aug.cols)?;
        if e.pivots.iter().any(|&c| c >= self.cols) {
            return Ok(None);
        }
        let mut x = Self::zeros(&self.desc, self.cols, rhs.cols);
        for (pr, &pc) in e.pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(pc, j, e.reduced.get(pr, self.cols + j).clone());
            }
        }
        Ok(Some(x))
    }

    /// Basis of the column space, chosen among the original columns.
    pub fn column_space(&self) -> Result<Matrix> {
        let (_, pivots) = self.rref()?;
        Ok(self.select_columns(&pivots))
    }

    /// Whether every column of `other` lies in the column span of `self`.
    pub fn spans(&self, other: &Matrix) -> Result<bool> {
        if other.cols == 0 {
            return Ok(true);
        }
        Ok(self.rank()? == self.hstack(other)?.rank()?)
    }

    /// Equality of column spans.
    pub fn same_span(&self, other: &Matrix) -> Result<bool> {
        let r = self.rank()?;
        Ok(r == other.rank()? && r == self.hstack(other)?.rank()?)
    }

    /// Basis of the intersection of two column spans.
    pub fn intersect(&self, other: &Matrix) -> Result<Matrix> {
        let a = self.column_space()?;
        let b = other.column_space()?;
        if a.cols == 0 || b.cols == 0 {
            return Ok(Self::zeros(&self.desc, self.rows, 0));
        }
        let k = a.hstack(&b.map(|x| -x))?.kernel()?;
        let top = k.select_rows(0..a.cols);
        a.try_mul(&top)?.column_space()
    }

    /// Basis of the annihilator `{w : w^T v = 0 for v in span(self)}`.
    pub fn annihilator(&self) -> Result<Matrix> {
        if self.cols == 0 {
            return Ok(Self::identity(&self.desc, self.rows));
        }
        self.transpose().kernel()
    }

    pub fn select_rows(&self, range: std::ops::Range<usize>) -> Matrix {
        let mut m = Self::zeros(&self.desc, range.len(), self.cols);
        for (k, i) in range.enumerate() {
            for j in 0..self.cols {
                m.set(k, j, self.get(i, j).clone());
            }
        }
        m
    }

    /// Coordinates of the columns of `vectors` in the basis `self`
    /// (columns independent); errors if some vector is outside the span.
    pub fn coordinates_of(&self, vectors: &Matrix) -> Result<Matrix> {
        self.solve(vectors)?
            .ok_or_else(|| Error::ShapeMismatch("vector outside the span of the basis".into()))
    }
}

struct Echelon {
    reduced: Matrix,
    pivots: Vec<usize>,
    swaps: usize,
    pivot_product: FieldElement,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
