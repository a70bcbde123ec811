//! Dense constant matrices over GF(q^m) with exact Gaussian elimination.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{ExtField, Fe};

#[derive(Clone)]
pub struct Mat {
    field: Arc<ExtField>,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<u32> = (0..self.cols).map(|c| self.at(r, c).0).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
            && self.field.same_field(&other.field)
    }
}

/// Outcome of solving `A x = b`.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Inconsistent,
    /// One particular solution (free variables set to zero) plus a basis of
    /// the homogeneous kernel; an empty kernel means the solution is unique.
    Solution { particular: Vec<Fe>, kernel: Vec<Vec<Fe>> },
}

impl Mat {
    pub fn zeros(field: Arc<ExtField>, rows: usize, cols: usize) -> Self {
        Mat { field, rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(field: Arc<ExtField>, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(field: Arc<ExtField>, rows: Vec<Vec<Fe>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Mat { field, rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn field(&self) -> &Arc<ExtField> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> Fe {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c));
            }
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if !self.field.same_field(&other.field) {
            return Err(Error::MixedFields);
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Mat::zeros(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(l, j);
                    if !b.is_zero() {
                        out.set(i, j, f.add(out.at(i, j), f.mul(a, b)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn row_vec_mul(&self, v: &[Fe]) -> Result<Vec<Fe>> {
        if v.len() != self.rows {
            return Err(Error::ShapeMismatch("vector/matrix".into()));
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let a = self.at(i, j);
                if !a.is_zero() {
                    out[j] = f.add(out[j], f.mul(vi, a));
                }
            }
        }
        Ok(out)
    }

    pub fn select_cols(&self, sel: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.field.clone(), self.rows, sel.len());
        for r in 0..self.rows {
            for (jj, &j) in sel.iter().enumerate() {
                out.set(r, jj, self.at(r, j));
            }
        }
        out
    }

    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.cols || !self.field.same_field(&other.field) {
            return Err(Error::ShapeMismatch("vstack".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Row echelon form in place; returns pivot columns. Eliminates both
    /// below and above pivots (reduced form).
    fn rref(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let piv = (rank..self.rows).find(|&r| !self.at(r, c).is_zero());
            let piv = match piv {
                Some(p) => p,
                None => continue,
            };
            if piv != rank {
                for j in 0..self.cols {
                    let t = self.at(rank, j);
                    self.set(rank, j, self.at(piv, j));
                    self.set(piv, j, t);
                }
            }
            let inv = f.inv(self.at(rank, c));
            for j in 0..self.cols {
                self.set(rank, j, f.mul(self.at(rank, j), inv));
            }
            for r in 0..self.rows {
                if r != rank {
                    let factor = self.at(r, c);
                    if !factor.is_zero() {
                        for j in 0..self.cols {
                            let s = f.mul(factor, self.at(rank, j));
                            self.set(r, j, f.sub(self.at(r, j), s));
                        }
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zeros(self.field.clone(), n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.at(r, c));
            }
            aug.set(r, n + r, Fe::ONE);
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        let mut out = Mat::zeros(self.field.clone(), n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, aug.at(r, n + c));
            }
        }
        Some(out)
    }

    /// Solve `self * x = b` for a column vector b.
    pub fn solve(&self, b: &[Fe]) -> Result<SolveOutcome> {
        if b.len() != self.rows {
            return Err(Error::ShapeMismatch("rhs length".into()));
        }
        let f = self.field.clone();
        let mut aug = Mat::zeros(f.clone(), self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let pivots = aug.rref();
        // a pivot in the rhs column means inconsistency
        if pivots.last() == Some(&self.cols) {
            return Ok(SolveOutcome::Inconsistent);
        }
        let mut particular = vec![Fe::ZERO; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            particular[p] = aug.at(i, self.cols);
        }
        // kernel basis: one vector per free column
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut kernel = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Fe::ZERO; self.cols];
            v[free] = Fe::ONE;
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = f.neg(aug.at(i, free));
            }
            kernel.push(v);
        }
        Ok(SolveOutcome::Solution { particular, kernel })
    }

    /// Basis of the left kernel {u : u * self = 0}.
    pub fn left_kernel(&self) -> Vec<Vec<Fe>> {
        self.transpose().kernel()
    }

    /// Basis of the right kernel {x : self * x = 0}.
    pub fn kernel(&self) -> Vec<Vec<Fe>> {
        match self.solve(&vec![Fe::ZERO; self.rows]) {
            Ok(SolveOutcome::Solution { kernel, .. }) => kernel,
            _ => unreachable!("homogeneous system is always consistent"),
        }
    }
}
