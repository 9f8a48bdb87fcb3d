//! Dense complex matrix storage and elementwise arithmetic.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Shorthand for a complex number with the given parts.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense row-major complex matrix.
///
/// Zero-sized dimensions are allowed so that empty subspace bases can be
/// represented as `n × 0` matrices.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries.
    ///
    /// # Panics
    /// Panics if `data.len() != rows * cols`.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "real data length mismatch");
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Builds a matrix from real rows, e.g. `CMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]])`.
    pub fn from_rows<const N: usize>(rows: &[[f64; N]]) -> Self {
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_real(rows.len(), N, &data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Rejects NaN/Inf entries.
    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "{what} contains non-finite entries"
            )))
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[C64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Copies the block starting at `(r0, c0)` with the given size.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of range"
        );
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn columns(&self, start: usize, count: usize) -> Self {
        self.block(0, start, self.rows, count)
    }

    pub fn row_block(&self, start: usize, count: usize) -> Self {
        self.block(start, 0, count, self.cols)
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &CMatrix) {
        assert!(
            r0 + src.rows <= self.rows && c0 + src.cols <= self.cols,
            "block out of range"
        );
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    /// `[self other]`.
    pub fn hstack(&self, other: &CMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "cannot place {}x{} beside {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        Ok(out)
    }

    /// `[self; other]`.
    pub fn vstack(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot place {}x{} above {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows + other.rows, self.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, 0, other);
        Ok(out)
    }

    /// Matrix product with a shape check.
    pub fn matmul(&self, rhs: &CMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &CMatrix) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let lhs_row = &self.data[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in lhs_row.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    fn zip_with(&self, rhs: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Frobenius distance `‖self − other‖_F`.
    pub fn distance(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "distance shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − self*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square(), "hermitian defect needs a square matrix");
        self.distance(&self.adjoint())
    }

    /// Integer power of a square matrix; `pow(0)` is the identity.
    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul_unchecked(self);
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; use [`CMatrix::matmul`] for a checked product.
impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        self.mul_unchecked(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_adjoint() {
        let a = CMatrix::from_vec(1, 2, vec![c64(1.0, 1.0), c64(0.0, 2.0)]).unwrap();
        let g = &a * &a.adjoint();
        assert_eq!(g.shape(), (1, 1));
        assert!((g[(0, 0)] - c64(6.0, 0.0)).norm() < 1e-15);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn stacking() {
        let a = CMatrix::identity(2);
        let b = CMatrix::zeros(2, 1);
        let h = a.hstack(&b).unwrap();
        assert_eq!(h.shape(), (2, 3));
        assert!(a.vstack(&b).is_err());
        let v = a.vstack(&CMatrix::zeros(1, 2)).unwrap();
        assert_eq!(v.shape(), (3, 2));
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(a.ensure_finite("A"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn powers() {
        let n = CMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(n.pow(0), CMatrix::identity(2));
        assert_eq!(n.pow(2), CMatrix::zeros(2, 2));
    }
}
