use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{Num, Signed, Zero};

use super::{MathError, Rational};

/// Dense row-major matrix over an exact scalar type.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RationalMatrix = Matrix<Rational>;
pub type IntegerMatrix = Matrix<BigInt>;

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, MathError> {
        if rows * cols != data.len() {
            return Err(MathError::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. An empty outer vector yields a 0x0 matrix.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MathError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(MathError::Shape(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let cols = self.cols.max(1);
        self.data
            .iter()
            .enumerate()
            .map(move |(idx, x)| (idx / cols, idx % cols, x))
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T: Num + Clone> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for (i, j, x) in self.indexed() {
            out[(j, i)] = x.clone();
        }
        out
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, MathError> {
        if self.cols != rhs.rows {
            return Err(MathError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a.clone() * rhs[(k, j)].clone();
                    let slot = &mut out[(i, j)];
                    *slot = slot.clone() + prod;
                }
            }
        }
        Ok(out)
    }

    /// Matrix product. Panics on a dimension mismatch.
    pub fn mul(&self, rhs: &Self) -> Self {
        self.checked_mul(rhs).expect("matrix dimensions")
    }

    /// Matrix-vector product. Panics on a dimension mismatch.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "matrix-vector dimensions");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Result<Self, MathError> {
        if self.shape() != rhs.shape() {
            return Err(MathError::Shape(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, MathError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, MathError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Elementwise sum. Panics on a shape mismatch.
    pub fn add(&self, rhs: &Self) -> Self {
        self.checked_add(rhs).expect("matrix shapes")
    }

    /// Elementwise difference. Panics on a shape mismatch.
    pub fn sub(&self, rhs: &Self) -> Self {
        self.checked_sub(rhs).expect("matrix shapes")
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for (i, j, a) in self.indexed() {
            for (k, l, b) in rhs.indexed() {
                out[(i * rhs.rows + k, j * rhs.cols + l)] = a.clone() * b.clone();
            }
        }
        out
    }

    /// Places `blocks` (a grid of equally-shaped-per-row/column blocks) into one matrix.
    pub fn block(blocks: &[Vec<&Self>]) -> Result<Self, MathError> {
        let row_heights: Vec<usize> = blocks
            .iter()
            .map(|r| r.first().map_or(0, |b| b.rows))
            .collect();
        let col_widths: Vec<usize> = blocks
            .first()
            .map(|r| r.iter().map(|b| b.cols).collect())
            .unwrap_or_default();
        let mut out = Self::zeros(row_heights.iter().sum(), col_widths.iter().sum());
        let mut r0 = 0;
        for (bi, brow) in blocks.iter().enumerate() {
            if brow.len() != col_widths.len() {
                return Err(MathError::Shape(format!("block row {bi} has wrong length")));
            }
            let mut c0 = 0;
            for (bj, b) in brow.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(MathError::Shape(format!("block ({bi},{bj}) has wrong shape")));
                }
                for (i, j, x) in b.indexed() {
                    out[(r0 + i, c0 + j)] = x.clone();
                }
                c0 += b.cols;
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }
}

impl<T: Num + Clone + Signed + PartialOrd> Matrix<T> {
    /// Induced ∞-norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, x| acc + x.abs()))
            .fold(T::zero(), |m, s| if s > m { s } else { m })
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> T {
        self.transpose().inf_norm()
    }
}

impl RationalMatrix {
    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Lossless conversion when every entry is an integer.
    pub fn to_integer(&self) -> Option<IntegerMatrix> {
        self.is_integer().then(|| self.map(|x| x.to_integer()))
    }

    /// `(row, col, value)` of every non-integer entry.
    pub fn non_integer_entries(&self) -> Vec<(usize, usize, Rational)> {
        self.indexed()
            .filter(|(_, _, x)| !x.is_integer())
            .map(|(i, j, x)| (i, j, x.clone()))
            .collect()
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(super::rational_to_f64)
    }
}

impl IntegerMatrix {
    pub fn to_rational(&self) -> RationalMatrix {
        self.map(|x| Rational::from_integer(x.clone()))
    }

    /// Elementwise reduction into `[0, q)`.
    pub fn reduce_mod(&self, q: &BigInt) -> IntegerMatrix {
        self.map(|x| super::mod_floor(x, q))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Exact vector helpers. Vectors are plain `Vec<T>`.
pub mod vector {
    use num_traits::{Num, Signed};

    pub fn add<T: Num + Clone>(a: &[T], b: &[T]) -> Vec<T> {
        assert_eq!(a.len(), b.len(), "vector lengths");
        a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
    }

    pub fn sub<T: Num + Clone>(a: &[T], b: &[T]) -> Vec<T> {
        assert_eq!(a.len(), b.len(), "vector lengths");
        a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
    }

    pub fn scale<T: Num + Clone>(c: &T, a: &[T]) -> Vec<T> {
        a.iter().map(|x| c.clone() * x.clone()).collect()
    }

    pub fn inf_norm<T: Num + Clone + Signed + PartialOrd>(a: &[T]) -> T {
        a.iter()
            .map(Signed::abs)
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    pub fn zeros<T: Num + Clone>(n: usize) -> Vec<T> {
        vec![T::zero(); n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(rows: Vec<Vec<i64>>) -> IntegerMatrix {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = Matrix::from_rows(vec![vec![1, 2], vec![3]]).unwrap_err();
        assert!(matches!(err, MathError::Shape(_)));
    }

    #[test]
    fn product_and_norms() {
        let a = int(vec![vec![1, -2], vec![3, 4]]);
        let b = int(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(a.mul(&b), int(vec![vec![-2, 1], vec![4, 3]]));
        assert_eq!(a.inf_norm(), BigInt::from(7));
        assert_eq!(a.one_norm(), BigInt::from(6));
        assert_eq!(a.trace(), BigInt::from(5));
    }

    #[test]
    fn kron_with_identity_stacks_blocks() {
        let c = int(vec![vec![2, 3]]);
        let k = c.kron(&IntegerMatrix::identity(2));
        assert_eq!(k, int(vec![vec![2, 0, 3, 0], vec![0, 2, 0, 3]]));
    }

    #[test]
    fn reduce_mod_is_nonnegative() {
        let m = int(vec![vec![-1, 9]]);
        assert_eq!(m.reduce_mod(&BigInt::from(8)), int(vec![vec![7, 1]]));
    }
}
