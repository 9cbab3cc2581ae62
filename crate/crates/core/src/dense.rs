use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

/// Square dense complex matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds from row-major nested rows. Panics if the rows do not form a square.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Builds from real row-major rows.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Self {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, T::zero())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Column `j` as a contiguous slice.
    pub fn col(&self, j: usize) -> &[Complex<T>] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex<T>] {
        let n = self.n;
        &mut self.data[j * n..(j + 1) * n]
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    /// Max column sum of entry moduli.
    pub fn one_norm(&self) -> T {
        (0..self.n)
            .map(|j| self.col(j).iter().map(|v| v.norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for j in 0..self.n {
            for i in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for j in 0..n {
            for k in 0..n {
                let b = other[(k, j)];
                if b.is_zero() {
                    continue;
                }
                let a = self.col(k);
                let o = out.col_mut(j);
                for i in 0..n {
                    o[i] += a[i] * b;
                }
            }
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == T::zero())
    }

    /// Adds `c` to every diagonal entry.
    pub fn add_diagonal(&mut self, c: Complex<T>) {
        for i in 0..self.n {
            self[(i, i)] += c;
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[j * self.n + i]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[j * self.n + i]
    }
}
