use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{to_f64, Rational};
use crate::error::{Error, Result};
use crate::numkernel::DenseMatrix;

/// Small dense matrix with exact rational entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Sub-matrix on the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> RationalMatrix {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Determinant by exact Gaussian elimination.
    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Ok(Rational::zero());
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det *= &p;
            for r in (col + 1)..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &p;
                for j in col..n {
                    let delta = &factor * &a[col * n + j];
                    a[r * n + j] -= delta;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<RationalMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).recip();
            for j in 0..n {
                let v = a.get(col, j) * &p;
                a.set(col, j, v);
                let v = inv.get(col, j) * &p;
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let v = a.get(r, j) - &factor * a.get(col, j);
                    a.set(r, j, v);
                    let v = inv.get(r, j) - &factor * inv.get(col, j);
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    pub fn to_f64(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(self.get(i, j)))
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// The tridiagonal stage matrix: diagonal `(2, ..., 2, (n+1)/n)`, off-diagonal `-1`.
pub fn build_b(n: usize) -> Result<RationalMatrix> {
    if n == 0 {
        return Err(Error::InvalidSpec("stage count must be at least 1".into()));
    }
    let mut b = RationalMatrix::zeros(n, n);
    for i in 0..n {
        b.set(i, i, int(2));
        if i + 1 < n {
            b.set(i, i + 1, int(-1));
            b.set(i + 1, i, int(-1));
        }
    }
    b.set(n - 1, n - 1, Rational::new(BigInt::from(n + 1), BigInt::from(n)));
    Ok(b)
}

pub fn build_b_inverse(n: usize) -> Result<RationalMatrix> {
    build_b(n)?.inverse()
}
