//! Exact dense linear algebra over arbitrary-precision rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    /// Delete row `r` and column `c`.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        let n = self.n - 1;
        Self::from_fn(n, |i, j| {
            let si = if i >= r { i + 1 } else { i };
            let sj = if j >= c { j + 1 } else { j };
            self.get(si, sj).clone()
        })
    }

    /// Leading `m × m` principal submatrix.
    pub fn leading(&self, m: usize) -> Self {
        Self::from_fn(m, |i, j| self.get(i, j).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Determinant by fraction-free (Bareiss) elimination with row swaps on
    /// zero pivots. Every division is exact.
    pub fn determinant(&self) -> BigRational {
        let n = self.n;
        if n == 0 {
            return BigRational::one();
        }
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut sign_flip = false;
        let mut prev = BigRational::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign_flip = !sign_flip;
                    }
                    None => return BigRational::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        let det = a[n - 1][n - 1].clone();
        if sign_flip {
            -det
        } else {
            det
        }
    }

    /// Exact solution of `A x = b`, or `None` when `A` is singular.
    pub fn solve(&self, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
        let n = self.n;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..n).map(|j| self.get(i, j).clone()).collect();
                row.push(rhs[i].clone());
                row
            })
            .collect();
        for k in 0..n {
            let pivot = (k..n).find(|&r| !a[r][k].is_zero())?;
            a.swap(k, pivot);
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let factor = &a[i][k] / &a[k][k];
                for j in k..=n {
                    let delta = &factor * &a[k][j];
                    a[i][j] -= delta;
                }
            }
        }
        let mut x = vec![BigRational::zero(); n];
        for i in (0..n).rev() {
            let mut acc = a[i][n].clone();
            for j in i + 1..n {
                acc -= &a[i][j] * &x[j];
            }
            x[i] = acc / &a[i][i];
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn cofactor_det(m: &RationalMatrix) -> BigRational {
        if m.order() == 1 {
            return m.get(0, 0).clone();
        }
        let mut acc = BigRational::zero();
        for j in 0..m.order() {
            let term = m.get(0, j) * cofactor_det(&m.minor(0, j));
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn matches_cofactor_expansion() {
        let vals = [[2, -1, 0, 3], [0, 0, 5, 1], [4, 1, -2, 0], [1, 7, 1, 1]];
        let m = RationalMatrix::from_fn(4, |i, j| q(vals[i][j]));
        assert_eq!(m.determinant(), cofactor_det(&m));
    }

    #[test]
    fn zero_pivot_needs_swap() {
        let m = RationalMatrix::from_fn(2, |i, j| q([[0, 1], [1, 0]][i][j]));
        assert_eq!(m.determinant(), q(-1));
    }

    #[test]
    fn singular_is_zero() {
        let m = RationalMatrix::from_fn(3, |i, j| q((i * 3 + j) as i64));
        assert_eq!(m.determinant(), q(0));
    }

    #[test]
    fn exact_solve() {
        let m = RationalMatrix::from_fn(2, |i, j| q([[0, 2], [3, 1]][i][j]));
        let x = m.solve(&[q(4), q(5)]).unwrap();
        assert_eq!(x, vec![q(1), q(2)]);
        let singular = RationalMatrix::from_fn(2, |_, _| q(1));
        assert!(singular.solve(&[q(1), q(2)]).is_none());
    }

    #[test]
    fn rational_entries() {
        let m = RationalMatrix::from_fn(2, |i, j| {
            BigRational::new(BigInt::from(i as i64 + 1), BigInt::from(j as i64 + 2))
        });
        // [[1/2, 1/3], [1, 2/3]] -> 1/3 - 1/3 = 0
        assert_eq!(m.determinant(), q(0));
    }
}
