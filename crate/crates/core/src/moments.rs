//! Exact normal moments, the even-moment Hankel matrix and the Hankel bound
//! `1 / (H⁻¹)₀₀`.
//!
//! Nothing in this module touches floating point except the `to_f64`
//! conversions offered for downstream solvers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::RationalMatrix;
use crate::hermite::{self, HermitePolynomial};

/// `E Z^ℓ` for `Z ~ N(0, 1)`: zero for odd `ℓ`, `(ℓ − 1)!!` otherwise.
pub fn normal_moment(l: usize) -> BigRational {
    BigRational::from_integer(normal_moment_int(l))
}

pub(crate) fn normal_moment_int(l: usize) -> BigInt {
    if l % 2 == 1 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    let mut f = 1usize;
    while f < l {
        acc *= f;
        f += 2;
    }
    acc
}

/// Where a moment vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSource {
    Normal,
    UserSupplied,
}

/// `values[j − 1] = M_j` for `j = 1..=len`; `M_0 = 1` is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentVector {
    values: Vec<BigRational>,
    source: MomentSource,
}

impl MomentVector {
    /// `M_1, …, M_len` of the standard normal.
    pub fn normal(len: usize) -> Self {
        Self {
            values: (1..=len).map(normal_moment).collect(),
            source: MomentSource::Normal,
        }
    }

    pub fn user_supplied(values: Vec<BigRational>) -> Self {
        Self {
            values,
            source: MomentSource::UserSupplied,
        }
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `M_j`, with `M_0 = 1`. Panics past the stored length.
    pub fn get(&self, j: usize) -> BigRational {
        if j == 0 {
            BigRational::one()
        } else {
            self.values[j - 1].clone()
        }
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Half even normal moments `M_{2i} / 2` for `i = 1..=n`: the right-hand side
/// of the moment equations for the positive half of a symmetric distribution,
/// written in the squared variable.
pub fn half_even_normal_moments(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| rational_to_f64(&normal_moment(2 * i)) / 2.0)
        .collect()
}

/// Even-moment Hankel matrix: entry `(i, j) = M_{2(i+j)}`, `i, j = 0..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HankelMatrix {
    order: usize,
    matrix: RationalMatrix,
}

impl HankelMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        self.matrix.get(i, j)
    }

    /// Determinants of the leading principal submatrices of sizes `1..=m+1`.
    pub fn leading_minors(&self) -> Vec<BigRational> {
        (1..=self.order + 1)
            .map(|s| self.matrix.leading(s).determinant())
            .collect()
    }

    /// `1 / (H⁻¹)₀₀ = det H / det H₍₀,₀₎`.
    pub fn inverse_corner_reciprocal(&self) -> Result<BigRational> {
        let det = self.matrix.determinant();
        let minor = self.matrix.minor(0, 0).determinant();
        if det.is_zero() || minor.is_zero() {
            return Err(Error::SingularHankel);
        }
        Ok(det / minor)
    }
}

/// Hankel matrix of order `m` built from the normal moments.
pub fn hankel_matrix(m: usize) -> Result<HankelMatrix> {
    if m == 0 {
        return Err(Error::OutOfRange {
            k: m,
            min: 1,
            max: usize::MAX,
        });
    }
    hankel_from_moments(&MomentVector::normal(4 * m), m)
}

/// Hankel matrix of order `m` from an arbitrary moment vector (needs `M_{4m}`).
pub fn hankel_from_moments(moments: &MomentVector, m: usize) -> Result<HankelMatrix> {
    if moments.len() < 4 * m {
        return Err(Error::LengthMismatch {
            points: 4 * m,
            moments: moments.len(),
        });
    }
    let matrix = RationalMatrix::from_fn(m + 1, |i, j| moments.get(2 * (i + j)));
    Ok(HankelMatrix { order: m, matrix })
}

fn check_even(k: usize) -> Result<()> {
    if k == 0 || k % 2 == 1 {
        Err(Error::OddMomentCount(k))
    } else {
        Ok(())
    }
}

/// Upper bound on the mass at zero for a distribution matching the even
/// normal moments `M_2, …, M_{2k}` (`k` even). The Hankel order is `k / 2`,
/// so the matrix uses exactly `M_0, …, M_{2k}`.
pub fn lindsay_bound(k: usize) -> Result<BigRational> {
    check_even(k)?;
    hankel_matrix(k / 2)?.inverse_corner_reciprocal()
}

/// [`lindsay_bound`] for user-supplied moments.
pub fn lindsay_bound_for(moments: &MomentVector, k: usize) -> Result<BigRational> {
    check_even(k)?;
    hankel_from_moments(moments, k / 2)?.inverse_corner_reciprocal()
}

/// The quantity `s` with `r* = (1 − s / M_{2k}) / 2`, from the odd Hermite
/// polynomial `He_{k+1} = x·Q(x²)` whose root squares are the extremal nodes:
///
/// `s = M_{2k} · Σ_{i=0}^{k/2} Q_i M_{2i} / Q_0`.
pub fn s_from_hermite(k: usize) -> Result<BigRational> {
    check_even(k)?;
    let poly = hermite::hermite_coefficients(k + 1)?;
    s_from_polynomial(&poly, k)
}

/// [`s_from_hermite`] on a caller-supplied polynomial of degree `k + 1`.
pub fn s_from_polynomial(poly: &HermitePolynomial, k: usize) -> Result<BigRational> {
    check_even(k)?;
    let q = poly.square_variable_coefficients();
    let q0 = q.first().cloned().unwrap_or_default();
    if q0.is_zero() {
        return Err(Error::Inconsistent("zero constant term in Q".into()));
    }
    let mut acc = BigRational::zero();
    for (i, c) in q.iter().enumerate() {
        acc += BigRational::from_integer(c.clone()) * normal_moment(2 * i);
    }
    Ok(normal_moment(2 * k) * acc / BigRational::from_integer(q0))
}

/// `Σ_j M_{2j+2i} · He_{2ℓ+2i+2}[2j]`, which vanishes by orthogonality of
/// `He_{2ℓ+2i+2}` to `x^{2i}`.
pub fn orthogonality_check(l: usize, i: usize) -> Result<BigRational> {
    let poly = hermite::hermite_coefficients(2 * l + 2 * i + 2)?;
    Ok(orthogonality_sum(&poly, i))
}

/// `E[Z^{2i} · p(Z)]` restricted to the even coefficients of `p`.
pub fn orthogonality_sum(poly: &HermitePolynomial, i: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for (j, c) in poly.coefficients().iter().enumerate().step_by(2) {
        acc += BigRational::from_integer(c.clone()) * normal_moment(j + 2 * i);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn moments_examples() {
        assert_eq!(normal_moment(0), q(1, 1));
        assert_eq!(normal_moment(2), q(1, 1));
        assert_eq!(normal_moment(7), q(0, 1));
        assert_eq!(normal_moment(8), q(105, 1));
        assert_eq!(normal_moment(12), q(10395, 1));
    }

    #[test]
    fn double_factorial_recursion() {
        for j in 1..=40 {
            assert_eq!(
                normal_moment(2 * j),
                normal_moment(2 * j - 2) * q(2 * j as i64 - 1, 1)
            );
        }
    }

    #[test]
    fn hankel_examples() {
        let h1 = hankel_matrix(1).unwrap();
        let want1 = [[1, 1], [1, 3]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h1.entry(i, j), &q(want1[i][j], 1));
            }
        }
        let h2 = hankel_matrix(2).unwrap();
        let want2 = [[1, 1, 3], [1, 3, 15], [3, 15, 105]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h2.entry(i, j), &q(want2[i][j], 1));
            }
        }
        let h3 = hankel_matrix(3).unwrap();
        assert_eq!(h3.entry(3, 3), &q(10395, 1));
        assert!(h3.matrix().is_symmetric());
        assert!(hankel_matrix(0).is_err());
    }

    #[test]
    fn hankel_positive_definite() {
        for m in 1..=8 {
            for minor in hankel_matrix(m).unwrap().leading_minors() {
                assert!(minor > BigRational::zero());
            }
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(lindsay_bound(2).unwrap(), q(2, 3));
        assert_eq!(lindsay_bound(4).unwrap(), q(8, 15));
        let h3 = hankel_matrix(3).unwrap();
        assert_eq!(h3.matrix().minor(0, 0).determinant(), q(75600, 1));
        assert_eq!(lindsay_bound(6).unwrap(), q(16, 35));
        assert_eq!(lindsay_bound(3), Err(Error::OddMomentCount(3)));
        assert_eq!(lindsay_bound(0), Err(Error::OddMomentCount(0)));
    }

    #[test]
    fn singular_user_moments() {
        // point mass at 1: every moment equals 1
        let ones = MomentVector::user_supplied(vec![q(1, 1); 8]);
        assert_eq!(lindsay_bound_for(&ones, 2), Err(Error::SingularHankel));
        assert_eq!(ones.source(), MomentSource::UserSupplied);
    }

    #[test]
    fn s_examples() {
        assert_eq!(s_from_hermite(2).unwrap(), q(2, 1));
        // (1 - s/105)/2 = 7/30
        assert_eq!(s_from_hermite(4).unwrap(), q(56, 1));
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(orthogonality_check(0, 0).unwrap(), q(0, 1));
        assert_eq!(orthogonality_check(1, 0).unwrap(), q(0, 1));
        assert_eq!(orthogonality_check(1, 1).unwrap(), q(0, 1));
        let corrupted = hermite::hermite_coefficients(4)
            .unwrap()
            .with_coefficient(2, BigInt::from(-5));
        assert_ne!(orthogonality_sum(&corrupted, 0), q(0, 1));
    }
}
