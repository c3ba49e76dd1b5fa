//! Probabilists' Hermite polynomials with exact integer coefficients.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::roots::{self, GridKind};

/// Largest degree accepted by [`hermite_coefficients`].
pub const MAX_DEGREE: usize = 200;

/// Default relative backward-error tolerance for root squares.
pub const DEFAULT_ROOT_TOLERANCE: f64 = 1e-13;

/// Monic `He_n`; `coefficients[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitePolynomial {
    degree: usize,
    coefficients: Vec<BigInt>,
}

impl HermitePolynomial {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coefficient(&self, i: usize) -> BigInt {
        self.coefficients.get(i).cloned().unwrap_or_default()
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(big_to_f64).collect()
    }

    /// Coefficients of the polynomial in `u = x²`: `He_n(x) = R(x²)` for even
    /// `n`, `He_n(x) = x·Q(x²)` for odd `n`.
    pub fn square_variable_coefficients(&self) -> Vec<BigInt> {
        let offset = self.degree % 2;
        self.coefficients
            .iter()
            .skip(offset)
            .step_by(2)
            .cloned()
            .collect()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        roots::horner(&self.coefficients_f64(), x)
    }

    pub fn evaluate_in_square_variable(&self, u: f64) -> f64 {
        let c: Vec<f64> = self
            .square_variable_coefficients()
            .iter()
            .map(big_to_f64)
            .collect();
        roots::horner(&c, u)
    }

    /// Overwrite one coefficient. Used to build corrupted polynomials for
    /// negative-control checks.
    pub fn with_coefficient(mut self, i: usize, value: BigInt) -> Self {
        if i < self.coefficients.len() {
            self.coefficients[i] = value;
        }
        self
    }
}

pub fn big_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `He_n` from `He_{n+1} = x·He_n − n·He_{n−1}`.
pub fn hermite_coefficients(n: usize) -> Result<HermitePolynomial> {
    if n > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(n));
    }
    let mut prev: Vec<BigInt> = vec![BigInt::from(1)];
    if n == 0 {
        return Ok(HermitePolynomial {
            degree: 0,
            coefficients: prev,
        });
    }
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::from(1)];
    for m in 1..n {
        let mut next = vec![BigInt::zero(); m + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        let scale = BigInt::from(m);
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &scale * c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(HermitePolynomial {
        degree: n,
        coefficients: cur,
    })
}

/// Squares of the positive roots of an odd-degree Hermite polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSquares {
    pub degree: usize,
    /// Strictly increasing, strictly positive.
    pub values: Vec<f64>,
    /// Per-root `|Q(u)| / Σ|Q_i| u^i`.
    pub residuals: Vec<f64>,
}

impl RootSquares {
    pub fn positive_roots(&self) -> Vec<f64> {
        self.values.iter().map(|u| u.sqrt()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// The `(n − 1)/2` squared positive roots of `He_n` for odd `n ≥ 3`.
///
/// Roots isolated on the coefficient form are polished by Newton steps on
/// the three-term recursion, which evaluates `He_n` near its roots without
/// the cancellation of the expanded coefficients.
pub fn nonzero_root_squares(n: usize, tolerance: f64) -> Result<RootSquares> {
    let poly = hermite_coefficients(n)?;
    let mut squares = root_squares_of(&poly, tolerance)?;
    for u in squares.values.iter_mut() {
        *u = polish_root(n, u.sqrt()).powi(2);
    }
    Ok(squares)
}

/// `(He_n(t), He_{n−1}(t))` by the three-term recursion.
pub fn recursion_pair(n: usize, t: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0f64, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let next = t * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Newton on `He_n` with `He_n' = n He_{n−1}`, stopping once a step no
/// longer shrinks.
fn polish_root(n: usize, mut t: f64) -> f64 {
    let mut last = f64::INFINITY;
    for _ in 0..8 {
        let (value, lower) = recursion_pair(n, t);
        let step = value / (n as f64 * lower);
        if !step.is_finite() || step.abs() >= last {
            break;
        }
        t -= step;
        last = step.abs();
    }
    t
}

/// Same as [`nonzero_root_squares`] on an already constructed polynomial.
pub fn root_squares_of(poly: &HermitePolynomial, tolerance: f64) -> Result<RootSquares> {
    let n = poly.degree();
    if n < 3 || n % 2 == 0 {
        return Err(Error::NotOddDegree(n));
    }
    let expected = (n - 1) / 2;
    let q: Vec<f64> = poly
        .square_variable_coefficients()
        .iter()
        .map(big_to_f64)
        .collect();
    // All roots of He_n lie in |x| < sqrt(4n + 2).
    let lo = 0.01 / n as f64;
    let hi = 4.0 * n as f64 + 2.0;
    let search = roots::real_roots_in(&q, lo, hi, GridKind::Geometric, expected, 64 * n);
    let converged: Vec<_> = search
        .roots
        .iter()
        .filter(|r| r.residual <= tolerance && r.value > 0.0)
        .collect();
    if search.roots.len() != expected || converged.len() != expected {
        return Err(Error::RootsNotConverged {
            degree: n,
            found: converged.len(),
            expected,
        });
    }
    Ok(RootSquares {
        degree: n,
        values: converged.iter().map(|r| r.value).collect(),
        residuals: converged.iter().map(|r| r.residual).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(p: &HermitePolynomial) -> Vec<i64> {
        p.coefficients()
            .iter()
            .map(|c| c.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn low_degree_coefficients() {
        assert_eq!(ints(&hermite_coefficients(0).unwrap()), vec![1]);
        assert_eq!(ints(&hermite_coefficients(1).unwrap()), vec![0, 1]);
        assert_eq!(ints(&hermite_coefficients(3).unwrap()), vec![0, -3, 0, 1]);
        assert_eq!(
            ints(&hermite_coefficients(5).unwrap()),
            vec![0, 15, 0, -10, 0, 1]
        );
        assert_eq!(
            ints(&hermite_coefficients(6).unwrap()),
            vec![-15, 0, 45, 0, -15, 0, 1]
        );
    }

    #[test]
    fn degree_cap() {
        assert!(hermite_coefficients(200).is_ok());
        assert_eq!(hermite_coefficients(201), Err(Error::DegreeTooLarge(201)));
    }

    #[test]
    fn evaluation() {
        assert_eq!(hermite_coefficients(3).unwrap().evaluate(2.0), 2.0);
        assert_eq!(hermite_coefficients(5).unwrap().evaluate(0.0), 0.0);
        assert_eq!(hermite_coefficients(6).unwrap().evaluate(1.0), 16.0);
        // He_5 = x(x^4 - 10x^2 + 15): Q(u) = u^2 - 10u + 15
        assert_eq!(
            hermite_coefficients(5)
                .unwrap()
                .evaluate_in_square_variable(2.0),
            -1.0
        );
    }

    #[test]
    fn root_squares_small_degrees() {
        let r3 = nonzero_root_squares(3, DEFAULT_ROOT_TOLERANCE).unwrap();
        assert_eq!(r3.values.len(), 1);
        assert!((r3.values[0] - 3.0).abs() < 1e-14);

        let r5 = nonzero_root_squares(5, DEFAULT_ROOT_TOLERANCE).unwrap();
        let s = 10f64.sqrt();
        assert!((r5.values[0] - (5.0 - s)).abs() < 1e-13);
        assert!((r5.values[1] - (5.0 + s)).abs() < 1e-13);
    }

    #[test]
    fn rejects_even_or_small_degree() {
        assert_eq!(nonzero_root_squares(4, 1e-13), Err(Error::NotOddDegree(4)));
        assert_eq!(nonzero_root_squares(1, 1e-13), Err(Error::NotOddDegree(1)));
    }

    #[test]
    fn impossible_tolerance_is_reported_with_degree() {
        match nonzero_root_squares(9, 0.0) {
            Ok(r) => assert!(r.max_residual() == 0.0),
            Err(Error::RootsNotConverged { degree, .. }) => assert_eq!(degree, 9),
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
