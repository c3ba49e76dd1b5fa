//! Dense `f64` solves backed by nalgebra's partially pivoted LU.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::moments::rational_to_f64;

/// Solve `A x = b` with `A` given row-major as `n × n`.
pub fn solve_dense(n: usize, row_major: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let a = DMatrix::from_row_slice(n, n, row_major);
    let b = DVector::from_column_slice(rhs);
    a.lu()
        .solve(&b)
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::Singular)
}

/// Solve `A x = b` for an exactly known `A` (row-major rationals): LU on the
/// power-of-two equilibrated `f64` rounding of `A`, then `steps` rounds of
/// iterative refinement with the residual `b − A x` evaluated exactly.
pub fn solve_exact_refined(
    n: usize,
    exact: &[BigRational],
    rhs: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    let a: Vec<f64> = exact.iter().map(rational_to_f64).collect();
    let pow2 = |v: f64| {
        if v > 0.0 {
            2f64.powi(-v.log2().round() as i32)
        } else {
            1.0
        }
    };
    let row: Vec<f64> = (0..n)
        .map(|i| pow2((0..n).map(|j| a[i * n + j].abs()).fold(0.0, f64::max)))
        .collect();
    let col: Vec<f64> = (0..n)
        .map(|j| {
            pow2(
                (0..n)
                    .map(|i| (a[i * n + j] * row[i]).abs())
                    .fold(0.0, f64::max),
            )
        })
        .collect();
    // (R A C) y = R b with x = C y; the scales are exact powers of two.
    let lu = DMatrix::from_fn(n, n, |i, j| a[i * n + j] * row[i] * col[j]).lu();
    let solve = |r: &[f64]| {
        let scaled = DVector::from_fn(n, |i, _| r[i] * row[i]);
        lu.solve(&scaled)
            .map(|y| (0..n).map(|j| y[j] * col[j]).collect::<Vec<f64>>())
            .ok_or(Error::Singular)
    };
    let mut x = solve(rhs)?;
    let to_exact = |v: f64| BigRational::from_float(v).ok_or(Error::Singular);
    for _ in 0..steps {
        let xq = x.iter().map(|&v| to_exact(v)).collect::<Result<Vec<_>>>()?;
        let mut r = vec![0.0; n];
        for i in 0..n {
            let mut acc = to_exact(rhs[i])?;
            for j in 0..n {
                acc -= &exact[i * n + j] * &xq[j];
            }
            r[i] = rational_to_f64(&acc);
        }
        for (xj, dj) in x.iter_mut().zip(solve(&r)?) {
            *xj += dj;
        }
    }
    Ok(x)
}

/// Solve `Aᵀ x = b`.
pub fn solve_dense_transposed(n: usize, row_major: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let a = DMatrix::from_row_slice(n, n, row_major).transpose();
    let b = DVector::from_column_slice(rhs);
    a.lu()
        .solve(&b)
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::Singular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::RationalMatrix;

    #[test]
    fn two_by_two() {
        let x = solve_dense(2, &[2.0, 1.0, 1.0, 3.0], &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        let y = solve_dense_transposed(2, &[2.0, 0.0, 1.0, 1.0], &[3.0, 1.0]).unwrap();
        // [[2,1],[0,1]] y = [3,1]
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refinement_matches_exact_hilbert_solve() {
        let n = 10;
        let h: Vec<BigRational> = (0..n * n)
            .map(|k| BigRational::new(1.into(), ((k / n + k % n + 1) as i64).into()))
            .collect();
        let hf: Vec<f64> = h.iter().map(rational_to_f64).collect();
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let exact = RationalMatrix::from_fn(n, |i, j| h[i * n + j].clone())
            .solve(
                &b.iter()
                    .map(|&v| BigRational::from_float(v).unwrap())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
        let truth: Vec<f64> = exact.iter().map(rational_to_f64).collect();
        let scale = truth.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = |x: &[f64]| {
            x.iter()
                .zip(&truth)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale
        };
        let plain = solve_dense(n, &hf, &b).unwrap();
        let refined = solve_exact_refined(n, &h, &b, 3).unwrap();
        assert!(err(&refined) < 1e-12, "{}", err(&refined));
        assert!(err(&plain) > err(&refined));
    }

    #[test]
    fn singular() {
        assert_eq!(
            solve_dense(2, &[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]),
            Err(Error::Singular)
        );
    }
}
