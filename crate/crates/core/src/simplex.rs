//! Two-phase revised simplex with Bland's anti-cycling rule.
//!
//! Solves `max cᵀx` subject to `A x = b`, `x ≥ 0`. The basis has one column
//! per constraint row and is refactored from the original data at every
//! pivot, so rounding does not accumulate across iterations. Both phases run
//! against a right-hand side nudged into the interior of the feasible cone;
//! the final basis is then re-solved against the original one.

use nalgebra::{DMatrix, DVector, Dyn, LU};

pub(crate) const PIVOT_TOLERANCE: f64 = 1e-11;
const REDUCED_COST_TOLERANCE: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 50;
const RATIO_TIE: f64 = 1e-12;
const PERTURBATION: f64 = 1e-13;
const MAX_PIVOTS: usize = 100_000;

pub(crate) struct StandardForm {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    Optimal(Vec<f64>),
    Infeasible {
        phase_one_objective: f64,
    },
    /// Pivot cap reached or the basis became singular.
    Stalled,
}

/// Columns `0..n` are structural; column `n + i` is the artificial unit
/// vector of row `i`, with its sign chosen so the start is feasible.
struct Revised<'a> {
    p: &'a StandardForm,
    /// Right-hand side the iterations run against.
    b: Vec<f64>,
    sign: Vec<f64>,
    basis: Vec<usize>,
}

impl Revised<'_> {
    fn column(&self, j: usize) -> DVector<f64> {
        let (m, n) = (self.p.rows, self.p.cols);
        if j < n {
            DVector::from_fn(m, |i, _| self.p.a[i * n + j])
        } else {
            let mut e = DVector::zeros(m);
            e[j - n] = self.sign[j - n];
            e
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.p.rows;
        let mut bm = DMatrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            bm.set_column(k, &self.column(j));
        }
        bm
    }

    /// Run simplex iterations minimizing `cost` over columns `< allowed`
    /// (plus whatever is already basic). Returns the final basic values.
    ///
    /// Pricing is Dantzig's most-negative reduced cost; after
    /// [`DEGENERATE_STREAK`] consecutive zero-length steps the method
    /// switches to Bland's lowest-index rule for both the entering and the
    /// leaving column, which cannot cycle, until a step makes progress again.
    fn run(&mut self, cost: &dyn Fn(usize) -> f64, allowed: usize) -> Option<DVector<f64>> {
        let m = self.p.rows;
        let b = DVector::from_column_slice(&self.b);
        let mut degenerate_streak = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bm = self.basis_matrix();
            let lu = bm.clone().lu();
            let bt = bm.transpose();
            let lut = bt.clone().lu();
            let xb = refine(&bm, &lu, &b)?;
            let cb = DVector::from_fn(m, |k, _| cost(self.basis[k]));
            let y = refine(&bt, &lut, &cb)?;
            // Reduced costs carry rounding proportional to |y|.
            let noise = REDUCED_COST_TOLERANCE * y.amax().max(1.0);
            let bland = degenerate_streak >= DEGENERATE_STREAK;
            let mut entering: Option<(usize, f64)> = None;
            for j in (0..allowed).filter(|j| !self.basis.contains(j)) {
                let d = cost(j) - y.dot(&self.column(j));
                if d >= -noise {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d < best) {
                    entering = Some((j, d));
                }
            }
            let Some((col, _)) = entering else {
                return Some(xb);
            };
            let w = refine(&bm, &lu, &self.column(col))?;
            let floor = PIVOT_TOLERANCE * w.amax().max(1.0);
            let leave = if bland {
                // Minimum ratio, ties to the lowest basic index.
                let ratio = |i: usize| xb[i].max(0.0) / w[i];
                let limit = (0..m)
                    .filter(|&i| w[i] > floor)
                    .map(ratio)
                    .fold(f64::INFINITY, f64::min);
                (0..m)
                    .filter(|&i| w[i] > floor && ratio(i) <= limit + RATIO_TIE * limit.max(1.0))
                    .min_by_key(|&i| self.basis[i])
                    .map(|i| (i, ratio(i)))
            } else {
                // Harris two-pass ratio test: relax bounds by `slack` to find
                // the step limit, then take the largest pivot within it.
                let slack = 1e-12 * xb.amax().max(1.0);
                let limit = (0..m)
                    .filter(|&i| w[i] > floor)
                    .map(|i| (xb[i].max(0.0) + slack) / w[i])
                    .fold(f64::INFINITY, f64::min);
                (0..m)
                    .filter(|&i| w[i] > floor && xb[i].max(0.0) / w[i] <= limit)
                    .max_by(|&i, &j| {
                        w[i].total_cmp(&w[j])
                            .then(self.basis[j].cmp(&self.basis[i]))
                    })
                    .map(|i| (i, xb[i].max(0.0) / w[i]))
            };
            // No blocking row means an unbounded ray, impossible when a
            // total-mass row is present; treat as converged.
            let Some((r, step)) = leave else {
                return Some(xb);
            };
            if step * w.amax() <= 1e-14 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.basis[r] = col;
        }
        None
    }
}

/// `lu` solve followed by one round of residual correction.
fn refine(a: &DMatrix<f64>, lu: &LU<f64, Dyn, Dyn>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let mut x = lu.solve(rhs)?;
    let correction = lu.solve(&(rhs - a * &x))?;
    x += correction;
    Some(x)
}

pub(crate) fn solve(problem: &StandardForm) -> Outcome {
    let m = problem.rows;
    let n = problem.cols;
    // Shift the right-hand side by the image of a fixed positive vector.
    // Feasibility is preserved and degenerate vertices split apart.
    let mut perturbed = problem.b.clone();
    for j in 0..n {
        let weight = PERTURBATION * (1.0 + (j as f64 * 0.618_033_988_75).fract()) / n as f64;
        for (i, v) in perturbed.iter_mut().enumerate() {
            *v += weight * problem.a[i * n + j];
        }
    }
    let sign: Vec<f64> = perturbed
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut s = Revised {
        p: problem,
        b: perturbed,
        sign,
        basis: (n..n + m).collect(),
    };
    let phase_one = |j: usize| if j >= n { 1.0 } else { 0.0 };
    let Some(xb) = s.run(&phase_one, n) else {
        return Outcome::Stalled;
    };
    let infeasibility: f64 = s
        .basis
        .iter()
        .zip(xb.iter())
        .filter(|(&j, _)| j >= n)
        .map(|(_, &v)| v.abs())
        .sum();
    let scale = problem.b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if infeasibility > 1e-9 * scale {
        return Outcome::Infeasible {
            phase_one_objective: infeasibility,
        };
    }
    // Swap zero-level artificials for structural columns where the basis
    // stays nonsingular; what remains marks a redundant row.
    for r in 0..m {
        if s.basis[r] < n {
            continue;
        }
        let Some(lu) = Some(s.basis_matrix().lu()) else {
            continue;
        };
        let replacement = (0..n).filter(|j| !s.basis.contains(j)).find(|&j| {
            lu.solve(&s.column(j))
                .is_some_and(|w| w[r].abs() > PIVOT_TOLERANCE)
        });
        if let Some(j) = replacement {
            s.basis[r] = j;
        }
    }
    let phase_two = |j: usize| if j < n { -problem.c[j] } else { 0.0 };
    if s.run(&phase_two, n).is_none() {
        return Outcome::Stalled;
    }
    // Reduced costs do not depend on the right-hand side, so the final basis
    // stays optimal for the original one when it is still feasible there.
    s.b = problem.b.clone();
    let Some(xb) = s.run(&phase_two, n) else {
        return Outcome::Stalled;
    };
    let mut x = vec![0.0; n];
    for (k, &j) in s.basis.iter().enumerate() {
        if j < n {
            x[j] = xb[k].max(0.0);
        }
    }
    Outcome::Optimal(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max x0 + 2 x1 s.t. x0 + x1 + x2 = 4, x0 + 3 x1 + x3 = 6
        let p = StandardForm {
            rows: 2,
            cols: 4,
            a: vec![1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0],
            b: vec![4.0, 6.0],
            c: vec![1.0, 2.0, 0.0, 0.0],
        };
        match solve(&p) {
            Outcome::Optimal(x) => {
                assert!((x[0] - 3.0).abs() < 1e-12);
                assert!((x[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_lp() {
        // x0 + x1 = 1, x0 + x1 = 2
        let p = StandardForm {
            rows: 2,
            cols: 2,
            a: vec![1.0, 1.0, 1.0, 1.0],
            b: vec![1.0, 2.0],
            c: vec![1.0, 0.0],
        };
        assert!(matches!(solve(&p), Outcome::Infeasible { .. }));
    }

    #[test]
    fn redundant_rows() {
        // duplicated equality row
        let p = StandardForm {
            rows: 2,
            cols: 2,
            a: vec![1.0, 1.0, 2.0, 2.0],
            b: vec![1.0, 2.0],
            c: vec![0.0, 1.0],
        };
        match solve(&p) {
            Outcome::Optimal(x) => assert!((x[1] - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs() {
        // -x0 - x1 = -1, max x1
        let p = StandardForm {
            rows: 1,
            cols: 2,
            a: vec![-1.0, -1.0],
            b: vec![-1.0],
            c: vec![0.0, 1.0],
        };
        match solve(&p) {
            Outcome::Optimal(x) => assert!((x[1] - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
