//! Real root isolation for polynomials with `f64` coefficients.
//!
//! Roots are bracketed by sign changes on a grid, then refined with a
//! safeguarded Newton iteration that falls back to bisection whenever the
//! Newton step leaves the current bracket.

/// Coefficients are stored lowest degree first: `coeffs[i]` multiplies `x^i`.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Value and first derivative in one pass.
pub fn horner_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &c in coeffs.iter().rev() {
        slope = slope * x + value;
        value = value * x + c;
    }
    (value, slope)
}

/// `Σ |c_i| |x|^i`, the natural scale of the rounding error in [`horner`].
pub fn absolute_scale(coeffs: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
}

/// Grid used to look for sign changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    /// Requires a strictly positive lower end.
    Geometric,
}

/// A refined root with its backward-error residual `|p(x)| / Σ|c_i||x|^i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedRoot {
    pub value: f64,
    pub residual: f64,
}

const MAX_REFINE_ITERATIONS: usize = 400;
const MAX_GRID_DOUBLINGS: usize = 12;

fn grid_point(kind: GridKind, lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i == 0 {
        return lo;
    }
    if i == n {
        return hi;
    }
    let t = i as f64 / n as f64;
    match kind {
        GridKind::Uniform => lo + (hi - lo) * t,
        GridKind::Geometric => lo * (hi / lo).powf(t),
    }
}

/// Brackets `[a, b]` with a strict sign change (or an exact zero at `a`).
pub fn sign_change_brackets(
    coeffs: &[f64],
    lo: f64,
    hi: f64,
    kind: GridKind,
    intervals: usize,
) -> Vec<(f64, f64)> {
    let mut brackets = Vec::new();
    let mut prev_x = lo;
    let mut prev_v = horner(coeffs, lo);
    for i in 1..=intervals {
        let x = grid_point(kind, lo, hi, i, intervals);
        let v = horner(coeffs, x);
        if prev_v == 0.0 {
            brackets.push((prev_x, prev_x));
        } else if prev_v.signum() != v.signum() && v != 0.0 {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_v = v;
    }
    if prev_v == 0.0 {
        brackets.push((prev_x, prev_x));
    }
    brackets
}

/// Refine one bracketed root. Returns `None` if the bracket has no sign change.
pub fn refine_bracketed(coeffs: &[f64], mut a: f64, mut b: f64) -> Option<RefinedRoot> {
    let residual = |x: f64| {
        let scale = absolute_scale(coeffs, x);
        if scale == 0.0 {
            0.0
        } else {
            horner(coeffs, x).abs() / scale
        }
    };
    if a == b {
        return Some(RefinedRoot {
            value: a,
            residual: residual(a),
        });
    }
    let fa = horner(coeffs, a);
    let fb = horner(coeffs, b);
    if fa == 0.0 {
        return Some(RefinedRoot {
            value: a,
            residual: 0.0,
        });
    }
    if fb == 0.0 {
        return Some(RefinedRoot {
            value: b,
            residual: 0.0,
        });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let a_negative = fa < 0.0;
    let mut x = 0.5 * (a + b);
    let mut best = x;
    let mut best_abs = f64::INFINITY;
    for _ in 0..MAX_REFINE_ITERATIONS {
        let (f, df) = horner_with_derivative(coeffs, x);
        if f.abs() < best_abs {
            best_abs = f.abs();
            best = x;
        }
        if f == 0.0 {
            break;
        }
        if (f < 0.0) == a_negative {
            a = x;
        } else {
            b = x;
        }
        if b - a <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == x {
            break;
        }
        x = next;
    }
    for candidate in [a, b] {
        let f = horner(coeffs, candidate).abs();
        if f < best_abs {
            best_abs = f;
            best = candidate;
        }
    }
    Some(RefinedRoot {
        value: best,
        residual: residual(best),
    })
}

/// Outcome of [`real_roots_in`].
#[derive(Debug, Clone, PartialEq)]
pub struct RootSearch {
    pub roots: Vec<RefinedRoot>,
    /// Grid intervals used by the final pass.
    pub intervals: usize,
}

/// Locate the real roots of `coeffs` inside `[lo, hi]`, doubling the grid
/// density until `expected` sign changes are seen (or the doubling cap is
/// hit, in which case whatever was found is returned).
pub fn real_roots_in(
    coeffs: &[f64],
    lo: f64,
    hi: f64,
    kind: GridKind,
    expected: usize,
    initial_intervals: usize,
) -> RootSearch {
    let mut intervals = initial_intervals.max(8);
    let mut brackets = sign_change_brackets(coeffs, lo, hi, kind, intervals);
    for _ in 0..MAX_GRID_DOUBLINGS {
        if brackets.len() >= expected {
            break;
        }
        intervals *= 2;
        brackets = sign_change_brackets(coeffs, lo, hi, kind, intervals);
    }
    let mut roots: Vec<RefinedRoot> = brackets
        .into_iter()
        .filter_map(|(a, b)| refine_bracketed(coeffs, a, b))
        .collect();
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    roots.dedup_by(|x, y| x.value == y.value);
    RootSearch { roots, intervals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct_expansion() {
        // 2 - 3x + x^3
        let c = [2.0, -3.0, 0.0, 1.0];
        assert_eq!(horner(&c, 2.0), 4.0);
        let (v, d) = horner_with_derivative(&c, 2.0);
        assert_eq!(v, 4.0);
        assert_eq!(d, 9.0);
        assert_eq!(absolute_scale(&c, -2.0), 2.0 + 6.0 + 8.0);
    }

    #[test]
    fn finds_roots_of_quadratic() {
        // (u - 1)(u - 7)
        let c = [7.0, -8.0, 1.0];
        let found = real_roots_in(&c, 0.1, 20.0, GridKind::Geometric, 2, 16);
        let vals: Vec<f64> = found.roots.iter().map(|r| r.value).collect();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 7.0).abs() < 1e-14);
    }

    #[test]
    fn close_roots_trigger_grid_doubling() {
        // (u - 1)(u - 1.0001)
        let c = [1.0001, -2.0001, 1.0];
        let found = real_roots_in(&c, 0.5, 2.0, GridKind::Uniform, 2, 8);
        assert_eq!(found.roots.len(), 2);
        assert!(found.intervals > 8);
    }

    #[test]
    fn no_sign_change_gives_none() {
        assert!(refine_bracketed(&[1.0, 0.0, 1.0], -1.0, 1.0).is_none());
    }
}
