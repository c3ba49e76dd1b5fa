//! Grid linear-programming oracle.
//!
//! Over a finite grid symmetric about zero, maximize the mass at zero among
//! nonnegative mass vectors with total mass one whose moments `1..=2k` equal
//! the normal moments. The moment rows are imposed in the equivalent Hermite
//! form `Σ p_i He_j(x_i) = 0`, which spans the same affine set but is far
//! better scaled than raw powers.

use crate::error::{Error, Result};
use crate::moments::{normal_moment, rational_to_f64};
use crate::simplex::{self, Outcome, StandardForm};

/// Points closer than this are merged when the grid is assembled.
pub const COLLAPSE_TOLERANCE: f64 = 1e-12;
/// Masses above this count as active support.
pub const ACTIVE_MASS: f64 = 1e-10;
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
pub const MAX_GRID_POINTS: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    /// Positive points `extent · 100^{(i − count)/(count − 1)}`, `i = 1..=count`.
    Geometric,
}

/// Ascending grid, symmetric about zero, containing zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// Symmetrizes `positive`, adds zero and collapses near-duplicates.
    pub fn from_positive(positive: &[f64]) -> Result<Self> {
        let mut pos: Vec<f64> = positive.iter().map(|x| x.abs()).collect();
        if pos.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite point".into()));
        }
        pos.retain(|&x| x > COLLAPSE_TOLERANCE);
        pos.sort_by(f64::total_cmp);
        pos.dedup_by(|a, b| (*a - *b).abs() <= COLLAPSE_TOLERANCE);
        let mut points: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        points.push(0.0);
        points.extend(pos);
        if points.len() > MAX_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{} points exceed the cap of {MAX_GRID_POINTS}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn zero_index(&self) -> usize {
        self.points.len() / 2
    }

    pub fn contains(&self, x: f64) -> bool {
        self.points
            .iter()
            .any(|&p| (p - x).abs() <= COLLAPSE_TOLERANCE)
    }

    /// Index of `−x_i` for point `i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.points.len() - 1 - i
    }
}

/// `count` uniformly spaced positive points up to `extent`, mirrored, plus
/// zero and the mirrored `include` list.
pub fn build_grid(extent: f64, count: usize, include: &[f64]) -> Result<Grid> {
    build_grid_with(extent, count, Spacing::Uniform, include)
}

pub fn build_grid_with(
    extent: f64,
    count: usize,
    spacing: Spacing,
    include: &[f64],
) -> Result<Grid> {
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "extent must be positive, got {extent}"
        )));
    }
    if count < 3 {
        return Err(Error::InvalidGrid(format!(
            "count must be at least 3, got {count}"
        )));
    }
    let mut positive: Vec<f64> = (1..=count)
        .map(|i| match spacing {
            Spacing::Uniform => extent * i as f64 / count as f64,
            Spacing::Geometric => {
                extent * 100f64.powf((i as f64 - count as f64) / (count as f64 - 1.0))
            }
        })
        .collect();
    positive.extend_from_slice(include);
    Grid::from_positive(&positive)
}

/// Maximize the mass at zero over the grid subject to `2k` moment equalities.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLP {
    pub grid: Grid,
    pub k: usize,
}

impl GridLP {
    pub fn new(grid: Grid, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange {
                k,
                min: 1,
                max: usize::MAX,
            });
        }
        Ok(Self { grid, k })
    }

    /// Constraint rows: total mass, then `He_1 … He_{2k}`.
    fn standard_form(&self) -> StandardForm {
        let x = self.grid.points();
        let cols = x.len();
        let rows = 2 * self.k + 1;
        let mut a = vec![0.0; rows * cols];
        for (j, &xj) in x.iter().enumerate() {
            let mut prev = 1.0;
            let mut cur = xj;
            a[j] = 1.0;
            if rows > 1 {
                a[cols + j] = cur;
            }
            for deg in 2..rows {
                let next = xj * cur - (deg - 1) as f64 * prev;
                prev = cur;
                cur = next;
                a[deg * cols + j] = cur;
            }
        }
        let mut b = vec![0.0; rows];
        b[0] = 1.0;
        for r in 0..rows {
            let row = &mut a[r * cols..(r + 1) * cols];
            let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                row.iter_mut().for_each(|v| *v /= scale);
                b[r] /= scale;
            }
        }
        let mut c = vec![0.0; cols];
        c[self.grid.zero_index()] = 1.0;
        StandardForm {
            rows,
            cols,
            a,
            b,
            c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPSolution {
    pub status: LpStatus,
    /// One entry per grid point; empty when infeasible.
    pub masses: Vec<f64>,
    /// Mass at zero.
    pub objective: f64,
    /// Grid points with mass above [`ACTIVE_MASS`].
    pub active_support: Vec<f64>,
    /// See [`constraint_residual`].
    pub residual: f64,
}

/// Largest violation over total mass and `Σ p x^j = M_j`, `j = 1..=2k`, each
/// moment row measured relative to `max(1, Σ p |x|^j)`.
pub fn constraint_residual(problem: &GridLP, masses: &[f64]) -> f64 {
    let x = problem.grid.points();
    let total: f64 = masses.iter().sum();
    let mut worst = (total - 1.0).abs();
    for j in 1..=2 * problem.k {
        let target = rational_to_f64(&normal_moment(j));
        let mut fitted = 0.0;
        let mut absolute = 0.0;
        for (&xi, &pi) in x.iter().zip(masses) {
            let v = pi * xi.powi(j as i32);
            fitted += v;
            absolute += v.abs();
        }
        worst = worst.max((fitted - target).abs() / absolute.max(1.0));
    }
    worst
}

pub fn solve_lp(problem: &GridLP) -> LPSolution {
    let infeasible = LPSolution {
        status: LpStatus::Infeasible,
        masses: Vec::new(),
        objective: f64::NAN,
        active_support: Vec::new(),
        residual: f64::NAN,
    };
    let masses = match simplex::solve(&problem.standard_form()) {
        Outcome::Optimal(x) => x,
        Outcome::Infeasible { .. } | Outcome::Stalled => return infeasible,
    };
    let residual = constraint_residual(problem, &masses);
    if residual > RESIDUAL_TOLERANCE {
        return LPSolution {
            residual,
            ..infeasible
        };
    }
    let active_support = problem
        .grid
        .points()
        .iter()
        .zip(&masses)
        .filter(|(_, &m)| m > ACTIVE_MASS)
        .map(|(&x, _)| x)
        .collect();
    LPSolution {
        status: LpStatus::Optimal,
        objective: masses[problem.grid.zero_index()],
        masses,
        active_support,
        residual,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    /// `max_x |mass(x) − mass(−x)|` of the solution as returned.
    pub raw_asymmetry: f64,
    /// Whether the raw solution was replaced by its mirror average.
    pub tie_averaged: bool,
    /// Asymmetry of the reported (possibly averaged) masses.
    pub asymmetry: f64,
    /// Constraint residual of the reported masses.
    pub residual: f64,
    pub pass: bool,
}

pub fn asymmetry(grid: &Grid, masses: &[f64]) -> f64 {
    (0..grid.len())
        .map(|i| (masses[i] - masses[grid.mirror(i)]).abs())
        .fold(0.0, f64::max)
}

/// Symmetry of an optimal solution. An asymmetric optimum counts as a tie
/// when its mirror average is feasible with the same mass at zero.
pub fn symmetry_report(problem: &GridLP, masses: &[f64]) -> SymmetryReport {
    let grid = &problem.grid;
    if masses.len() != grid.len() {
        return SymmetryReport {
            raw_asymmetry: f64::NAN,
            tie_averaged: false,
            asymmetry: f64::NAN,
            residual: f64::NAN,
            pass: false,
        };
    }
    let raw = asymmetry(grid, masses);
    if raw <= SYMMETRY_TOLERANCE {
        return SymmetryReport {
            raw_asymmetry: raw,
            tie_averaged: false,
            asymmetry: raw,
            residual: constraint_residual(problem, masses),
            pass: true,
        };
    }
    let averaged: Vec<f64> = (0..grid.len())
        .map(|i| 0.5 * (masses[i] + masses[grid.mirror(i)]))
        .collect();
    let residual = constraint_residual(problem, &averaged);
    let z = grid.zero_index();
    let objective_kept = (averaged[z] - masses[z]).abs() <= SYMMETRY_TOLERANCE;
    SymmetryReport {
        raw_asymmetry: raw,
        tie_averaged: true,
        asymmetry: asymmetry(grid, &averaged),
        residual,
        pass: residual <= RESIDUAL_TOLERANCE && objective_kept,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let s3 = 3f64.sqrt();
        let g = build_grid(5.0, 11, &[s3]).unwrap();
        assert!(g.contains(s3) && g.contains(-s3) && g.contains(0.0));
        assert_eq!(g.len(), 2 * 12 + 1);
        assert_eq!(g.points()[g.zero_index()], 0.0);
        let plain = build_grid(5.0, 11, &[]).unwrap();
        assert_eq!(plain.len(), 23);
        assert!(build_grid(0.0, 11, &[]).is_err());
        assert!(build_grid(5.0, 2, &[]).is_err());
        // 2.5 is already on the uniform grid
        assert_eq!(build_grid(5.0, 10, &[2.5 + 1e-13]).unwrap().len(), 21);
    }

    #[test]
    fn geometric_grid() {
        let g = build_grid_with(4.0, 5, Spacing::Geometric, &[]).unwrap();
        let p = g.points();
        assert!((p[p.len() - 1] - 4.0).abs() < 1e-15);
        assert!((p[g.zero_index() + 1] - 0.04).abs() < 1e-15);
    }

    #[test]
    fn mirror_indices() {
        let g = build_grid(1.0, 3, &[]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.points()[g.mirror(i)], -g.points()[i]);
        }
    }

    #[test]
    fn infeasible_grid() {
        // |x| <= 0.5 cannot carry variance 1
        let problem = GridLP::new(build_grid(0.5, 5, &[]).unwrap(), 1).unwrap();
        assert_eq!(solve_lp(&problem).status, LpStatus::Infeasible);
    }

    #[test]
    fn perturbed_masses_fail_symmetry() {
        let s3 = 3f64.sqrt();
        let problem = GridLP::new(build_grid(2.0, 4, &[s3]).unwrap(), 2).unwrap();
        let sol = solve_lp(&problem);
        assert_eq!(sol.status, LpStatus::Optimal);
        let mut masses = sol.masses.clone();
        let last = masses.len() - 1;
        masses[last] += 0.01;
        masses[0] -= 0.001;
        assert!(!symmetry_report(&problem, &masses).pass);
    }
}
