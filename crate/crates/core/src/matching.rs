//! Probabilities on an arbitrary support that reproduce a target moment
//! vector: `Σ_j p_j x_j^i = M_i` for `i = 1..=n`, with the remaining mass
//! `p_0 = 1 − Σ p_j` implicitly placed at zero.
//!
//! Three interchangeable solvers implement [`ProbabilitySolver`]: the
//! explicit inverse-Vandermonde formula written with elementary symmetric
//! functions, the same formula evaluated exactly, and a dense LU solve that
//! serves as the oracle. [`SolverRegistry`] maps
//! names to solvers for runtime selection.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::{linalg, moments};

/// Default cap above which a [`MatchResult`] carries a conditioning warning.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Ordered distinct nonzero mass points.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    points: Vec<f64>,
}

impl Support {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSupport("empty support".into()));
        }
        for (i, &x) in points.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidSupport(format!("point {i} is not finite")));
            }
            if x == 0.0 {
                return Err(Error::InvalidSupport(format!("point {i} is zero")));
            }
            if points[..i].contains(&x) {
                return Err(Error::InvalidSupport(format!("duplicate point {x}")));
            }
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

    pub fn is_positive_increasing(&self) -> bool {
        self.points[0] > 0.0 && self.points.windows(2).all(|w| w[0] < w[1])
    }

    fn with_point(&self, j: usize, value: f64) -> Result<Self> {
        let mut points = self.points.clone();
        points[j] = value;
        Self::new(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// May be negative: the solver does not enforce positivity.
    pub probabilities: Vec<f64>,
    /// `Σ p_j`.
    pub r: f64,
    /// Forward-error amplification estimate; the moment residual is expected
    /// to stay below `condition_estimate · 1e−14`.
    pub condition_estimate: f64,
    pub warning: Option<String>,
}

impl MatchResult {
    fn new(probabilities: Vec<f64>, condition_estimate: f64, cap: f64) -> Self {
        let r = probabilities.iter().sum();
        let warning = (condition_estimate > cap)
            .then(|| format!("condition estimate {condition_estimate:.3e} exceeds cap {cap:.3e}"));
        Self {
            probabilities,
            r,
            condition_estimate,
            warning,
        }
    }
}

/// `e_0, …, e_n` of `values` by incremental expansion of `Π (1 + x_i t)`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    expand(values)
}

fn expand<T: Clone + Zero + One>(values: &[T]) -> Vec<T> {
    let mut e = vec![T::zero(); values.len() + 1];
    e[0] = T::one();
    for (count, x) in values.iter().enumerate() {
        for m in (1..=count + 1).rev() {
            e[m] = e[m].clone() + x.clone() * e[m - 1].clone();
        }
    }
    e
}

/// `e_0, …, e_{n−1}` of `values` with entry `j` deleted.
pub fn leave_one_out_symmetric(values: &[f64], j: usize) -> Vec<f64> {
    let rest: Vec<f64> = values
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| (i != j).then_some(x))
        .collect();
    elementary_symmetric(&rest)
}

fn check_lengths(support: &Support, moments: &[f64]) -> Result<()> {
    if support.len() != moments.len() {
        return Err(Error::LengthMismatch {
            points: support.len(),
            moments: moments.len(),
        });
    }
    Ok(())
}

/// Sum over `j` of `Σ_i |M_{n−i+1}| e_{i−1}(|x| without x_j) / |φ_j|`, each
/// weighted by the largest power of `|x_j|` that enters the moment equations.
fn condition_estimate(x: &[f64], moments: &[f64]) -> f64 {
    let n = x.len();
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    (0..n)
        .map(|j| {
            let e = leave_one_out_symmetric(&abs, j);
            let numerator: f64 = (1..=n).map(|i| moments[n - i].abs() * e[i - 1]).sum();
            let denominator = (x[j] * leave_one_out_product(x, j)).abs();
            let reach = abs[j].max(abs[j].powi(n as i32));
            numerator / denominator * reach
        })
        .sum()
}

/// `Π_{k≠j} (x_j − x_k)`.
fn leave_one_out_product(x: &[f64], j: usize) -> f64 {
    x.iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| x[j] - xk)
        .product()
}

/// Explicit solution: with `x_0 = 0` adjoined, the inverse Vandermonde
/// element gives
///
/// `p_j = Σ_{i=1}^{n} (−1)^{i−1} M_{n−i+1} e_{i−1}(x without x_j) / (x_j Π_{k≠j}(x_j − x_k))`.
pub fn solve_probabilities(support: &Support, moments: &[f64]) -> Result<MatchResult> {
    solve_probabilities_with(support, moments, DEFAULT_CONDITION_CAP)
}

pub fn solve_probabilities_with(
    support: &Support,
    moments: &[f64],
    condition_cap: f64,
) -> Result<MatchResult> {
    check_lengths(support, moments)?;
    let x = support.points();
    let n = x.len();
    let probabilities = (0..n)
        .map(|j| {
            let e = leave_one_out_symmetric(x, j);
            // φ_j = 1 / (x_j Π_{k≠j}(x_j − x_k)) and Ψ_i = (−1)^{i−1} e_{i−1}.
            let numerator: f64 = (1..=n)
                .map(|i| {
                    let term = moments[n - i] * e[i - 1];
                    if i % 2 == 1 {
                        term
                    } else {
                        -term
                    }
                })
                .sum();
            numerator / (x[j] * leave_one_out_product(x, j))
        })
        .collect();
    Ok(MatchResult::new(
        probabilities,
        condition_estimate(x, moments),
        condition_cap,
    ))
}

pub const REFINEMENT_STEPS: usize = 3;

fn power_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut a = vec![0.0; n * n];
    for (j, &xj) in x.iter().enumerate() {
        let mut p = xj;
        for i in 0..n {
            a[i * n + j] = p;
            p *= xj;
        }
    }
    a
}

/// The closed form of [`solve_probabilities`] evaluated in exact rational
/// arithmetic on the `f64` inputs, rounded once at the end. The alternating
/// numerator cancels badly in floating point once `n` passes about 7 on
/// widely spread positive supports.
pub fn solve_probabilities_exact(support: &Support, moments: &[f64]) -> Result<MatchResult> {
    check_lengths(support, moments)?;
    let x = support.points();
    let n = x.len();
    let xq = to_rationals(x)?;
    let mq = to_rationals(moments)?;
    let probabilities = (0..n)
        .map(|j| {
            let rest: Vec<BigRational> = xq
                .iter()
                .enumerate()
                .filter_map(|(i, v)| (i != j).then(|| v.clone()))
                .collect();
            let e = expand(&rest);
            let mut numerator = BigRational::zero();
            for i in 1..=n {
                let term = &mq[n - i] * &e[i - 1];
                if i % 2 == 1 {
                    numerator += term;
                } else {
                    numerator -= term;
                }
            }
            let denominator = rest
                .iter()
                .fold(xq[j].clone(), |acc, xk| acc * (&xq[j] - xk));
            moments::rational_to_f64(&(numerator / denominator))
        })
        .collect();
    Ok(MatchResult::new(
        probabilities,
        condition_estimate(x, moments),
        DEFAULT_CONDITION_CAP,
    ))
}

fn to_rationals(values: &[f64]) -> Result<Vec<BigRational>> {
    values
        .iter()
        .map(|&v| {
            BigRational::from_float(v)
                .ok_or_else(|| Error::InvalidSupport(format!("{v} is not finite")))
        })
        .collect()
}

/// `power_matrix` with every power formed exactly from the `f64` points.
fn exact_power_matrix(x: &[f64]) -> Result<Vec<BigRational>> {
    let n = x.len();
    let xq = to_rationals(x)?;
    let mut a = vec![BigRational::zero(); n * n];
    for (j, xj) in xq.iter().enumerate() {
        let mut p = xj.clone();
        for i in 0..n {
            a[i * n + j] = p.clone();
            p *= xj;
        }
    }
    Ok(a)
}

/// Oracle: LU solve of the `n × n` system `V p = M`, `V[i][j] = x_j^{i+1}`,
/// with [`REFINEMENT_STEPS`] rounds of exact-residual refinement.
pub fn solve_probabilities_direct(support: &Support, moments: &[f64]) -> Result<MatchResult> {
    check_lengths(support, moments)?;
    let x = support.points();
    let exact = exact_power_matrix(x)?;
    let probabilities = linalg::solve_exact_refined(x.len(), &exact, moments, REFINEMENT_STEPS)?;
    Ok(MatchResult::new(
        probabilities,
        condition_estimate(x, moments),
        DEFAULT_CONDITION_CAP,
    ))
}

/// `r = Σ p_j` in a single expression:
/// `r = Σ_{m=1}^{n} (−1)^{m+1} e_{n−m}(x) M_m / e_n(x)`.
pub fn probability_sum(support: &Support, moments: &[f64]) -> Result<f64> {
    check_lengths(support, moments)?;
    let x = support.points();
    let n = x.len();
    let e = elementary_symmetric(x);
    let numerator: f64 = (1..=n)
        .map(|m| {
            let term = e[n - m] * moments[m - 1];
            if m % 2 == 1 {
                term
            } else {
                -term
            }
        })
        .sum();
    Ok(numerator / e[n])
}

/// `max_i |Σ_j p_j x_j^i − M_i|`.
pub fn moment_residual(support: &Support, probabilities: &[f64], moments: &[f64]) -> f64 {
    let x = support.points();
    (0..moments.len())
        .map(|i| {
            let fitted: f64 = x
                .iter()
                .zip(probabilities)
                .map(|(&xj, &pj)| pj * xj.powi(i as i32 + 1))
                .sum();
            (fitted - moments[i]).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    /// The matching probability is zero, so the sign carries no information.
    Indeterminate,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Indeterminate => "?",
        })
    }
}

/// Partial derivatives of `r* = Σ p_j` with respect to each support point.
#[derive(Debug, Clone, PartialEq)]
pub struct RStarPartials {
    pub values: Vec<f64>,
    pub signs: Vec<Sign>,
    pub probabilities: Vec<f64>,
}

impl RStarPartials {
    /// `Some(true)` when consecutive signs strictly alternate, `None` when
    /// any sign is indeterminate.
    pub fn alternates(&self) -> Option<bool> {
        if self.signs.contains(&Sign::Indeterminate) {
            return None;
        }
        Some(self.signs.windows(2).all(|w| w[0] != w[1]))
    }
}

/// Analytic partials of `r*` on a positive increasing support.
///
/// Factoring `1/y_j` out of the closed form for `r*` leaves
/// `r* = p_j Π_{i≠j}(y_i − y_j) / Π_{i≠j} y_i + g(y without y_j)`, where the
/// first factor carries the whole `1/y_j` dependence. Hence
/// `∂r*/∂y_j = −(1/y_j) · p_j Π_{i≠j}(y_i − y_j) / Π_{i≠j} y_i`.
pub fn r_star_partials(support: &Support, moments: &[f64]) -> Result<RStarPartials> {
    if !support.is_positive_increasing() {
        return Err(Error::InvalidSupport(
            "partials need strictly positive increasing points".into(),
        ));
    }
    let solved = solve_probabilities(support, moments)?;
    let y = support.points();
    let values: Vec<f64> = (0..y.len())
        .map(|j| {
            let ratio: f64 = (0..y.len())
                .filter(|&i| i != j)
                .map(|i| (y[i] - y[j]) / y[i])
                .product();
            -solved.probabilities[j] * ratio / y[j]
        })
        .collect();
    let signs = values
        .iter()
        .zip(&solved.probabilities)
        .map(|(&d, &p)| {
            if p == 0.0 {
                Sign::Indeterminate
            } else if d > 0.0 {
                Sign::Positive
            } else {
                Sign::Negative
            }
        })
        .collect();
    Ok(RStarPartials {
        values,
        signs,
        probabilities: solved.probabilities,
    })
}

/// Central finite differences of `r` with step `rel_step · y_j`. Both
/// evaluations and their difference are exact over the perturbed points.
pub fn r_star_partials_fd(support: &Support, moments: &[f64], rel_step: f64) -> Result<Vec<f64>> {
    check_lengths(support, moments)?;
    let y = support.points();
    let mq = to_rationals(moments)?;
    (0..y.len())
        .map(|j| {
            let h = rel_step * y[j].abs();
            let up = support.with_point(j, y[j] + h)?;
            let down = support.with_point(j, y[j] - h)?;
            let width = to_rationals(&[up.points()[j]])?[0].clone()
                - to_rationals(&[down.points()[j]])?[0].clone();
            let diff = exact_probability_sum(up.points(), &mq)?
                - exact_probability_sum(down.points(), &mq)?;
            Ok(moments::rational_to_f64(&(diff / width)))
        })
        .collect()
}

fn exact_probability_sum(x: &[f64], moments: &[BigRational]) -> Result<BigRational> {
    let n = x.len();
    let e = expand(&to_rationals(x)?);
    let mut numerator = BigRational::zero();
    for m in 1..=n {
        let term = e[n - m].clone() * moments[m - 1].clone();
        if m % 2 == 1 {
            numerator += term;
        } else {
            numerator -= term;
        }
    }
    Ok(numerator / e[n].clone())
}

/// Partials of `F = Σ_j p_j x_j^power` with respect to each `x_l`, where `p`
/// solves the `n` moment equations. `power = 0` gives the partials of `r`.
///
/// Differentiating `V p = M` gives `∂p/∂x_l = −V⁻¹ (∂V/∂x_l) p`, so
/// `∂F/∂x_l = p_l (power · x_l^{power−1} − zᵀ d_l)` with `Vᵀ z = a`,
/// `a_j = x_j^power` and `d_l[i] = (i+1) x_l^i`.
pub fn functional_partials(support: &Support, moments: &[f64], power: u32) -> Result<Vec<f64>> {
    check_lengths(support, moments)?;
    let x = support.points();
    let n = x.len();
    let v = power_matrix(x);
    let p = linalg::solve_dense(n, &v, moments)?;
    let a: Vec<f64> = x.iter().map(|xj| xj.powi(power as i32)).collect();
    let z = linalg::solve_dense_transposed(n, &v, &a)?;
    Ok((0..n)
        .map(|l| {
            let own = if power == 0 {
                0.0
            } else {
                power as f64 * x[l].powi(power as i32 - 1)
            };
            let through: f64 = (0..n)
                .map(|i| z[i] * (i as f64 + 1.0) * x[l].powi(i as i32))
                .sum();
            p[l] * (own - through)
        })
        .collect())
}

/// A named method for solving the moment-matching system.
pub trait ProbabilitySolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, support: &Support, moments: &[f64]) -> Result<MatchResult>;
}

/// Closed-form elementary-symmetric-function solution.
#[derive(Debug, Default, Clone, Copy)]
pub struct SymmetricFunctionSolver;

impl ProbabilitySolver for SymmetricFunctionSolver {
    fn name(&self) -> &'static str {
        "symmetric-functions"
    }

    fn solve(&self, support: &Support, moments: &[f64]) -> Result<MatchResult> {
        solve_probabilities(support, moments)
    }
}

/// Closed form evaluated exactly, see [`solve_probabilities_exact`].
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactSymmetricFunctionSolver;

impl ProbabilitySolver for ExactSymmetricFunctionSolver {
    fn name(&self) -> &'static str {
        "symmetric-functions-exact"
    }

    fn solve(&self, support: &Support, moments: &[f64]) -> Result<MatchResult> {
        solve_probabilities_exact(support, moments)
    }
}

/// Dense LU solve.
#[derive(Debug, Default, Clone, Copy)]
pub struct LuSolver;

impl ProbabilitySolver for LuSolver {
    fn name(&self) -> &'static str {
        "lu"
    }

    fn solve(&self, support: &Support, moments: &[f64]) -> Result<MatchResult> {
        solve_probabilities_direct(support, moments)
    }
}

/// Solvers registered by name, in registration order.
pub struct SolverRegistry {
    solvers: Vec<Box<dyn ProbabilitySolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: Vec::new(),
        }
    }

    /// Registering a name twice replaces the earlier entry.
    pub fn register(&mut self, solver: Box<dyn ProbabilitySolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ProbabilitySolver> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn ProbabilitySolver> {
        self.solvers.iter().map(|s| s.as_ref())
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(SymmetricFunctionSolver));
        registry.register(Box::new(ExactSymmetricFunctionSolver));
        registry.register(Box::new(LuSolver));
        registry
    }
}

/// Solver used by the extremal construction.
pub const DEFAULT_SOLVER: &str = "symmetric-functions-exact";
