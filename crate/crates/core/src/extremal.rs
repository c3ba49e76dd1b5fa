//! Least favorable symmetric distributions.
//!
//! For an even number `k` of matched even moments the maximizer of the mass
//! at zero puts mass `q_j` at `±t_j`, where `t_j²` are the squared positive
//! roots of `He_{k+1}`, and the rest at zero. All moment systems are solved
//! in `u = t²`, where the even moment equations become
//! `Σ_j q_j u_j^i = M_{2i} / 2`.
//!
//! For odd `k` there is no maximizer. [`odd_case_sweep`] fixes the largest
//! node, solves for the remaining nodes and masses, and shows the mass at
//! zero climbing toward the `k − 1` answer as the largest node grows.

use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::RationalMatrix;
use crate::hermite::{self, HermitePolynomial, DEFAULT_ROOT_TOLERANCE};
use crate::linalg;
use crate::matching::{self, ExactSymmetricFunctionSolver, ProbabilitySolver, Support};
use crate::moments::{self, half_even_normal_moments, rational_to_f64};
use crate::roots::{self, GridKind};

pub const MAX_EVEN_K: usize = 40;
pub const MAX_ODD_K: usize = 15;

/// Tolerance used by [`verify_half_bound`].
pub const HALF_BOUND_TOLERANCE: f64 = 1e-10;

/// How the side masses of an extremal distribution were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassSource {
    /// Moment equations solved by the named [`ProbabilitySolver`].
    Solver(&'static str),
    /// Gauss–Hermite weights `(N−1)! / (N · He_{N−1}(t)²)`, used when the
    /// moment solve loses the sign of a tiny tail weight.
    QuadratureWeights,
}

impl fmt::Display for MassSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Solver(name) => f.write_str(name),
            Self::QuadratureWeights => f.write_str("quadrature-weights"),
        }
    }
}

/// Mass `q_j` at each of `±t_j` plus `p₀` at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDistribution {
    positive_nodes: Vec<f64>,
    side_masses: Vec<f64>,
    center_mass: f64,
    matched_even_moments: usize,
    mass_source: Option<MassSource>,
}

impl SymmetricDistribution {
    /// Validates ordering, positivity and `p₀ = 1 − 2 Σ q_j ∈ [0, 1]`.
    pub fn new(
        positive_nodes: Vec<f64>,
        side_masses: Vec<f64>,
        matched_even_moments: usize,
    ) -> Result<Self> {
        if positive_nodes.len() != side_masses.len() {
            return Err(Error::LengthMismatch {
                points: positive_nodes.len(),
                moments: side_masses.len(),
            });
        }
        if positive_nodes.first().is_some_and(|&t| t <= 0.0)
            || positive_nodes.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidSupport(
                "nodes must be positive and increasing".into(),
            ));
        }
        if let Some(q) = side_masses.iter().find(|&&q| !(q > 0.0)) {
            return Err(Error::Inconsistent(format!("nonpositive side mass {q}")));
        }
        let center_mass = 1.0 - 2.0 * side_masses.iter().sum::<f64>();
        if !(0.0..=1.0).contains(&center_mass) {
            return Err(Error::Inconsistent(format!(
                "center mass {center_mass} outside [0, 1]"
            )));
        }
        Ok(Self {
            positive_nodes,
            side_masses,
            center_mass,
            matched_even_moments,
            mass_source: None,
        })
    }

    pub fn mass_source(&self) -> Option<MassSource> {
        self.mass_source
    }

    pub fn positive_nodes(&self) -> &[f64] {
        &self.positive_nodes
    }

    pub fn node_squares(&self) -> Vec<f64> {
        self.positive_nodes.iter().map(|t| t * t).collect()
    }

    pub fn side_masses(&self) -> &[f64] {
        &self.side_masses
    }

    /// `p₀`.
    pub fn center_mass(&self) -> f64 {
        self.center_mass
    }

    pub fn matched_even_moments(&self) -> usize {
        self.matched_even_moments
    }

    /// Total mass on the positive half-line.
    pub fn r_star(&self) -> f64 {
        self.side_masses.iter().sum()
    }

    /// `P(X ≤ 0)`, atom included.
    pub fn cdf_at_zero(&self) -> f64 {
        1.0 - self.r_star()
    }

    /// All atoms as `(location, mass)`, ascending by location.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self
            .positive_nodes
            .iter()
            .zip(&self.side_masses)
            .rev()
            .map(|(&t, &q)| (-t, q))
            .collect();
        atoms.push((0.0, self.center_mass));
        atoms.extend(
            self.positive_nodes
                .iter()
                .zip(&self.side_masses)
                .map(|(&t, &q)| (t, q)),
        );
        atoms
    }

    /// `E X^{2i}` of the full symmetric distribution.
    pub fn even_moment(&self, i: usize) -> f64 {
        if i == 0 {
            return self.center_mass + 2.0 * self.r_star();
        }
        2.0 * self
            .positive_nodes
            .iter()
            .zip(&self.side_masses)
            .map(|(&t, &q)| q * (t * t).powi(i as i32))
            .sum::<f64>()
    }

    /// Largest relative error `|Σ q_j t_j^{2i} − M_{2i}/2| / (M_{2i}/2)` over
    /// `i = 1..=up_to`.
    pub fn half_moment_residual(&self, up_to: usize) -> f64 {
        let target = half_even_normal_moments(up_to);
        (1..=up_to)
            .map(|i| ((self.even_moment(i) / 2.0) - target[i - 1]).abs() / target[i - 1])
            .fold(0.0, f64::max)
    }
}

fn check_even_k(k: usize) -> Result<()> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::OddMomentCount(k));
    }
    if k > MAX_EVEN_K {
        return Err(Error::OutOfRange {
            k,
            min: 2,
            max: MAX_EVEN_K,
        });
    }
    Ok(())
}

/// The least favorable distribution for `k` matched even moments, `k` even.
pub fn extremal_even(k: usize) -> Result<SymmetricDistribution> {
    extremal_even_with(k, DEFAULT_ROOT_TOLERANCE, &ExactSymmetricFunctionSolver)
}

pub fn extremal_even_with(
    k: usize,
    root_tolerance: f64,
    solver: &dyn ProbabilitySolver,
) -> Result<SymmetricDistribution> {
    check_even_k(k)?;
    let squares = hermite::nonzero_root_squares(k + 1, root_tolerance)?;
    let support = Support::new(squares.values.clone())?;
    let nodes = squares.positive_roots();
    let solved = solver.solve(&support, &half_even_normal_moments(k / 2))?;
    let (masses, source) = if solved.probabilities.iter().all(|&q| q > 0.0) {
        (solved.probabilities, MassSource::Solver(solver.name()))
    } else {
        // Tail weights far below the solve's absolute error can come out with
        // the wrong sign; only accept the swap if the two agree elsewhere.
        let weights = quadrature_weights(&nodes, k + 1);
        let scale = weights.iter().copied().fold(0.0, f64::max);
        let disagreement = weights
            .iter()
            .zip(&solved.probabilities)
            .map(|(w, q)| (w - q).abs())
            .fold(0.0, f64::max);
        if disagreement > 1e-8 * scale {
            return Err(Error::Inconsistent(format!(
                "solved side masses for k = {k} are not all positive and differ from \
                 quadrature weights by {disagreement:.3e}"
            )));
        }
        (weights, MassSource::QuadratureWeights)
    };
    let mut d = SymmetricDistribution::new(nodes, masses, k)?;
    d.mass_source = Some(source);
    Ok(d)
}

/// Normalized weights of the `points`-point Gauss–Hermite rule at the given
/// positive nodes: `(N−1)! / (N · He_{N−1}(t)²)`.
pub fn quadrature_weights(nodes: &[f64], points: usize) -> Vec<f64> {
    let log_factorial: f64 = (1..points).map(|i| (i as f64).ln()).sum();
    nodes
        .iter()
        .map(|&t| {
            // He_{N−1}(t) by the three-term recursion
            let (mut prev, mut cur) = (1.0f64, t);
            for m in 1..points - 1 {
                let next = t * cur - m as f64 * prev;
                prev = cur;
                cur = next;
            }
            let he = if points == 1 { 1.0 } else { cur };
            (log_factorial - (points as f64).ln() - 2.0 * he.abs().ln()).exp()
        })
        .collect()
}

/// `F(0) − Φ(0) = ½ − r* = p₀ / 2`.
pub fn deviation_at_zero(d: &SymmetricDistribution) -> f64 {
    0.5 - d.r_star()
}

/// One line of a [`HalfBoundReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            pass: residual <= tolerance,
        }
    }
}

/// Comparison of the constructed distribution against the exact bound.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfBoundReport {
    pub k: usize,
    pub p0: f64,
    pub r_star: f64,
    pub deviation: f64,
    pub bound: BigRational,
    pub s_hermite: BigRational,
    pub s_symmetric: f64,
    pub checks: Vec<Check>,
}

impl HalfBoundReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `s` from the elementary symmetric functions of the node squares:
/// `s = M_{2k} Σ_{i=0}^{n} (−1)^i e_{n−i}(u) M_{2i} / e_n(u)`, `n = k/2`.
pub fn s_from_root_squares(node_squares: &[f64], k: usize) -> f64 {
    let n = node_squares.len();
    let e = matching::elementary_symmetric(node_squares);
    let sum: f64 = (0..=n)
        .map(|i| {
            let term = e[n - i] * rational_to_f64(&moments::normal_moment(2 * i));
            if i % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum();
    rational_to_f64(&moments::normal_moment(2 * k)) * sum / e[n]
}

pub fn verify_half_bound(k: usize) -> Result<HalfBoundReport> {
    let poly = hermite::hermite_coefficients(k + 1)?;
    verify_half_bound_with(k, &poly)
}

/// [`verify_half_bound`] with the Hermite polynomial used for the exact `s`
/// supplied by the caller.
pub fn verify_half_bound_with(k: usize, poly: &HermitePolynomial) -> Result<HalfBoundReport> {
    let d = extremal_even(k)?;
    let bound = moments::lindsay_bound(k)?;
    let bound_f = rational_to_f64(&bound);
    let s_hermite = moments::s_from_polynomial(poly, k)?;
    let s_h = rational_to_f64(&s_hermite);
    let s_symmetric = s_from_root_squares(&d.node_squares(), k);
    let m2k = rational_to_f64(&moments::normal_moment(2 * k));
    let p0 = d.center_mass();
    let r_star = d.r_star();
    let deviation = deviation_at_zero(&d);
    let tol = HALF_BOUND_TOLERANCE;
    let checks = vec![
        Check::new("p0-equals-bound", (p0 - bound_f).abs(), tol),
        Check::new(
            "s-hermite-vs-symmetric",
            (s_h - s_symmetric).abs() / s_h.abs().max(f64::MIN_POSITIVE),
            tol,
        ),
        Check::new(
            "r-star-from-s",
            (r_star - (1.0 - s_h / m2k) / 2.0).abs(),
            tol,
        ),
        Check::new(
            "deviation-equals-half-bound",
            (deviation - bound_f / 2.0).abs(),
            tol,
        ),
    ];
    Ok(HalfBoundReport {
        k,
        p0,
        r_star,
        deviation,
        bound,
        s_hermite,
        s_symmetric,
        checks,
    })
}

/// One schedule entry of an odd-`k` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Squared largest node `T²`.
    pub largest_node_square: f64,
    pub feasible: bool,
    /// Squares of the remaining nodes, ascending.
    pub free_node_squares: Vec<f64>,
    /// Side masses for the free nodes followed by the tail mass.
    pub masses: Vec<f64>,
    pub r_star: f64,
    pub p0: f64,
    pub tail_mass: f64,
    /// `(M_{2k} / 2) / T^{2k}`.
    pub tail_bound: f64,
    /// Largest relative error over all `k` half-moment equations.
    pub moment_residual: f64,
    /// `∂r*/∂T²` with the other nodes held fixed.
    pub raw_largest_partial: f64,
    /// `dr*/dT²` along the sweep, with the free nodes adjusting so all `k`
    /// equations keep holding.
    pub sweep_derivative: f64,
    pub diagnostic: Option<String>,
}

impl SweepRecord {
    pub fn largest_node(&self) -> f64 {
        self.largest_node_square.sqrt()
    }

    fn infeasible(largest_node_square: f64, k: usize, why: String) -> Self {
        Self {
            largest_node_square,
            feasible: false,
            free_node_squares: Vec::new(),
            masses: Vec::new(),
            r_star: f64::NAN,
            p0: f64::NAN,
            tail_mass: f64::NAN,
            tail_bound: tail_bound(k, largest_node_square),
            moment_residual: f64::NAN,
            raw_largest_partial: f64::NAN,
            sweep_derivative: f64::NAN,
            diagnostic: Some(why),
        }
    }
}

/// Records of an odd-`k` escape-to-infinity study.
#[derive(Debug, Clone, PartialEq)]
pub struct OddCaseSweep {
    pub k: usize,
    /// Exact bound for `k − 1` moments, the limit of `p₀`.
    pub limit: BigRational,
    pub schedule: Vec<f64>,
    pub records: Vec<SweepRecord>,
}

impl OddCaseSweep {
    pub fn feasible_records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| r.feasible)
    }

    /// Whether `p₀` strictly increases across feasible records.
    pub fn p0_strictly_increasing(&self) -> bool {
        let p: Vec<f64> = self.feasible_records().map(|r| r.p0).collect();
        p.windows(2).all(|w| w[1] > w[0])
    }
}

fn tail_bound(k: usize, largest_node_square: f64) -> f64 {
    rational_to_f64(&moments::normal_moment(2 * k)) / 2.0 / largest_node_square.powi(k as i32)
}

/// Upper end of [`auto_schedule`].
pub const AUTO_SCHEDULE_END: f64 = 1e4;

/// Records whose relative moment residual exceeds this are marked
/// infeasible: double precision has run out.
pub const SWEEP_RESIDUAL_LIMIT: f64 = 1e-6;

/// Geometric schedule of `count` squared largest nodes from four times the
/// largest `k − 1` node square up to [`AUTO_SCHEDULE_END`].
pub fn auto_schedule(k: usize, count: usize) -> Result<Vec<f64>> {
    check_odd_k(k)?;
    let start = 4.0 * largest_even_node_square(k - 1)?;
    let end = AUTO_SCHEDULE_END.max(2.0 * start);
    if count <= 1 {
        return Ok(vec![end]);
    }
    Ok((0..count)
        .map(|i| start * (end / start).powf(i as f64 / (count - 1) as f64))
        .collect())
}

fn largest_even_node_square(k: usize) -> Result<f64> {
    let squares = hermite::nonzero_root_squares(k + 1, DEFAULT_ROOT_TOLERANCE)?;
    Ok(*squares.values.last().expect("k >= 2 has a node"))
}

fn check_odd_k(k: usize) -> Result<()> {
    if k < 3 || k % 2 == 0 {
        return Err(Error::EvenMomentCount(k));
    }
    if k > MAX_ODD_K {
        return Err(Error::OutOfRange {
            k,
            min: 3,
            max: MAX_ODD_K,
        });
    }
    Ok(())
}

/// Sweep the squared largest node over `schedule` for odd `k`.
pub fn odd_case_sweep(k: usize, schedule: &[f64]) -> Result<OddCaseSweep> {
    check_odd_k(k)?;
    if schedule.is_empty() {
        return Err(Error::InvalidSchedule("empty schedule".into()));
    }
    if schedule.iter().any(|t| !t.is_finite()) || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule(
            "entries must be finite and strictly increasing".into(),
        ));
    }
    let floor = largest_even_node_square(k - 1)?;
    if schedule[0] <= floor {
        return Err(Error::InvalidSchedule(format!(
            "first entry {} must exceed the largest k - 1 node square {floor}",
            schedule[0]
        )));
    }
    let records = schedule.iter().map(|&t| sweep_record(k, t)).collect();
    Ok(OddCaseSweep {
        k,
        limit: moments::lindsay_bound(k - 1)?,
        schedule: schedule.to_vec(),
        records,
    })
}

/// Node polynomial `(u − T) ρ(u)`, with `ρ` monic of degree `d = (k − 1)/2`,
/// must annihilate `u^i`, `i < d`, under the functional
/// `L[u^m] = M_{2m+2} / 2`. That is `d` linear equations for the lower
/// coefficients of `ρ`, solved exactly.
fn free_node_polynomial(k: usize, largest: f64) -> Option<Vec<f64>> {
    let d = (k - 1) / 2;
    let t = BigRational::from_float(largest)?;
    let two = BigRational::from_integer(2.into());
    let c: Vec<BigRational> = (0..k)
        .map(|m| moments::normal_moment(2 * m + 2) / &two)
        .collect();
    let shifted = |idx: usize| &c[idx + 1] - &t * &c[idx];
    let a = RationalMatrix::from_fn(d, |i, m| shifted(m + i));
    let rhs: Vec<BigRational> = (0..d).map(|i| -shifted(d + i)).collect();
    let lower = a.solve(&rhs)?;
    let mut coeffs: Vec<f64> = lower
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .collect();
    coeffs.push(1.0);
    Some(coeffs)
}

fn sweep_record(k: usize, largest: f64) -> SweepRecord {
    let d = (k - 1) / 2;
    let Some(rho) = free_node_polynomial(k, largest) else {
        return SweepRecord::infeasible(largest, k, "free-node system is singular".into());
    };
    let search = roots::real_roots_in(&rho, largest * 1e-12, largest, GridKind::Geometric, d, 256);
    let free: Vec<f64> = search
        .roots
        .iter()
        .map(|r| r.value)
        .filter(|&u| u > 0.0 && u < largest)
        .collect();
    if free.len() != d {
        return SweepRecord::infeasible(
            largest,
            k,
            format!("found {} of {d} free nodes in (0, T²)", free.len()),
        );
    }
    let mut nodes = free.clone();
    nodes.push(largest);
    let support = match Support::new(nodes.clone()) {
        Ok(s) => s,
        Err(e) => return SweepRecord::infeasible(largest, k, e.to_string()),
    };
    let n = d + 1;
    let targets = half_even_normal_moments(n);
    let solved = match matching::solve_probabilities(&support, &targets) {
        Ok(s) => s,
        Err(e) => return SweepRecord::infeasible(largest, k, e.to_string()),
    };
    if let Some(q) = solved.probabilities.iter().find(|&&q| !(q > 0.0)) {
        return SweepRecord::infeasible(largest, k, format!("nonpositive mass {q}"));
    }
    let all_targets = half_even_normal_moments(k);
    let moment_residual = (1..=k)
        .map(|i| {
            let fitted: f64 = nodes
                .iter()
                .zip(&solved.probabilities)
                .map(|(&u, &q)| q * u.powi(i as i32))
                .sum();
            (fitted - all_targets[i - 1]).abs() / all_targets[i - 1]
        })
        .fold(0.0, f64::max);
    if !(moment_residual <= SWEEP_RESIDUAL_LIMIT) {
        return SweepRecord::infeasible(
            largest,
            k,
            format!("moment residual {moment_residual:.3e} above {SWEEP_RESIDUAL_LIMIT:e}"),
        );
    }
    let r_star = solved.r;
    let (raw_largest_partial, sweep_derivative) =
        sweep_derivatives(&support, &targets, k).unwrap_or((f64::NAN, f64::NAN));
    let tail_mass = *solved.probabilities.last().expect("n >= 2");
    SweepRecord {
        largest_node_square: largest,
        feasible: true,
        free_node_squares: free,
        masses: solved.probabilities,
        r_star,
        p0: 1.0 - 2.0 * r_star,
        tail_mass,
        tail_bound: tail_bound(k, largest),
        moment_residual,
        raw_largest_partial,
        sweep_derivative,
        diagnostic: None,
    }
}

/// Raw and constrained derivatives of `r*` in the largest node.
///
/// With masses fixed by the first `n` equations, the remaining equations
/// `G_p = Σ q_j u_j^p − M_{2p}/2 = 0`, `p = n+1..=k`, tie the free nodes to
/// `T`. By the implicit function theorem
/// `dr*/dT = ∂r*/∂T − ∇_free r* · J⁻¹ ∂G/∂T`, `J = ∂G/∂u_free`.
pub fn sweep_derivatives(support: &Support, targets: &[f64], k: usize) -> Result<(f64, f64)> {
    let n = support.len();
    let d = n - 1;
    let r_partials = matching::r_star_partials(support, targets)?.values;
    let raw = r_partials[d];
    let mut jac = vec![0.0; d * d];
    let mut g_t = vec![0.0; d];
    for (row, power) in (n + 1..=k).enumerate() {
        let g = matching::functional_partials(support, targets, power as u32)?;
        jac[row * d..(row + 1) * d].copy_from_slice(&g[..d]);
        g_t[row] = g[d];
    }
    let y = linalg::solve_dense(d, &jac, &g_t)?;
    let correction: f64 = r_partials[..d].iter().zip(&y).map(|(a, b)| a * b).sum();
    Ok((raw, raw - correction))
}

/// `p₀` along a sweep as a function of the squared largest node, for
/// finite-difference checks.
pub fn sweep_p0(k: usize, largest_node_square: f64) -> Option<f64> {
    let r = sweep_record(k, largest_node_square);
    r.feasible.then_some(r.p0)
}

/// Whether `p₀` stays strictly below the exact `k − 1` bound on every
/// feasible record.
pub fn strictly_dominated(sweep: &OddCaseSweep) -> bool {
    let limit = rational_to_f64(&sweep.limit);
    sweep.feasible_records().all(|r| r.p0 < limit)
}
