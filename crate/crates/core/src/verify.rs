//! Invariant suite behind the `verify` command.
//!
//! Each [`InvariantCheck`] turns a [`VerifyConfig`] into table rows; a
//! [`CheckRegistry`] runs them in registration order. Output depends only on
//! the config, so the rendered table is byte-stable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extremal::{self, HALF_BOUND_TOLERANCE};
use crate::hermite::{self, HermitePolynomial, DEFAULT_ROOT_TOLERANCE};
use crate::lp::{self, GridLP, LpStatus};
use crate::matching::{self, Support};
use crate::moments::{self, rational_to_f64};
use crate::Result;

pub const DEFAULT_K_MAX: usize = 8;
pub const DEFAULT_SEED: u64 = 0x5eed_2015;
pub const DEFAULT_INSTANCES: usize = 1000;
pub const DEFAULT_SIGN_SUPPORTS: usize = 200;
pub const FORMULA_TOLERANCE: f64 = 1e-10;
pub const PARTIAL_TOLERANCE: f64 = 1e-5;
pub const LP_TOLERANCE: f64 = 1e-9;

/// Adds `delta` to coefficient `index` of `He_degree` wherever the suite
/// builds that polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corruption {
    pub degree: usize,
    pub index: usize,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest even `k` exercised; `k_max ≥ 2`.
    pub k_max: usize,
    pub seed: u64,
    /// Random instances for the solver-equivalence checks.
    pub instances: usize,
    /// Random positive supports for the derivative-sign checks.
    pub sign_supports: usize,
    pub corruption: Option<Corruption>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self::new(DEFAULT_K_MAX)
    }
}

impl VerifyConfig {
    pub fn new(k_max: usize) -> Self {
        Self {
            k_max,
            seed: DEFAULT_SEED,
            instances: DEFAULT_INSTANCES,
            sign_supports: DEFAULT_SIGN_SUPPORTS,
            corruption: None,
        }
    }

    /// Even values `2, 4, …, k_max`.
    pub fn even_ks(&self) -> impl Iterator<Item = usize> {
        (2..=self.k_max).step_by(2)
    }

    /// `He_n`, with the configured corruption applied.
    pub fn hermite(&self, n: usize) -> Result<HermitePolynomial> {
        let poly = hermite::hermite_coefficients(n)?;
        Ok(match self.corruption {
            Some(c) if c.degree == n => {
                let value = poly.coefficient(c.index) + BigInt::from(c.delta);
                poly.with_coefficient(c.index, value)
            }
            _ => poly,
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

impl CheckRow {
    fn within(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: residual <= tolerance,
            residual,
        }
    }

    fn failed(name: impl Into<String>, error: impl std::fmt::Display) -> Self {
        Self {
            name: format!("{} ({error})", name.into()),
            pass: false,
            residual: f64::INFINITY,
        }
    }

    /// Zero-residual row when `ok`, otherwise residual 1.
    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::within(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

pub trait InvariantCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow>;
}

pub struct CheckRegistry {
    checks: Vec<Box<dyn InvariantCheck>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(HermiteExplicit));
        registry.register(Box::new(HermiteRoots));
        registry.register(Box::new(Orthogonality));
        registry.register(Box::new(HankelDefinite));
        registry.register(Box::new(ExactBounds));
        registry.register(Box::new(SolverEquivalence));
        registry.register(Box::new(SignAlternation));
        registry.register(Box::new(HalfBound));
        registry.register(Box::new(OddSweep));
        registry.register(Box::new(LpOracle));
        registry
    }
}

impl CheckRegistry {
    pub fn empty() -> Self {
        Self { checks: Vec::new() }
    }

    /// Later registrations with an existing name replace the earlier one.
    pub fn register(&mut self, check: Box<dyn InvariantCheck>) {
        match self.checks.iter().position(|c| c.name() == check.name()) {
            Some(i) => self.checks[i] = check,
            None => self.checks.push(check),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn run(&self, config: &VerifyConfig) -> VerifyTable {
        let rows = self
            .checks
            .iter()
            .flat_map(|c| {
                c.run(config).into_iter().map(move |mut row| {
                    row.name = format!("{}/{}", c.name(), row.name);
                    row
                })
            })
            .collect();
        VerifyTable { rows }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyTable {
    pub rows: Vec<CheckRow>,
}

impl VerifyTable {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = format!("{:<width$}  {:<6}  {}\n", "check", "status", "residual");
        for r in &self.rows {
            let status = if r.pass { "PASS" } else { "FAIL" };
            out += &format!("{:<width$}  {:<6}  {:.3e}\n", r.name, status, r.residual);
        }
        let failed = self.failures().count();
        out += &format!(
            "{} checks, {} passed, {} failed\n",
            self.rows.len(),
            self.rows.len() - failed,
            failed
        );
        out
    }
}

/// Runs the default registry.
pub fn run_suite(config: &VerifyConfig) -> VerifyTable {
    CheckRegistry::default().run(config)
}

/// `He_n` from `[x^{n−2m}] = (−1)^m n! / (m! 2^m (n−2m)!)`.
pub fn hermite_explicit(n: usize) -> Vec<BigInt> {
    let factorial = |m: usize| (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let mut c = vec![BigInt::zero(); n + 1];
    for m in 0..=n / 2 {
        let magnitude = factorial(n) / (factorial(m) * factorial(n - 2 * m) * (BigInt::one() << m));
        c[n - 2 * m] = if m % 2 == 0 { magnitude } else { -magnitude };
    }
    c
}

/// `1 / Σ_{j=0}^{k/2} (2j−1)!!/(2j)!!`, the center mass of the even-`k`
/// quadrature construction.
pub fn closed_form_p0(k: usize) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for j in 1..=k / 2 {
        term = term * BigRational::new((2 * j - 1).into(), (2 * j).into());
        sum += &term;
    }
    sum.recip()
}

fn exact_gap(a: &BigRational, b: &BigRational) -> f64 {
    rational_to_f64(&(a - b).abs())
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

struct HermiteExplicit;

impl InvariantCheck for HermiteExplicit {
    fn name(&self) -> &'static str {
        "hermite-explicit"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let top = 2 * config.k_max + 2;
        let mut mismatches = 0usize;
        for n in 0..=top {
            match config.hermite(n) {
                Ok(p) => {
                    let explicit = hermite_explicit(n);
                    mismatches += (0..=n).filter(|&i| p.coefficient(i) != explicit[i]).count();
                }
                Err(e) => return vec![CheckRow::failed(format!("n<={top}"), e)],
            }
        }
        vec![CheckRow::within(
            format!("n<={top}"),
            mismatches as f64,
            0.0,
        )]
    }
}

struct HermiteRoots;

impl InvariantCheck for HermiteRoots {
    fn name(&self) -> &'static str {
        "hermite-roots"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let mut rows = Vec::new();
        for n in (3..=config.k_max + 1).step_by(2) {
            let poly = match config.hermite(n) {
                Ok(p) => p,
                Err(e) => {
                    rows.push(CheckRow::failed(format!("He{n}"), e));
                    continue;
                }
            };
            let squares = match hermite::root_squares_of(&poly, DEFAULT_ROOT_TOLERANCE) {
                Ok(s) => s,
                Err(e) => {
                    rows.push(CheckRow::failed(format!("He{n} count"), e));
                    continue;
                }
            };
            rows.push(CheckRow::flag(
                format!("He{n} count"),
                squares.values.len() == (n - 1) / 2,
            ));
            // Q(u) = Σ (−1)^{d−m} e_{d−m}(u) u^m.
            let q = poly.square_variable_coefficients();
            let d = squares.values.len();
            let e = matching::elementary_symmetric(&squares.values);
            let worst = (0..=d)
                .map(|m| {
                    let sign = if (d - m) % 2 == 0 { 1.0 } else { -1.0 };
                    relative(sign * e[d - m], hermite::big_to_f64(&q[m]))
                })
                .fold(0.0, f64::max);
            rows.push(CheckRow::within(
                format!("He{n} symmetric"),
                worst,
                FORMULA_TOLERANCE,
            ));
            // He_{n+1} alternates in sign across the ordered roots of He_n.
            let next = match config.hermite(n + 1) {
                Ok(p) => p,
                Err(e) => {
                    rows.push(CheckRow::failed(format!("He{n} interlacing"), e));
                    continue;
                }
            };
            let signs: Vec<f64> = std::iter::once(0.0)
                .chain(squares.positive_roots())
                .map(|t| next.evaluate(t).signum())
                .collect();
            let interlaced =
                signs.iter().all(|s| *s != 0.0) && signs.windows(2).all(|w| w[0] != w[1]);
            rows.push(CheckRow::flag(format!("He{n} interlacing"), interlaced));
        }
        rows
    }
}

struct Orthogonality;

impl InvariantCheck for Orthogonality {
    fn name(&self) -> &'static str {
        "orthogonality"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let top = 2 * config.k_max + 8;
        let mut worst = 0.0f64;
        for degree in (2..=top).step_by(2) {
            let poly = match config.hermite(degree) {
                Ok(p) => p,
                Err(e) => return vec![CheckRow::failed(format!("degree<={top}"), e)],
            };
            for i in 0..degree / 2 {
                let value = moments::orthogonality_sum(&poly, i);
                worst = worst.max(rational_to_f64(&value.abs()));
            }
        }
        vec![CheckRow::within(format!("degree<={top}"), worst, 0.0)]
    }
}

struct HankelDefinite;

impl InvariantCheck for HankelDefinite {
    fn name(&self) -> &'static str {
        "hankel"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let m = config.k_max / 2;
        let name = format!("order {m} leading minors positive");
        match moments::hankel_matrix(m) {
            Ok(h) => vec![CheckRow::flag(
                name,
                h.matrix().is_symmetric() && h.leading_minors().iter().all(|d| d.is_positive()),
            )],
            Err(e) => vec![CheckRow::failed(name, e)],
        }
    }
}

struct ExactBounds;

impl InvariantCheck for ExactBounds {
    fn name(&self) -> &'static str {
        "bound"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        config
            .even_ks()
            .map(|k| match moments::lindsay_bound(k) {
                Ok(b) => CheckRow::within(
                    format!("k={k} closed form"),
                    exact_gap(&b, &closed_form_p0(k)),
                    0.0,
                ),
                Err(e) => CheckRow::failed(format!("k={k}"), e),
            })
            .collect()
    }
}

/// A support of `n ≤ 8` distinct points in `[−10, 10] \ (−0.1, 0.1)`.
pub fn random_signed_support(rng: &mut impl Rng) -> Vec<f64> {
    let n = rng.gen_range(1..=8);
    let mut points: Vec<f64> = Vec::with_capacity(n);
    while points.len() < n {
        let magnitude = rng.gen_range(0.1..=10.0);
        let x = if rng.gen_bool(0.5) {
            magnitude
        } else {
            -magnitude
        };
        if points.iter().all(|p| (p - x).abs() > 1e-3) {
            points.push(x);
        }
    }
    points
}

/// `M_1, …, M_n` with each entry drawn from `[−1, 1]` scaled by the normal
/// moment of the same order (odd orders use the next even one).
pub fn random_moments(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| {
            let scale = rational_to_f64(&moments::normal_moment(j + j % 2));
            scale * rng.gen_range(-1.0..=1.0)
        })
        .collect()
}

/// Largest `|a_j − b_j|` relative to `max_j |b_j|`.
pub fn vector_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let scale = b
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

struct SolverEquivalence;

impl InvariantCheck for SolverEquivalence {
    fn name(&self) -> &'static str {
        "matching"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let mut rng = config.rng(1);
        let (mut discrepancy, mut sum_gap, mut excess) = (0.0f64, 0.0f64, 0.0f64);
        let mut errors = 0usize;
        for _ in 0..config.instances {
            let points = random_signed_support(&mut rng);
            let m = random_moments(&mut rng, points.len());
            let outcome = (|| {
                let support = Support::new(points)?;
                let formula = matching::solve_probabilities(&support, &m)?;
                let direct = matching::solve_probabilities_direct(&support, &m)?;
                let r = matching::probability_sum(&support, &m)?;
                let residual = matching::moment_residual(&support, &formula.probabilities, &m);
                Ok::<_, crate::Error>((formula, direct, r, residual))
            })();
            match outcome {
                Ok((formula, direct, r, residual)) => {
                    discrepancy = discrepancy.max(vector_discrepancy(
                        &formula.probabilities,
                        &direct.probabilities,
                    ));
                    let r_scale = formula.probabilities.iter().map(|p| p.abs()).sum::<f64>();
                    sum_gap = sum_gap.max((r - formula.r).abs() / r_scale.max(f64::MIN_POSITIVE));
                    excess = excess.max(residual / (formula.condition_estimate * 1e-14));
                }
                Err(_) => errors += 1,
            }
        }
        let n = config.instances;
        vec![
            CheckRow::flag(format!("{n} instances solved"), errors == 0),
            CheckRow::within("formula vs direct", discrepancy, FORMULA_TOLERANCE),
            CheckRow::within("closed-form sum", sum_gap, FORMULA_TOLERANCE),
            CheckRow::within("residual / (condition*1e-14)", excess, 1.0),
        ]
    }
}

/// `n` increasing positive points obtained by jittering the even-`k`
/// extremal node squares, `k = 2n`, by up to `jitter` relative.
pub fn jittered_node_squares(rng: &mut impl Rng, n: usize, jitter: f64) -> Result<Vec<f64>> {
    let base = extremal::extremal_even(2 * n)?.node_squares();
    let mut u: Vec<f64> = base
        .iter()
        .map(|v| v * (1.0 + rng.gen_range(-jitter..=jitter)))
        .collect();
    u.sort_by(f64::total_cmp);
    Ok(u)
}

struct SignAlternation;

impl InvariantCheck for SignAlternation {
    fn name(&self) -> &'static str {
        "partials"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let mut rng = config.rng(2);
        let max_n = (config.k_max / 2).max(1);
        let (mut tested, mut broken, mut worst) = (0usize, 0usize, 0.0f64);
        let mut attempts = 0usize;
        while tested < config.sign_supports && attempts < 20 * config.sign_supports {
            attempts += 1;
            let n = 1 + attempts % max_n;
            let outcome = (|| {
                let u = jittered_node_squares(&mut rng, n, 0.1)?;
                let m = moments::half_even_normal_moments(n);
                let support = Support::new(u)?;
                let analytic = matching::r_star_partials(&support, &m)?;
                let fd = matching::r_star_partials_fd(&support, &m, 1e-6)?;
                Ok::<_, crate::Error>((analytic, fd))
            })();
            let Ok((analytic, fd)) = outcome else {
                broken += 1;
                tested += 1;
                continue;
            };
            // Alternation needs a common sign for every p_j; only genuine
            // distributions qualify.
            if analytic.probabilities.iter().any(|p| *p <= 0.0) {
                continue;
            }
            tested += 1;
            if analytic.alternates() != Some(true) {
                broken += 1;
            }
            worst = worst.max(vector_discrepancy(&fd, &analytic.values));
        }
        vec![
            CheckRow::within(format!("{tested} supports alternate"), broken as f64, 0.0),
            CheckRow::within("analytic vs finite difference", worst, PARTIAL_TOLERANCE),
        ]
    }
}

struct HalfBound;

impl InvariantCheck for HalfBound {
    fn name(&self) -> &'static str {
        "half-bound"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let mut rows = Vec::new();
        for k in config.even_ks() {
            let report = config
                .hermite(k + 1)
                .and_then(|poly| extremal::verify_half_bound_with(k, &poly));
            let report = match report {
                Ok(r) => r,
                Err(e) => {
                    rows.push(CheckRow::failed(format!("k={k}"), e));
                    continue;
                }
            };
            rows.extend(report.checks.iter().map(|c| {
                CheckRow::within(
                    format!("k={k} {}", c.name),
                    c.residual,
                    HALF_BOUND_TOLERANCE,
                )
            }));
            match extremal::extremal_even(k) {
                Ok(d) => {
                    rows.push(CheckRow::flag(
                        format!("k={k} masses positive"),
                        d.side_masses().iter().all(|q| *q > 0.0) && d.center_mass() > 0.0,
                    ));
                    rows.push(CheckRow::within(
                        format!("k={k} even moments"),
                        d.half_moment_residual(k),
                        1e-11,
                    ));
                }
                Err(e) => rows.push(CheckRow::failed(format!("k={k} construction"), e)),
            }
        }
        rows
    }
}

struct OddSweep;

impl InvariantCheck for OddSweep {
    fn name(&self) -> &'static str {
        "odd-sweep"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        if config.k_max < 3 {
            return Vec::new();
        }
        let sweep = extremal::auto_schedule(3, 16).and_then(|s| extremal::odd_case_sweep(3, &s));
        let sweep = match sweep {
            Ok(s) => s,
            Err(e) => return vec![CheckRow::failed("k=3", e)],
        };
        let target = rational_to_f64(&sweep.limit);
        let Some(last) = sweep.records.last() else {
            return vec![CheckRow::flag("k=3 records", false)];
        };
        let all_feasible = sweep.records.iter().all(|r| r.feasible);
        let tail_ok = sweep
            .feasible_records()
            .all(|r| r.tail_mass <= r.tail_bound * (1.0 + 1e-9));
        let derivative_ok = sweep.feasible_records().all(|r| r.sweep_derivative < 0.0);
        vec![
            CheckRow::flag("k=3 feasible", all_feasible),
            CheckRow::flag("k=3 p0 increasing", sweep.p0_strictly_increasing()),
            CheckRow::flag("k=3 dominated", extremal::strictly_dominated(&sweep)),
            CheckRow::within("k=3 final p0 gap", (last.p0 - target).abs(), 0.01),
            CheckRow::flag("k=3 tail bound", tail_ok),
            CheckRow::flag("k=3 dr*/dT negative", derivative_ok),
        ]
    }
}

struct LpOracle;

impl InvariantCheck for LpOracle {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn run(&self, config: &VerifyConfig) -> Vec<CheckRow> {
        let mut rows = Vec::new();
        for k in config.even_ks().filter(|&k| k <= 6) {
            let outcome = (|| {
                let d = extremal::extremal_even(k)?;
                let grid = lp::build_grid(5.0, 20, d.positive_nodes())?;
                let problem = GridLP::new(grid, k)?;
                let bound = rational_to_f64(&moments::lindsay_bound(k)?);
                Ok::<_, crate::Error>((d, problem, bound))
            })();
            let (d, problem, bound) = match outcome {
                Ok(v) => v,
                Err(e) => {
                    rows.push(CheckRow::failed(format!("k={k}"), e));
                    continue;
                }
            };
            let solution = lp::solve_lp(&problem);
            if solution.status != LpStatus::Optimal {
                rows.push(CheckRow::flag(format!("k={k} optimal"), false));
                continue;
            }
            let report = lp::symmetry_report(&problem, &solution.masses);
            rows.push(CheckRow::within(
                format!("k={k} objective vs p0"),
                (solution.objective - d.center_mass()).abs(),
                LP_TOLERANCE,
            ));
            rows.push(CheckRow {
                name: format!("k={k} symmetry"),
                pass: report.pass,
                residual: report.asymmetry,
            });
            rows.push(CheckRow::within(
                format!("k={k} objective - bound"),
                (solution.objective - bound).max(0.0),
                LP_TOLERANCE,
            ));
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_formula_small() {
        let c: Vec<i64> = hermite_explicit(4)
            .iter()
            .map(|v| v.try_into().unwrap())
            .collect();
        assert_eq!(c, vec![3, 0, -6, 0, 1]);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_p0(2), BigRational::new(2.into(), 3.into()));
        assert_eq!(closed_form_p0(4), BigRational::new(8.into(), 15.into()));
        assert_eq!(closed_form_p0(6), BigRational::new(16.into(), 35.into()));
    }

    #[test]
    fn registry_replaces_by_name() {
        let mut r = CheckRegistry::default();
        let before = r.names().len();
        r.register(Box::new(LpOracle));
        assert_eq!(r.names().len(), before);
    }

    #[test]
    fn small_suite_passes() {
        let mut config = VerifyConfig::new(2);
        config.instances = 50;
        config.sign_supports = 20;
        let table = run_suite(&config);
        assert!(table.pass(), "{}", table.render());
    }
}
