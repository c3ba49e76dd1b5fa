mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use moment_bounds::extremal::{self, MAX_EVEN_K, MAX_ODD_K};
use moment_bounds::hermite::DEFAULT_ROOT_TOLERANCE;
use moment_bounds::lp::{self, GridLP, LpStatus, Spacing};
use moment_bounds::matching::{SolverRegistry, DEFAULT_SOLVER};
use moment_bounds::moments::{self, rational_to_f64};
use moment_bounds::verify::{self, VerifyConfig};

use output::{decimal, rational, Record};

const USAGE: u8 = 2;
const FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "moment-bounds",
    version,
    about = "Extremal moment bounds for the normal c.d.f. at zero"
)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact bound on the center mass for K matched even moments (K even).
    Bound {
        k: usize,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Least favorable symmetric distribution for K matched even moments.
    Extremal {
        k: usize,
        #[arg(long, default_value = "json")]
        format: String,
        /// Root residual tolerance for the Hermite root squares.
        #[arg(long, default_value_t = DEFAULT_ROOT_TOLERANCE)]
        tol: f64,
        /// Moment-matching solver, by registered name.
        #[arg(long, default_value = DEFAULT_SOLVER)]
        solver: String,
    },
    /// Sweep the largest node outward for odd K.
    OddLimit {
        k: usize,
        /// Comma-separated squared largest-node values, strictly increasing.
        #[arg(long, value_delimiter = ',', conflicts_with = "auto")]
        schedule: Option<Vec<f64>>,
        /// Number of geometrically spaced schedule entries.
        #[arg(long, default_value_t = 16)]
        auto: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Grid linear program maximizing the mass at zero.
    Lp {
        k: usize,
        #[arg(long)]
        extent: f64,
        /// Positive grid points before mirroring.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        include_extremal_nodes: bool,
        #[arg(long, value_enum, default_value_t = GridSpacing::Uniform)]
        spacing: GridSpacing,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        #[arg(long = "kmax", default_value_t = verify::DEFAULT_K_MAX)]
        k_max: usize,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridSpacing {
    Uniform,
    Geometric,
}

/// A rendered document and the exit code that goes with it.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

/// A message for stderr and its exit code.
struct Failure {
    message: String,
    code: u8,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        code: USAGE,
    }
}

impl From<moment_bounds::Error> for Failure {
    fn from(e: moment_bounds::Error) -> Self {
        usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli.command).and_then(|outcome| {
        emit(cli.out.as_ref(), &outcome.text).map_err(|e| Failure {
            message: format!("cannot write output: {e}"),
            code: FAILED,
        })?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(path: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Bound { k, format } => cmd_bound(*k, *format),
        Command::Extremal {
            k,
            format,
            tol,
            solver,
        } => cmd_extremal(*k, format, *tol, solver),
        Command::OddLimit {
            k,
            schedule,
            auto,
            format,
        } => cmd_odd_limit(*k, schedule.as_deref(), *auto, *format),
        Command::Lp {
            k,
            extent,
            count,
            include_extremal_nodes,
            spacing,
            format,
        } => cmd_lp(
            *k,
            *extent,
            *count,
            *include_extremal_nodes,
            *spacing,
            *format,
        ),
        Command::Verify { k_max, seed } => cmd_verify(*k_max, *seed),
    }
}

fn require_even(k: usize) -> Result<(), Failure> {
    if k % 2 == 1 {
        return Err(usage(format!(
            "k = {k} is odd: for an odd number of matched moments no least favorable \
             distribution exists (the supremum is only approached as the largest node \
             escapes to infinity); run `odd-limit {k}` to trace the approach"
        )));
    }
    if k == 0 || k > MAX_EVEN_K {
        return Err(usage(format!(
            "k must be an even integer in 2..={MAX_EVEN_K}, got {k}"
        )));
    }
    Ok(())
}

fn cmd_bound(k: usize, format: TextFormat) -> Result<Outcome, Failure> {
    require_even(k)?;
    let bound = moments::lindsay_bound(k)?;
    let half = &bound / num_rational::BigRational::from_integer(2.into());
    let text = match format {
        TextFormat::Text => format!(
            "k = {k}\nbound = {}\ndecimal = {}\ndeviation = {}\ndeviation_decimal = {}\n",
            rational(&bound),
            decimal(rational_to_f64(&bound)),
            rational(&half),
            decimal(rational_to_f64(&half)),
        ),
        TextFormat::Json => {
            let mut record = Record::new("bound", [("k", k.into())]);
            record.bound(&bound);
            record.set(
                "deviation",
                serde_json::json!({
                    "rational": rational(&half),
                    "decimal": output::number(rational_to_f64(&half)),
                }),
            );
            record.render()
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_extremal(k: usize, format: &str, tol: f64, solver_name: &str) -> Result<Outcome, Failure> {
    let format = match format {
        "json" | "csv" => format,
        other => {
            return Err(usage(format!(
                "unknown format `{other}`; expected json or csv"
            )))
        }
    };
    require_even(k)?;
    if !(tol > 0.0) {
        return Err(usage(format!("--tol must be positive, got {tol}")));
    }
    let registry = SolverRegistry::default();
    let solver = registry.get(solver_name).ok_or_else(|| {
        usage(format!(
            "unknown solver `{solver_name}`; registered: {}",
            registry.names().join(", ")
        ))
    })?;
    let d = extremal::extremal_even_with(k, tol, solver)?;
    let report = extremal::verify_half_bound(k)?;
    let code = if report.pass() { 0 } else { FAILED };
    let text = if format == "csv" {
        output::atoms_csv(&d.atoms())
    } else {
        let mut record = Record::new(
            "extremal",
            [
                ("k", k.into()),
                ("tol", output::number(tol)),
                ("solver", solver_name.into()),
            ],
        );
        let (nodes, masses): (Vec<f64>, Vec<f64>) = d.atoms().into_iter().unzip();
        record.set(
            "distribution",
            serde_json::json!({
                "p0": output::number(d.center_mass()),
                "r_star": output::number(d.r_star()),
                "deviation": output::number(extremal::deviation_at_zero(&d)),
                "nodes": output::numbers(&nodes),
                "masses": output::numbers(&masses),
                "mass_source": d.mass_source().map(|s| s.to_string()),
            }),
        );
        record.bound(&report.bound);
        record.checks(
            report
                .checks
                .iter()
                .map(|c| (c.name.as_str(), c.pass, c.residual)),
        );
        record.render()
    };
    Ok(Outcome { text, code })
}

fn cmd_odd_limit(
    k: usize,
    schedule: Option<&[f64]>,
    auto: usize,
    format: TableFormat,
) -> Result<Outcome, Failure> {
    if k % 2 == 0 {
        return Err(usage(format!(
            "k = {k} is even: the least favorable distribution exists exactly; run `extremal {k}`"
        )));
    }
    if k < 3 || k > MAX_ODD_K {
        return Err(usage(format!(
            "k must be an odd integer in 3..={MAX_ODD_K}, got {k}"
        )));
    }
    let schedule = match schedule {
        Some(s) => s.to_vec(),
        None if auto == 0 => return Err(usage("--auto must be at least 1")),
        None => extremal::auto_schedule(k, auto)?,
    };
    let sweep = extremal::odd_case_sweep(k, &schedule)?;
    let code = if sweep.records.iter().all(|r| r.feasible) {
        0
    } else {
        FAILED
    };
    let text = match format {
        TableFormat::Csv => output::sweep_csv(&sweep),
        TableFormat::Json => {
            let mut record = Record::new(
                "odd-limit",
                [("k", k.into()), ("schedule", output::numbers(&schedule))],
            );
            record.set(
                "limit",
                serde_json::json!({
                    "k": k - 1,
                    "rational": rational(&sweep.limit),
                    "decimal": output::number(rational_to_f64(&sweep.limit)),
                }),
            );
            record.set("records", output::sweep_records(&sweep));
            record.checks([
                (
                    "p0-strictly-increasing",
                    sweep.p0_strictly_increasing(),
                    0.0,
                ),
                (
                    "dominated-by-limit",
                    extremal::strictly_dominated(&sweep),
                    0.0,
                ),
            ]);
            record.render()
        }
    };
    Ok(Outcome { text, code })
}

fn cmd_lp(
    k: usize,
    extent: f64,
    count: usize,
    include_extremal_nodes: bool,
    spacing: GridSpacing,
    format: TextFormat,
) -> Result<Outcome, Failure> {
    require_even(k)?;
    let include = if include_extremal_nodes {
        extremal::extremal_even(k)?.positive_nodes().to_vec()
    } else {
        Vec::new()
    };
    let spacing = match spacing {
        GridSpacing::Uniform => Spacing::Uniform,
        GridSpacing::Geometric => Spacing::Geometric,
    };
    let grid = lp::build_grid_with(extent, count, spacing, &include)?;
    if grid.len() > lp::MAX_GRID_POINTS {
        return Err(usage(format!(
            "grid has {} points; the limit is {}",
            grid.len(),
            lp::MAX_GRID_POINTS
        )));
    }
    let problem = GridLP::new(grid, k)?;
    let bound = moments::lindsay_bound(k)?;
    let bound_f = rational_to_f64(&bound);
    let solution = lp::solve_lp(&problem);
    let optimal = solution.status == LpStatus::Optimal;
    let symmetry = optimal.then(|| lp::symmetry_report(&problem, &solution.masses));
    let within_bound = optimal && solution.objective <= bound_f + verify::LP_TOLERANCE;
    let code = if within_bound { 0 } else { FAILED };
    let status = if optimal { "optimal" } else { "infeasible" };
    // A finite residual on an infeasible result means a vertex was found but
    // rejected as inaccurate.
    let diagnostic = (!optimal && solution.residual.is_finite()).then(|| {
        format!(
            "vertex rejected: constraint residual {:.3e} exceeds {:.0e}",
            solution.residual,
            lp::RESIDUAL_TOLERANCE
        )
    });
    let text = match format {
        TextFormat::Text => {
            let mut s = format!(
                "k = {k}\ngrid_points = {}\nstatus = {status}\n",
                problem.grid.len()
            );
            if let Some(d) = &diagnostic {
                s += &format!("diagnostic = {d}\n");
            }
            if let Some(sym) = &symmetry {
                s += &format!(
                    "objective = {}\nbound = {} ({})\nwithin_bound = {within_bound}\n\
                     residual = {:.3e}\nactive_support = {}\n\
                     asymmetry_raw = {:.3e}\ntie_averaged = {}\nasymmetry = {:.3e}\nsymmetric = {}\n",
                    decimal(solution.objective),
                    rational(&bound),
                    decimal(bound_f),
                    solution.residual,
                    solution
                        .active_support
                        .iter()
                        .map(|&x| decimal(x))
                        .collect::<Vec<_>>()
                        .join(" "),
                    sym.raw_asymmetry,
                    sym.tie_averaged,
                    sym.asymmetry,
                    sym.pass,
                );
            }
            s
        }
        TextFormat::Json => {
            let mut record = Record::new(
                "lp",
                [
                    ("k", k.into()),
                    ("extent", output::number(extent)),
                    ("count", count.into()),
                    ("include_extremal_nodes", include_extremal_nodes.into()),
                ],
            );
            record.set("status", status.into());
            if let Some(d) = &diagnostic {
                record.set("diagnostic", d.as_str().into());
            }
            if optimal {
                let (nodes, masses): (Vec<f64>, Vec<f64>) = problem
                    .grid
                    .points()
                    .iter()
                    .zip(&solution.masses)
                    .filter(|(_, &m)| m > lp::ACTIVE_MASS)
                    .map(|(&x, &m)| (x, m))
                    .unzip();
                record.set(
                    "distribution",
                    serde_json::json!({
                        "p0": output::number(solution.objective),
                        "nodes": output::numbers(&nodes),
                        "masses": output::numbers(&masses),
                    }),
                );
            }
            record.bound(&bound);
            if let Some(sym) = &symmetry {
                record.checks([
                    (
                        "constraint-residual",
                        solution.residual <= lp::RESIDUAL_TOLERANCE,
                        solution.residual,
                    ),
                    (
                        "objective-within-bound",
                        within_bound,
                        (solution.objective - bound_f).max(0.0),
                    ),
                    ("symmetry", sym.pass, sym.asymmetry),
                ]);
            }
            record.render()
        }
    };
    Ok(Outcome { text, code })
}

fn cmd_verify(k_max: usize, seed: u64) -> Result<Outcome, Failure> {
    if !(2..=MAX_EVEN_K).contains(&k_max) {
        return Err(usage(format!(
            "--kmax must be in 2..={MAX_EVEN_K}, got {k_max}"
        )));
    }
    let mut config = VerifyConfig::new(k_max);
    config.seed = seed;
    let table = verify::run_suite(&config);
    let code = if table.pass() { 0 } else { FAILED };
    Ok(Outcome {
        text: table.render(),
        code,
    })
}
