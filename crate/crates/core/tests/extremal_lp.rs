use moment_bounds::extremal::{self, MassSource};
use moment_bounds::hermite::{self, DEFAULT_ROOT_TOLERANCE};
use moment_bounds::lp::{self, GridLP, LpStatus, Spacing};
use moment_bounds::matching::{LuSolver, SymmetricFunctionSolver};
use moment_bounds::moments::{self, normal_moment, rational_to_f64};
use moment_bounds::verify::{self, closed_form_p0, Corruption, VerifyConfig};

#[test]
fn center_mass_matches_closed_form() {
    for k in (2..=extremal::MAX_EVEN_K).step_by(2) {
        let d = extremal::extremal_even(k).unwrap();
        let oracle = rational_to_f64(&closed_form_p0(k));
        assert!((d.center_mass() - oracle).abs() < 1e-10, "k={k}");
    }
    let p = |k| extremal::extremal_even(k).unwrap().center_mass();
    assert!((p(2) - 2.0 / 3.0).abs() < 1e-15);
    assert!((p(4) - 8.0 / 15.0).abs() < 1e-15);
    assert!((p(6) - 16.0 / 35.0).abs() < 1e-14);
}

#[test]
fn side_masses_positive_and_match_quadrature_weights() {
    for k in (2..=20).step_by(2) {
        let d = extremal::extremal_even(k).unwrap();
        assert!(d.side_masses().iter().all(|q| *q > 0.0), "k={k}");
        assert_eq!(
            d.mass_source(),
            Some(MassSource::Solver("symmetric-functions-exact"))
        );
        let w = extremal::quadrature_weights(d.positive_nodes(), k + 1);
        for (q, w) in d.side_masses().iter().zip(&w) {
            assert!((q - w).abs() <= 1e-10 * w.max(1e-3), "k={k}: {q} vs {w}");
        }
    }
}

#[test]
fn matched_moments_reproduced() {
    for k in (2..=extremal::MAX_EVEN_K).step_by(2) {
        let d = extremal::extremal_even(k).unwrap();
        assert!(d.half_moment_residual(k / 2) < 1e-13, "k={k}");
        assert!((d.even_moment(0) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn quadrature_exact_through_all_k_moments() {
    for k in (2..=24).step_by(2) {
        let d = extremal::extremal_even(k).unwrap();
        assert!(d.half_moment_residual(k) < 1e-11, "k={k}");
    }
}

#[test]
fn lu_solver_gives_same_distribution() {
    for k in [2, 4, 6, 8] {
        let a = extremal::extremal_even(k).unwrap();
        let b = extremal::extremal_even_with(k, DEFAULT_ROOT_TOLERANCE, &LuSolver).unwrap();
        let c = extremal::extremal_even_with(k, DEFAULT_ROOT_TOLERANCE, &SymmetricFunctionSolver)
            .unwrap();
        assert!((a.center_mass() - b.center_mass()).abs() < 1e-12);
        assert!((a.center_mass() - c.center_mass()).abs() < 1e-12);
        assert_eq!(b.mass_source(), Some(MassSource::Solver("lu")));
    }
}

#[test]
fn half_bound_identity_chain() {
    for k in [2, 4, 6, 8, 10, 12] {
        let report = extremal::verify_half_bound(k).unwrap();
        assert!(report.pass(), "k={k}: {:?}", report.checks);
        let bound = rational_to_f64(&report.bound);
        assert!((report.deviation - bound / 2.0).abs() < 1e-10);
        assert!((report.r_star - (1.0 - bound) / 2.0).abs() < 1e-10);
    }
}

#[test]
fn corrupted_polynomial_breaks_half_bound() {
    let poly = hermite::hermite_coefficients(5).unwrap();
    let bad = poly.clone().with_coefficient(1, poly.coefficient(1) + 1);
    let report = extremal::verify_half_bound_with(4, &bad).unwrap();
    assert!(!report.pass());
}

#[test]
fn k3_sweep_climbs_to_two_thirds() {
    let sweep = extremal::odd_case_sweep(3, &[25.0, 100.0, 1e4]).unwrap();
    assert!(sweep.records.iter().all(|r| r.feasible));
    assert!(sweep.p0_strictly_increasing());
    assert!(extremal::strictly_dominated(&sweep));
    let m6 = rational_to_f64(&normal_moment(6));
    for r in &sweep.records {
        assert!(r.p0 < 2.0 / 3.0);
        assert!(r.tail_mass <= m6 / 2.0 / r.largest_node_square.powi(3) * (1.0 + 1e-9));
        // Closed form of the free node square for k = 3.
        let t = r.largest_node_square;
        assert!((r.free_node_squares[0] - 3.0 * (t - 5.0) / (t - 3.0)).abs() < 1e-10);
        assert!(r.sweep_derivative < 0.0);
    }
    let last = sweep.records.last().unwrap();
    assert!((last.p0 - 2.0 / 3.0).abs() < 0.01);
    assert!((last.free_node_squares[0] - 3.0).abs() < 0.05);
    assert!((last.masses[0] - 1.0 / 6.0).abs() < 0.01);
}

#[test]
fn k5_sweep_approaches_eight_fifteenths() {
    let schedule = extremal::auto_schedule(5, 12).unwrap();
    let sweep = extremal::odd_case_sweep(5, &schedule).unwrap();
    assert!(sweep.p0_strictly_increasing());
    assert!(extremal::strictly_dominated(&sweep));
    let last = sweep.feasible_records().last().unwrap();
    assert!((last.p0 - 8.0 / 15.0).abs() < 0.02);
}

#[test]
fn sweep_rejects_bad_input() {
    assert!(extremal::odd_case_sweep(4, &[100.0]).is_err());
    assert!(extremal::odd_case_sweep(3, &[100.0, 50.0]).is_err());
    assert!(extremal::odd_case_sweep(3, &[2.0]).is_err());
    assert!(extremal::extremal_even(3).is_err());
}

fn solve(k: usize, extent: f64, count: usize, include: &[f64]) -> lp::LPSolution {
    let grid = lp::build_grid(extent, count, include).unwrap();
    lp::solve_lp(&GridLP::new(grid, k).unwrap())
}

#[test]
fn lp_reproduces_extremal_center_mass() {
    for k in [2, 4, 6] {
        let d = extremal::extremal_even(k).unwrap();
        for count in [11, 25, 60] {
            let grid = lp::build_grid(5.0, count, d.positive_nodes()).unwrap();
            let problem = GridLP::new(grid, k).unwrap();
            let sol = lp::solve_lp(&problem);
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!(
                (sol.objective - d.center_mass()).abs() < 1e-9,
                "k={k} count={count}"
            );
            assert!(sol.active_support.len() <= 2 * k + 1);
            let sym = lp::symmetry_report(&problem, &sol.masses);
            assert!(sym.pass && sym.asymmetry <= 1e-8);
        }
    }
}

#[test]
fn lp_survives_degenerate_high_order_grids() {
    // Every moment right-hand side but the first is zero, so phase one
    // starts fully degenerate.
    let d = extremal::extremal_even(10).unwrap();
    let sol = solve(10, 6.0, 40, d.positive_nodes());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(
        (sol.objective - 256.0 / 693.0).abs() < 1e-9,
        "{}",
        sol.objective
    );
    let sol = solve(8, 8.0, 200, &[]);
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.objective <= 128.0 / 315.0 + 1e-9);
}

#[test]
fn lp_k2_support_is_extremal() {
    let s3 = 3f64.sqrt();
    let sol = solve(2, 5.0, 11, &[s3]);
    assert!((sol.objective - 2.0 / 3.0).abs() < 1e-9);
    for x in &sol.active_support {
        assert!(x.abs() < 1e-12 || (x.abs() - s3).abs() < 1e-12, "{x}");
    }
}

#[test]
fn lp_refinement_is_monotone_and_bounded() {
    // Uniform grids with count doubling are nested; none contains √3.
    let mut previous = 0.0;
    for count in [10, 20, 40, 80, 160] {
        let sol = solve(2, 5.0, count, &[]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective < 2.0 / 3.0, "count={count}");
        assert!(sol.objective >= previous - 1e-12, "count={count}");
        previous = sol.objective;
    }
    assert!(previous > 2.0 / 3.0 - 1e-2);
}

#[test]
fn lp_never_exceeds_bound() {
    for k in [2, 4, 6] {
        let bound = rational_to_f64(&moments::lindsay_bound(k).unwrap());
        for (extent, count, spacing) in [
            (4.0, 15, Spacing::Uniform),
            (6.0, 40, Spacing::Uniform),
            (8.0, 30, Spacing::Geometric),
            (5.0, 101, Spacing::Uniform),
        ] {
            let grid = lp::build_grid_with(extent, count, spacing, &[]).unwrap();
            let problem = GridLP::new(grid, k).unwrap();
            let sol = lp::solve_lp(&problem);
            if sol.status == LpStatus::Optimal {
                assert!(sol.objective <= bound + 1e-9, "k={k} {extent} {count}");
                assert!(sol.residual <= lp::RESIDUAL_TOLERANCE);
                assert!(sol.masses.iter().all(|m| *m >= -1e-12));
            }
        }
    }
}

#[test]
fn lp_detects_infeasible_grid() {
    // Points within [−1, 1] cannot carry a second moment of 1 and a fourth of 3.
    let sol = solve(2, 1.0, 5, &[]);
    assert_eq!(sol.status, LpStatus::Infeasible);
}

#[test]
fn mirror_average_stays_feasible() {
    let grid = lp::build_grid(5.0, 20, &[]).unwrap();
    let problem = GridLP::new(grid, 2).unwrap();
    let sol = lp::solve_lp(&problem);
    let g = &problem.grid;
    let averaged: Vec<f64> = (0..g.len())
        .map(|i| 0.5 * (sol.masses[i] + sol.masses[g.mirror(i)]))
        .collect();
    assert!(lp::constraint_residual(&problem, &averaged) < 1e-9);
    assert_eq!(averaged[g.zero_index()], sol.objective);
}

#[test]
fn suite_is_deterministic_and_passes() {
    let config = VerifyConfig::new(8);
    let a = verify::run_suite(&config).render();
    let b = verify::run_suite(&config).render();
    assert_eq!(a, b);
    assert!(a.ends_with("0 failed\n"), "{a}");
}

#[test]
fn small_kmax_runs_a_subset() {
    let small = verify::run_suite(&VerifyConfig::new(2));
    let full = verify::run_suite(&VerifyConfig::new(8));
    assert!(small.pass());
    assert!(small.rows.len() < full.rows.len());
    assert!(small.rows.iter().all(|r| !r.name.contains("k=4")));
}

#[test]
fn corruption_produces_fail_rows() {
    let mut config = VerifyConfig::new(8);
    config.corruption = Some(Corruption {
        degree: 5,
        index: 1,
        delta: 1,
    });
    let table = verify::run_suite(&config);
    assert!(!table.pass());
    let failed: Vec<&str> = table.failures().map(|r| r.name.as_str()).collect();
    assert!(failed.iter().any(|n| n.starts_with("hermite-explicit")));
    assert!(failed.iter().any(|n| n.starts_with("half-bound/k=4")));
    assert!(table.render().contains("FAIL"));
}
