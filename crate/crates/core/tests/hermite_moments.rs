use moment_bounds::hermite::{self, DEFAULT_ROOT_TOLERANCE};
use moment_bounds::matching::elementary_symmetric;
use moment_bounds::moments::{self, rational_to_f64};
use moment_bounds::verify::{closed_form_p0, hermite_explicit};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn recursion_matches_explicit_formula_through_degree_40() {
    for n in 0..=40 {
        let poly = hermite::hermite_coefficients(n).unwrap();
        assert_eq!(
            poly.coefficients(),
            hermite_explicit(n).as_slice(),
            "He_{n}"
        );
    }
}

#[test]
fn odd_degrees_have_half_as_many_positive_roots() {
    for n in (3..=41).step_by(2) {
        let squares = hermite::nonzero_root_squares(n, DEFAULT_ROOT_TOLERANCE).unwrap();
        assert_eq!(squares.values.len(), (n - 1) / 2, "He_{n}");
        assert!(squares.values.windows(2).all(|w| w[0] < w[1]));
        assert!(squares.values[0] > 0.0);
    }
}

#[test]
fn root_squares_reproduce_square_variable_coefficients() {
    for n in (3..=21).step_by(2) {
        let poly = hermite::hermite_coefficients(n).unwrap();
        let squares = hermite::root_squares_of(&poly, DEFAULT_ROOT_TOLERANCE).unwrap();
        let d = squares.values.len();
        let e = elementary_symmetric(&squares.values);
        let coeffs = poly.square_variable_coefficients();
        for m in 0..=d {
            let sign = if (d - m) % 2 == 0 { 1.0 } else { -1.0 };
            let expected = hermite::big_to_f64(&coeffs[m]);
            let rel = (sign * e[d - m] - expected).abs() / expected.abs();
            assert!(rel < 1e-10, "He_{n} e_{}: {rel:e}", d - m);
        }
    }
}

#[test]
fn consecutive_degrees_interlace() {
    for n in (3..=31).step_by(2) {
        let roots = hermite::nonzero_root_squares(n, DEFAULT_ROOT_TOLERANCE)
            .unwrap()
            .positive_roots();
        let next = hermite::hermite_coefficients(n + 1).unwrap();
        let signs: Vec<f64> = std::iter::once(0.0)
            .chain(roots)
            .map(|t| next.evaluate(t).signum())
            .collect();
        assert!(
            signs.windows(2).all(|w| w[0] == -w[1]),
            "He_{n} vs He_{}",
            n + 1
        );
    }
}

#[test]
fn orthogonality_vanishes_exactly() {
    for l in 0..=11 {
        for i in 0..=11 {
            if 2 * l + 2 * i + 2 <= 24 {
                assert!(
                    moments::orthogonality_check(l, i).unwrap().is_zero(),
                    "l={l} i={i}"
                );
            }
        }
    }
}

#[test]
fn small_bounds_by_cofactor_expansion() {
    // [[1,1],[1,3]]: det 2, corner minor 3.
    assert_eq!(moments::lindsay_bound(2).unwrap(), q(2, 3));
    // [[1,1,3],[1,3,15],[3,15,105]]: det 48, corner minor 3*105 - 15*15 = 90.
    assert_eq!(moments::lindsay_bound(4).unwrap(), q(48, 90));
    assert_eq!(moments::lindsay_bound(6).unwrap(), q(16, 35));
}

#[test]
fn bound_matches_double_factorial_series() {
    for k in (2..=30).step_by(2) {
        assert_eq!(
            moments::lindsay_bound(k).unwrap(),
            closed_form_p0(k),
            "k={k}"
        );
    }
}

#[test]
fn hankel_minors_positive_and_bound_in_unit_interval() {
    let h = moments::hankel_matrix(8).unwrap();
    assert!(h.leading_minors().iter().all(|d| d.is_positive()));
    let mut previous = BigRational::from_integer(1.into());
    for k in (2..=16).step_by(2) {
        let b = moments::lindsay_bound(k).unwrap();
        assert!(b.is_positive() && b < previous, "k={k}");
        previous = b;
    }
}

#[test]
fn s_identity_holds_exactly() {
    for k in (2..=16).step_by(2) {
        let s = moments::s_from_hermite(k).unwrap();
        let m2k = moments::normal_moment(2 * k);
        let bound = moments::lindsay_bound(k).unwrap();
        let one = BigRational::from_integer(1.into());
        let two = BigRational::from_integer(2.into());
        assert_eq!((&one - &s / &m2k) / &two, (&one - &bound) / &two, "k={k}");
    }
    assert_eq!(rational_to_f64(&moments::s_from_hermite(2).unwrap()), 2.0);
    assert_eq!(rational_to_f64(&moments::s_from_hermite(4).unwrap()), 56.0);
}
