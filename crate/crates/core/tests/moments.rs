use banded_esd::combinatorics::{count_restricted_compositions, DegreeProfile, Limits};
use banded_esd::moments::{
    banded_class_size_leading, degree_factor, format_rational, limit_moment_polynomial,
    moment_table_csv, mp_moment_f64, parse_rational, support_bound, MomentError,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Coefficients `[gamma^r]` from every balanced bracket word, decoded with a stack.
fn bracket_word_coefficients(l: u32) -> Vec<BigRational> {
    let mut coefficients = vec![BigRational::zero(); l as usize];
    for word in 0u32..(1 << (2 * l)) {
        // bit set = step down into a new child
        let mut depth = 0i32;
        let mut ok = true;
        for t in 0..2 * l {
            depth += if word >> t & 1 == 1 { 1 } else { -1 };
            if depth < 0 {
                ok = false;
                break;
            }
        }
        if !ok || depth != 0 {
            continue;
        }
        // each K vertex (odd depth) has degree 1 + its number of children
        let mut stack: Vec<u32> = Vec::new();
        let mut i_vertices = 1;
        let mut product = BigRational::from_integer(1.into());
        for t in 0..2 * l {
            if word >> t & 1 == 1 {
                if let Some(top) = stack.last_mut() {
                    *top += 1;
                }
                stack.push(0);
                if stack.len().is_multiple_of(2) {
                    i_vertices += 1;
                }
            } else {
                let children = stack.pop().unwrap();
                if stack.len().is_multiple_of(2) {
                    product *= degree_factor(children + 1).value;
                }
            }
        }
        coefficients[i_vertices - 1] += product;
    }
    coefficients
}

#[test]
fn low_order_polynomials() {
    let limits = Limits::default();
    let m = |l| limit_moment_polynomial(l, &limits).unwrap();
    assert_eq!(m(1).coefficients(), &[q(1, 1)]);
    assert_eq!(m(2).coefficients(), &[q(1, 1), q(2, 1)]);
    assert_eq!(m(3).coefficients(), &[q(1, 1), q(6, 1), q(3, 1)]);
    assert_eq!(format_rational(&m(3).eval(&q(1, 2))), "19/4");
}

#[test]
fn polynomials_match_bracket_word_enumeration() {
    let limits = Limits::default();
    for l in 1..=8 {
        let poly = limit_moment_polynomial(l, &limits).unwrap();
        let mut expected = bracket_word_coefficients(l);
        while expected.last().is_some_and(Zero::is_zero) {
            expected.pop();
        }
        assert_eq!(poly.coefficients(), expected.as_slice(), "l={l}");
    }
}

#[test]
fn extreme_coefficients() {
    // r = 0 is the star around a single row; r = l - 1 is the star around one sample
    let limits = Limits::default();
    for l in 1..=10 {
        let poly = limit_moment_polynomial(l, &limits).unwrap();
        assert_eq!(poly.coefficients()[0], q(1, 1));
        assert_eq!(poly.coefficients()[l as usize - 1], degree_factor(l).value);
    }
}

#[test]
fn degree_factors_by_hand() {
    assert_eq!(degree_factor(1).value, q(1, 1));
    assert_eq!(degree_factor(2).value, q(2, 1));
    assert_eq!(degree_factor(3).value, q(3, 1));
    assert_eq!(degree_factor(4).value, q(16, 3));
}

#[test]
fn degree_factor_ratio_converges() {
    for degree in 2u32..=5 {
        let c = degree_factor(degree).value;
        let mut last = f64::INFINITY;
        for d in [100u64, 1000, 10_000] {
            let deg = u64::from(degree);
            let count = count_restricted_compositions(deg * d, deg, 2 * d);
            let ratio = BigRational::from_integer(BigInt::from(count))
                / (c.clone() * BigRational::from_integer(BigInt::from(d).pow(degree - 1)));
            let dev = (ratio.to_f64().unwrap() - 1.0).abs();
            assert!(dev < last, "D={degree} d={d}: {dev} vs {last}");
            last = dev;
        }
        assert!(last <= 0.01);
    }
}

#[test]
fn limit_is_dominated_by_marchenko_pastur() {
    let limits = Limits::default();
    for l in 1..=10 {
        let poly = limit_moment_polynomial(l, &limits).unwrap();
        for gamma in [0.01, 0.1, 0.5, 1.0, 4.0] {
            let ours = poly.at_gamma(gamma);
            let mp = mp_moment_f64(l, 2.0 * gamma);
            assert!(
                ours <= mp * (1.0 + 1e-12),
                "l={l} gamma={gamma}: {ours} > {mp}"
            );
            // moments of a law supported in [0, (1 + sqrt y)^2]
            assert!(ours <= support_bound(2.0 * gamma).powi(l as i32) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn moment_table_exact_rows() {
    let limits = Limits::default();
    let polys: Vec<_> = (1..=3)
        .map(|l| limit_moment_polynomial(l, &limits).unwrap())
        .collect();
    let csv = moment_table_csv(&polys, &q(1, 2), true);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# gamma=1/2 y=1");
    assert_eq!(
        lines[1],
        "l,coefficients,gamma_convention,doubled_convention"
    );
    assert_eq!(&lines[2..], &["1,1,1,1", "2,1 2,2,3", "3,1 6 3,19/4,10"]);
}

#[test]
fn leading_class_size_regime() {
    let profile = DegreeProfile::new(vec![2]);
    let size = banded_class_size_leading(20, 3, 2, &profile, 1).unwrap();
    assert_eq!(size, (20u32 * 3 * 3).into());
    assert!(matches!(
        banded_class_size_leading(8, 3, 2, &profile, 1),
        Err(MomentError::RegimeViolation { .. })
    ));
    assert!(matches!(
        banded_class_size_leading(20, 3, 2, &profile, 0),
        Err(MomentError::InconsistentProfile { .. })
    ));
}

proptest! {
    #[test]
    fn rational_text_roundtrip(a in -10_000i64..10_000, b in 1i64..10_000) {
        let x = q(a, b);
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn polynomial_is_increasing_in_gamma(l in 2u32..9, a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let poly = limit_moment_polynomial(l, &Limits::default()).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(poly.at_gamma(lo) <= poly.at_gamma(hi));
        prop_assert!((poly.at_doubled(lo) - poly.at_gamma(2.0 * lo)).abs() <= 1e-9 * poly.at_gamma(2.0 * lo));
    }
}
