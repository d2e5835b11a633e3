use std::f64::consts::PI;

use gkz_core::gamma_series::{
    phi_restricted, phi_series, psi_series, restrict_middle_variables, x0_derivative_restrict,
};
use gkz_core::{Error, FractionalSeries, OneRowMatrix, SectorPoint};
use num_complex::Complex64;
use num_rational::BigRational;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn m(entries: &[i64]) -> OneRowMatrix {
    OneRowMatrix::new(entries.to_vec()).unwrap()
}

#[test]
fn psi_first_terms() {
    let s = psi_series(2, 3, &q(1, 2), 0, 1).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.get(&[0, 0]), Some(&q(1, 1)));
    assert_eq!(s.get(&[-3, 2]), Some(&q(21, 128)));
}

#[test]
fn psi_terminates_for_beta_in_semigroup() {
    let s = psi_series(2, 3, &q(3, 1), 1, 10).unwrap();
    assert!(s.is_polynomial());
    assert_eq!(s.len(), 1);
    assert_eq!(s.exponent(&[0, 1]), vec![q(0, 1), q(1, 1)]);
    assert!(matches!(psi_series(2, 3, &q(1, 2), 2, 3), Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn phi_examples() {
    let s = phi_series(&m(&[1, 2, 3]), &q(1, 2), 0, 6).unwrap();
    assert_eq!(s.get(&[0, 0, 0]), Some(&q(1, 1)));
    let s = phi_series(&m(&[1, 2, 3]), &q(2, 1), 0, 40).unwrap();
    assert!(s.is_polynomial());
    assert!(s.terms().all(|(o, _)| s.exponent(o)[1] <= q(1, 1)));
    let s = phi_series(&m(&[1, 4, 6]), &q(7, 10), 3, 8).unwrap();
    assert!(!s.is_zero());
    assert!(s.terms().all(|(o, _)| s.exponent(o)[0] >= q(0, 1)));
}

#[test]
fn polynomial_phi_stays_finite() {
    // β = j + h·a_{n-1} with h = 2: the number of terms stops growing.
    let a = m(&[1, 4, 6]);
    let beta = q(1 + 2 * 4, 1);
    let small = phi_series(&a, &beta, 1, 15).unwrap();
    let large = phi_series(&a, &beta, 1, 30).unwrap();
    assert!(small.is_polynomial());
    assert_eq!(small.len(), large.len());
}

#[test]
fn restricted_phi_examples() {
    let a = m(&[1, 2, 3]);
    let s = phi_restricted(&a, &q(1, 3), 0, 6).unwrap();
    assert_eq!(s.get(&[0, 0]), Some(&q(1, 1)));
    assert_eq!(s.exponent(&[0, 0]), vec![q(1, 6), q(0, 1)]);
    assert!(phi_restricted(&a, &q(1, 1), 1, 10).unwrap().is_zero());
    for j in 0..2 {
        let full = phi_series(&a, &q(1, 3), j, 10).unwrap();
        let (lhs, rhs) = (x0_derivative_restrict(&full, 0).unwrap(), phi_restricted(&a, &q(1, 3), j, 10).unwrap());
        assert_eq!(lhs.base(), rhs.base());
        assert_eq!(lhs.terms().collect::<Vec<_>>(), rhs.terms().collect::<Vec<_>>());
    }
}

#[test]
fn x0_derivative_of_monomial() {
    let mut s = FractionalSeries::new(vec![q(0, 1), q(1, 2)], vec![1, 1], 4).unwrap();
    s.insert(vec![1, 0], q(3, 1)).unwrap();
    let d = x0_derivative_restrict(&s, 1).unwrap();
    assert_eq!(d.get(&[0]), Some(&q(3, 1)));
    assert!(x0_derivative_restrict(&s, 0).unwrap().is_zero());
}

#[test]
fn middle_variable_restriction_is_exact() {
    let (big, small) = (m(&[1, 2, 4, 6]), m(&[1, 4, 6]));
    for beta in [q(7, 10), q(3, 1), q(-5, 2)] {
        for j in 0..4 {
            let lhs = restrict_middle_variables(&phi_series(&big, &beta, j, 12).unwrap(), &big).unwrap();
            let rhs = phi_series(&small, &beta, j, 12).unwrap();
            assert_eq!(lhs.max_abs_difference(&rhs).unwrap(), 0.0, "beta={beta} j={j}");
        }
    }
}

#[test]
fn evaluation_uses_carried_branch() {
    let s = psi_series(2, 3, &Complex64::new(0.5, 0.0), 0, 1).unwrap();
    let x = [SectorPoint::new(1.0, PI).unwrap(), SectorPoint::new(1e-3, PI).unwrap()];
    // x_1^{1/4} + (21/128) x_1^{1/4-3} x_2^2 with arg x_1 = arg x_2 = π.
    let expected = Complex64::from_polar(1.0, PI / 4.0)
        + Complex64::from_polar(21.0 / 128.0, PI * (0.25 - 3.0)) * Complex64::from_polar(1e-6, 2.0 * PI);
    assert!((s.evaluate(&x).unwrap() - expected).norm() < 1e-15);
    let zero = [SectorPoint::new(0.0, 0.0).unwrap(), x[1]];
    assert!(matches!(s.evaluate(&zero), Err(Error::ZeroBaseWithFractionalExponent(0))));
}

#[test]
fn series_document_round_trip() {
    let s = phi_series(&m(&[1, 4, 6]), &Complex64::new(0.7, -0.1), 2, 6).unwrap();
    let doc = s.to_doc();
    let text = serde_json::to_string(&doc).unwrap();
    let back = FractionalSeries::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.to_doc(), doc);
    assert_eq!(doc.v, "v1");
}
