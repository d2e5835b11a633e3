use std::f64::consts::PI;

use gkz_core::gamma_series::{phi_series, psi_series};
use gkz_core::restriction::{
    build_tilde_cycle, dft_weights, lambda_quotient, p_of_j, reduced_beta, tilde_cycle_check, varpi_apply,
    varpi_structure, RestrictionIndex,
};
use gkz_core::{Cycle, OneRowMatrix, SectorPoint};
use num_complex::Complex64;
use num_rational::BigRational;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn m(entries: &[i64]) -> OneRowMatrix {
    OneRowMatrix::new(entries.to_vec()).unwrap()
}

#[test]
fn index_map_examples() {
    assert_eq!(p_of_j(2, 3, 2, 3).unwrap(), RestrictionIndex { j: 3, q: 1, r: 1, p: 1 });
    assert_eq!(p_of_j(3, 5, 1, 2).unwrap(), RestrictionIndex { j: 2, q: 2, r: 0, p: 1 });
    for j in 0..12 {
        let idx = p_of_j(3, 5, 4, j).unwrap();
        assert_eq!((5 * idx.p - idx.q).rem_euclid(3), 0);
        assert_eq!(4 * idx.q + idx.r, j);
    }
}

#[test]
fn quotient_examples() {
    assert_eq!(lambda_quotient(2, 3, 1, &q(1, 2), 0).unwrap().value, q(1, 1));
    assert!(lambda_quotient(2, 3, 1, &q(1, 1), 1).unwrap().zero_lambda);
    let l = lambda_quotient(2, 3, 1, &q(5, 1), 1).unwrap();
    assert!(!l.zero_lambda);
    assert_ne!(l.value, q(0, 1));
}

#[test]
fn varpi_on_one_four_six() {
    let a = m(&[1, 4, 6]);
    let beta = q(7, 10);
    let comps = varpi_apply(&phi_series(&a, &beta, 3, 20).unwrap(), 2).unwrap();
    assert!(comps[0].is_zero());
    let lambda = lambda_quotient(2, 3, 2, &beta, 3).unwrap().value;
    let psi = psi_series(2, 3, &reduced_beta(2, &beta, 1), 1, 20).unwrap();
    let (c1, scaled) = (&comps[1], psi.scale(&lambda));
    // Compare on the common range of the two truncations.
    let mut compared = 0;
    for (o, v) in scaled.terms() {
        let e = scaled.exponent(o);
        if let Some((_, w)) = c1.terms().find(|(o2, _)| c1.exponent(o2) == e) {
            assert_eq!(v, w);
            compared += 1;
        }
    }
    assert!(compared >= 3);
}

#[test]
fn varpi_structure_reports() {
    let a = m(&[1, 4, 6]);
    for beta in [q(7, 10), q(3, 1)] {
        let r = varpi_structure(&a, &beta, 20).unwrap();
        assert!(r.single_component());
        assert_eq!(r.max_difference(), 0.0);
    }
    let generic = varpi_structure(&m(&[1, 6, 10]), &q(7, 10), 12).unwrap();
    assert!(generic.single_component() && generic.missed.is_empty());
    let degenerate = varpi_structure(&m(&[1, 2, 3]), &q(1, 1), 20).unwrap();
    assert_eq!(degenerate.missed.len(), 1);
}

#[test]
fn dft_examples() {
    assert_eq!(dft_weights(1), vec![vec![Complex64::new(1.0, 0.0)]]);
    let w = dft_weights(2);
    let expect = [[0.5, 0.5], [0.5, -0.5]];
    for l in 0..2 {
        for nu in 0..2 {
            assert!((w[l][nu] - expect[l][nu]).norm() < 1e-16);
        }
    }
    let k = 5;
    let w = dft_weights(k);
    for l in 0..k as usize {
        for l2 in 0..k as usize {
            let s: Complex64 = (0..k as usize)
                .map(|nu| w[l][nu] * Complex64::from_polar(1.0, -2.0 * PI * (nu * l2) as f64 / k as f64))
                .sum();
            let want = if l == l2 { 1.0 } else { 0.0 };
            assert!((s - want).norm() < 1e-14);
        }
    }
}

#[test]
fn tilde_cycles() {
    let gamma = Cycle::cp(1, 3, 1.0).unwrap();
    assert_eq!(build_tilde_cycle(&gamma, 1, Complex64::new(0.7, 0.0), 0).unwrap(), gamma);
    let ap = m(&[1, 4, 6]);
    let (x1, x2) = (SectorPoint::new(1.0, PI).unwrap(), SectorPoint::new(0.05, PI).unwrap());
    for (r, ell) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
        let t = tilde_cycle_check(&ap, Complex64::new(0.7, 0.0), r, ell, &gamma, x1, x2, 1e-12).unwrap();
        assert!(t.relative < 1e-7, "r={r} ell={ell}: {}", t.relative);
    }
}
