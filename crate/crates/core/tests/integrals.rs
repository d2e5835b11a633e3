use std::f64::consts::{PI, TAU};

use gkz_core::contour::{circle_integral, epsilon_independence_check, integrate, PathSegment};
use gkz_core::expansion::{
    c_closed, closed_form_table, coefficients_on_cp, decomposition_matrix, derivative_relation_check,
    gevrey_order_estimate, ik1_closed, ik2_closed, lambda_j, mu_recovery, remainder_slope, sector_info,
    CoefficientEntry, CoefficientTable, Method, TableContext,
};
use gkz_core::gamma_series::psi_coefficient;
use gkz_core::{Cycle, Error, Exec, OneRowMatrix, SectorPoint};
use num_complex::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn sp(m: f64, a: f64) -> SectorPoint {
    SectorPoint::new(m, a).unwrap()
}

fn a23() -> OneRowMatrix {
    OneRowMatrix::new(vec![2, 3]).unwrap()
}

fn rel(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm()
}

#[test]
fn cp_shape() {
    let c13 = Cycle::cp(1, 3, 0.5).unwrap();
    let path = &c13.terms[0].path;
    assert_eq!(path.len(), 3);
    match path[1] {
        PathSegment::Arc { radius, from, to } => {
            assert_eq!(radius, 0.5);
            assert!((to - from - TAU / 3.0).abs() < 1e-15);
        }
        other => panic!("expected an arc, got {other:?}"),
    }
    assert!(matches!(Cycle::cp(0, 3, 1.0), Err(Error::BadP { .. })));
    assert_eq!(c13.rotate(0.0), c13);
    assert_eq!(c13.rotate(0.4).rotate(-0.4), c13);
    assert_eq!(c13.root(1, 0).unwrap(), c13);
}

#[test]
fn compact_cycle_residue() {
    let zero = [SectorPoint::zero(), SectorPoint::zero()];
    let v = integrate(&a23(), c(0.0), &zero, &Cycle::cp(3, 3, 1.0).unwrap(), 1e-13).unwrap().value;
    assert!((v - Complex64::new(0.0, TAU)).norm() < 1e-12);
    let ci = circle_integral(&a23(), c(0.0), &[sp(0.3, 1.0), sp(0.2, -2.0)], 1.0).unwrap();
    assert!((ci.value - Complex64::new(0.0, TAU)).norm() < 1e-12);
}

#[test]
fn circle_integral_sums() {
    let x = [sp(1.3, 0.7), sp(0.4, -0.3)];
    let five = circle_integral(&a23(), c(5.0), &x, 1.0).unwrap();
    let want = Complex64::new(0.0, TAU) * x[0].value() * x[1].value();
    assert!(rel(five.value, want) < 1e-14);
    assert!(five.discrepancy.unwrap() < 1e-8);
    let one = circle_integral(&a23(), c(1.0), &x, 1.0).unwrap();
    assert_eq!(one.value, c(0.0));
    assert!(one.quadrature.norm() < 1e-12);
}

#[test]
fn euler_scaling() {
    let x = [sp(1.0, PI), sp(1.0, PI)];
    let cycle = Cycle::cp(1, 3, 1.0).unwrap();
    let base = integrate(&a23(), c(0.3), &x, &cycle, 1e-13).unwrap().value;
    let scaled = integrate(&a23(), c(0.3), &[x[0].scale(4.0), x[1].scale(8.0)], &cycle, 1e-13).unwrap().value;
    assert!(rel(scaled, base * 2f64.powf(0.3)) < 1e-8);
}

#[test]
fn growing_ray_is_rejected() {
    let x = [sp(1.0, PI), sp(1.0, 0.0)];
    let err = integrate(&a23(), c(0.3), &x, &Cycle::cp(1, 3, 1.0).unwrap(), 1e-12).unwrap_err();
    assert!(matches!(err, Error::NotRapidDecay { .. }));
    assert!(err.is_analytic());
}

#[test]
fn epsilon_independence() {
    let x = [sp(1.0, PI), sp(1.0, PI)];
    assert!(epsilon_independence_check(&a23(), c(0.3), &x, 1, 0.5, 1.0, 1e-13).unwrap() < 1e-9);
    assert_eq!(epsilon_independence_check(&a23(), c(0.3), &x, 1, 0.7, 0.7, 1e-13).unwrap(), 0.0);
    assert!(epsilon_independence_check(&a23(), c(0.0), &x, 3, 0.5, 1.0, 1e-13).unwrap() < 1e-9);
}

#[test]
fn sector_examples() {
    let s = sector_info(1, 2, 3).unwrap();
    assert_eq!(s.ell, 1);
    assert!((s.alpha - TAU / 3.0).abs() < 1e-15);
    let s = sector_info(3, 2, 3).unwrap();
    assert_eq!((s.ell, s.alpha), (2, 0.0));
    assert!(matches!(sector_info(1, 1, 2), Err(Error::HalfTurn { .. })));
}

#[test]
fn ik1_matches_ray_integrals() {
    // At x_1 = -1 the integral is Γ((bk-β)/a) / (a k!).
    let v = ik1_closed(2, 3, c(0.3), 2, sp(1.0, PI)).unwrap();
    assert!(rel(v, c(0.4373451690878653)) < 1e-13);
    // Off the negative axis, against an independent ray quadrature.
    let v = ik1_closed(3, 5, c(0.7), 2, sp(2.0, 0.8 * PI)).unwrap();
    assert!(rel(v, Complex64::new(-0.015_725_454_317_703_905, 0.039_717_963_792_094_398)) < 1e-12);
    assert!(matches!(ik1_closed(2, 3, c(0.3), 2, sp(1.0, 0.0)), Err(Error::WrongSector(_))));
    assert!(matches!(ik1_closed(2, 3, c(6.0), 2, sp(1.0, PI)), Err(Error::GammaPole(_))));
}

#[test]
fn ik2_branch_factor() {
    let (beta, k, x1) = (c(0.5), 1, sp(1.0, PI));
    let i1 = ik1_closed(2, 3, beta, k, x1).unwrap();
    let i2 = ik2_closed(2, 3, beta, k, 3, x1).unwrap();
    let t = (beta - 3.0) / 2.0;
    assert!(rel(i2, i1 * (Complex64::new(0.0, -TAU * 2.0) * t).exp()) < 1e-14);
    // Integer (β - kb)/a gives a trivial factor.
    let i1 = ik1_closed(2, 3, c(1.0), 1, x1).unwrap();
    assert!(rel(ik2_closed(2, 3, c(1.0), 1, 3, x1).unwrap(), i1) < 1e-14);
}

#[test]
fn closed_form_against_quadrature() {
    let x1 = sp(1.0, PI);
    let table = coefficients_on_cp(2, 3, c(0.3), 1, x1, 12, 1e-12, Exec::Sequential).unwrap();
    for k in 2..=12 {
        let closed = c_closed(2, 3, c(0.3), 1, k, x1).unwrap();
        assert!(rel(table.get(k, Method::Quadrature).unwrap(), closed) < 1e-8, "k={k}");
    }
    assert!(matches!(c_closed(2, 3, c(0.3), 1, 0, x1), Err(Error::TooSmallK { .. })));
    // β = b j + a q: the j-class vanishes for large m.
    for m in 2..6 {
        assert_eq!(c_closed(2, 3, c(5.0), 1, 2 * m + 1, x1).unwrap(), c(0.0));
    }
}

#[test]
fn lambda_consistency() {
    let (beta, x1) = (c(0.3), sp(1.0, PI));
    let (j, m) = (0, 2);
    let k = 2 * m + j;
    let q = (Complex64::new(0.0, TAU) * (c((3 * j) as f64) - beta) / 2.0).exp();
    let ell = sector_info(1, 2, 3).unwrap().ell;
    let h = (beta - (3 * j) as f64) / 2.0;
    let via_lambda = lambda_j(2, 3, beta, j).unwrap()
        * (q.powi(ell as i32) - 1.0)
        * psi_coefficient(2, 3, beta, j, m)
        * x1.pow(h - (3 * m) as f64).unwrap();
    assert!(rel(via_lambda, c_closed(2, 3, beta, 1, k, x1).unwrap()) < 1e-10);
    assert!(matches!(lambda_j(2, 3, c(1.0), 1), Err(Error::SinPole)));
}

#[test]
fn decomposition_two_by_two() {
    let d = decomposition_matrix(2, 3, c(0.5), &[1, 2]).unwrap();
    let four_i = Complex64::new(0.0, 4.0);
    assert!((d.det_direct - four_i).norm() < 1e-14);
    assert!((d.det_formula - four_i).norm() < 1e-14);
    let d = decomposition_matrix(1, 2, c(0.3), &[1]).unwrap();
    assert!((d.det_direct - d.det_formula).norm() < 1e-15);
    let d = decomposition_matrix(3, 5, c(4.0), &[3, 1, 2]).unwrap();
    assert_eq!(d.rank, 2);
    assert!(d.matrix[d.j0.unwrap() as usize].iter().all(|z| *z == c(0.0)));
}

#[test]
fn mu_recovery_examples() {
    let x1 = sp(1.0, PI);
    assert!(mu_recovery(2, 3, c(0.3), 1, x1, 12, 1e-13).unwrap().max_relative_error < 1e-6);
    assert!(mu_recovery(2, 3, c(0.3), 3, x1, 12, 1e-13).unwrap().max_relative_error < 1e-6);
    let integral = mu_recovery(2, 3, c(1.0), 1, x1, 12, 1e-13).unwrap();
    assert!(integral.mu[1].norm() < 1e-7 * integral.scale);
}

#[test]
fn remainder_orders() {
    let x1 = sp(1.0, 4.0 * PI / 3.0);
    let cycle = Cycle::cp(1, 3, 1.0).unwrap();
    let moduli: Vec<f64> = (4..=10).map(|e| 2f64.powi(-e)).collect();
    for (n, lo, hi) in [(0, 0.9, 1.1), (2, 2.85, 3.15), (5, 5.8, 6.2)] {
        let fit = remainder_slope(&a23(), c(0.3), &[x1], &cycle, n, &moduli, PI, 1e-13).unwrap();
        assert!(fit.slope > lo && fit.slope < hi, "N={n}: slope {}", fit.slope);
    }
}

#[test]
fn gevrey_fits() {
    let x1 = sp(1.0, PI);
    let t = closed_form_table(2, 3, c(0.3), 1, x1, 10..60, Exec::Parallel).unwrap();
    assert!((gevrey_order_estimate(&t).unwrap() - 1.5).abs() < 0.1);
    let t = closed_form_table(3, 5, c(0.3), 1, x1, 10..60, Exec::Parallel).unwrap();
    assert!((gevrey_order_estimate(&t).unwrap() - 5.0 / 3.0).abs() < 0.11);
    // All c_k = 1/k!: a convergent series.
    let context = TableContext { matrix: vec![2, 3], beta: [0.0, 0.0], p: None, cycle: None, x_head: vec![x1] };
    let mut f = 1.0;
    let entries = (0..60)
        .map(|k| {
            if k > 0 {
                f *= k as f64;
            }
            CoefficientEntry::new(k, c(1.0 / f), Method::ClosedForm, 0.0)
        })
        .collect();
    let s = gevrey_order_estimate(&CoefficientTable::new(context, entries)).unwrap();
    assert!((s - 1.0).abs() < 0.05);
}

#[test]
fn derivative_relation() {
    let x1 = sp(1.0, PI);
    assert!(derivative_relation_check(2, 3, c(0.3), 0, 2, x1).unwrap() < 1e-10);
    assert!(derivative_relation_check(2, 3, c(0.3), 0, 0, x1).unwrap() < 1e-15);
    assert!(derivative_relation_check(3, 5, c(0.7), 1, 1, x1).unwrap() < 1e-10);
}

#[test]
fn parallel_and_sequential_tables_agree() {
    let x1 = sp(1.0, PI);
    let s = coefficients_on_cp(3, 5, c(0.5), 2, x1, 15, 1e-12, Exec::Sequential).unwrap();
    let p = coefficients_on_cp(3, 5, c(0.5), 2, x1, 15, 1e-12, Exec::Parallel).unwrap();
    assert_eq!(s, p);
}
