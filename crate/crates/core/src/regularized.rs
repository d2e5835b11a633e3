//! Half-line integrals from the origin for integer β, made convergent at 0
//! either by subtracting the Taylor polynomial of the exponential (J_β) or
//! by subtracting it only near the origin through a smooth cutoff (J_{φ,β}).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{Integrand, PathSegment};
use crate::error::{Error, Result};
use crate::expansion::{ik1_closed, CoefficientEntry, CoefficientTable, Method, TableContext};
use crate::lattice::OneRowMatrix;
use crate::par::{self, Exec};
use crate::quadrature::{self, QuadOptions, QuadResult};
use crate::sector::SectorPoint;
use crate::special::factorial;

/// Taylor coefficients `T_0..=T_dmax` of `exp(Σ x_j t^{a_j})` in `t`, from
/// `d·T_d = Σ a_j x_j T_{d-a_j}`.
pub fn taylor_coefficients(poly: &[(i64, Complex64)], dmax: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0); dmax + 1];
    t[0] = Complex64::new(1.0, 0.0);
    for d in 1..=dmax {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, x) in poly {
            let a = a as usize;
            if a <= d {
                acc += a as f64 * x * t[d - a];
            }
        }
        t[d] = acc / d as f64;
    }
    t
}

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// The canonical cutoff: 1 on [0, 1], 0 on [2, ∞), smooth in between.
pub fn cutoff(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let (u, v) = (glue(2.0 - t), glue(t - 1.0));
        u / (u + v)
    }
}

fn representable(d: i64, exps: &[i64]) -> bool {
    if d < 0 {
        return false;
    }
    let mut reach = vec![false; d as usize + 1];
    reach[0] = true;
    for s in 1..=d as usize {
        reach[s] = exps.iter().any(|&a| a as usize <= s && reach[s - a as usize]);
    }
    reach[d as usize]
}

/// Radius inside which the Taylor series of the exponential is summed.
fn series_radius(poly: &[(i64, SectorPoint)]) -> f64 {
    let n = poly.len().max(1) as f64;
    poly.iter().map(|(a, x)| (1.0 / (n * x.modulus)).powf(1.0 / *a as f64)).fold(0.5, f64::min)
}

/// `Σ_{d > dmax} T_d ∫_0^ρ t^{e+d} dt` along `arg t = θ`, with every
/// exponent `e + d + 1` positive.
fn series_part(taylor: &[Complex64], e: i64, dlow: i64, rho: f64, theta: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut small = 0;
    for (d, td) in taylor.iter().enumerate().skip(dlow.max(0) as usize) {
        let p = e + d as i64 + 1;
        debug_assert!(p > 0);
        let term = td * Complex64::from_polar(rho.powi(p as i32), theta * p as f64) / p as f64;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            small += 1;
            if small > 8 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

const SERIES_TERMS: usize = 600;

fn head_values(poly: &[(i64, SectorPoint)]) -> Vec<(i64, Complex64)> {
    poly.iter().map(|(a, x)| (*a, x.value())).collect()
}

/// `∫_{e^{iθ}[0,∞)} t^{-β-1} (t^s e^{H(t)} - Σ_{d<=β-s} T_d t^{s+d}) dt` for
/// `H = Σ x_j t^{a_j}` with Taylor coefficients `T_d`. Fails with BetaInNA
/// when `β - s` is a sum of the exponents, i.e. when a `t^{-1}` term would
/// survive the subtraction.
pub fn regularized_half_line(beta: i64, shift: i64, poly: &[(i64, SectorPoint)], theta: f64, tol: f64) -> Result<QuadResult> {
    let poly: Vec<(i64, SectorPoint)> = poly.iter().copied().filter(|(_, x)| !x.is_zero()).collect();
    let exps: Vec<i64> = poly.iter().map(|p| p.0).collect();
    let top = beta - shift;
    if representable(top, &exps) {
        return Err(Error::BetaInNA(beta));
    }
    let e = shift - beta - 1;
    let integrand = Integrand::new(Complex64::new(e as f64, 0.0), poly.clone());
    integrand.check_decay(theta)?;
    let rho = series_radius(&poly);
    let taylor = taylor_coefficients(&head_values(&poly), top.max(0) as usize + SERIES_TERMS);
    let near = series_part(&taylor, e, top + 1, rho, theta);
    let far = integrand.segment(&PathSegment::RayOut { eps: rho, angle: theta }, QuadOptions::with_tol(tol))?;
    // ∫_ρ^∞ t^{e+d} dt for the subtracted terms, all with e + d + 1 < 0.
    let mut subtracted = Complex64::new(0.0, 0.0);
    for d in 0..=top {
        let p = e + d + 1;
        if p != 0 {
            subtracted += taylor[d as usize] * Complex64::from_polar(rho.powi(p as i32), theta * p as f64) / (-p as f64);
        }
    }
    Ok(QuadResult { value: near + far.value - subtracted, ..far })
}

/// `∫_0^∞ t^{-β-1} (t^s e^{H(t)} - Σ_{d<=β-s} T_d (tφ(t))^{s+d}) dt` on the
/// real half-line with the canonical cutoff φ.
pub fn cutoff_half_line(beta: i64, shift: i64, poly: &[(i64, SectorPoint)], tol: f64) -> Result<QuadResult> {
    let poly: Vec<(i64, SectorPoint)> = poly.iter().copied().filter(|(_, x)| !x.is_zero()).collect();
    let top = beta - shift;
    if shift == 0 && beta == 0 {
        return Err(Error::Invalid("the cutoff integral diverges logarithmically for β = 0".into()));
    }
    let e = shift - beta - 1;
    let integrand = Integrand::new(Complex64::new(e as f64, 0.0), poly.clone());
    integrand.check_decay(0.0)?;
    let rho = series_radius(&poly);
    let head = head_values(&poly);
    let taylor = taylor_coefficients(&head, top.max(0) as usize + SERIES_TERMS);
    let near = series_part(&taylor, e, top + 1, rho, 0.0);
    let opts = QuadOptions::with_tol(tol);
    let middle = quadrature::integrate(
        |t| {
            let h: Complex64 = head.iter().map(|(a, x)| x * t.powi(*a as i32)).sum();
            let tp = t * cutoff(t);
            let mut sub = Complex64::new(0.0, 0.0);
            for d in 0..=top {
                sub += taylor[d as usize] * tp.powi((shift + d) as i32);
            }
            (h.exp() * t.powi(shift as i32) - sub) * t.powi((-beta - 1) as i32)
        },
        &[rho, 1.0, 1.5, 2.0],
        opts,
    )?;
    let far = integrand.segment(&PathSegment::RayOut { eps: 2.0, angle: 0.0 }, opts)?;
    // Where φ = 0 only the constant term (tφ)^0 = 1 of the polynomial is left.
    let constant = if shift == 0 && top >= 0 { 2f64.powi(-beta as i32) / beta as f64 } else { 0.0 };
    Ok(QuadResult { value: near + middle.value + far.value - constant, ..far.combine(middle) })
}

fn check_head(a: &OneRowMatrix, x: &[SectorPoint]) -> Result<Vec<(i64, SectorPoint)>> {
    if x.len() != a.n() {
        return Err(Error::Invalid(format!("expected {} point values, got {}", a.n(), x.len())));
    }
    Ok(a.entries().iter().copied().zip(x.iter().copied()).collect())
}

/// The regularized integral J_β over the rotated half-line `e^{iθ}[0,∞)`.
pub fn j_beta_integral(a: &OneRowMatrix, beta: i64, x: &[SectorPoint], theta: f64, tol: f64) -> Result<Complex64> {
    let poly = check_head(a, x)?;
    if a.in_semigroup(beta) {
        return Err(Error::BetaInNA(beta));
    }
    Ok(regularized_half_line(beta, 0, &poly, theta, tol)?.value)
}

/// The cutoff integral J_{φ,β} over ℝ_{≥0}; a solution modulo convergent
/// series only.
pub fn j_phi_integral(a: &OneRowMatrix, beta: i64, x: &[SectorPoint], tol: f64) -> Result<Complex64> {
    let poly = check_head(a, x)?;
    Ok(cutoff_half_line(beta, 0, &poly, tol)?.value)
}

/// `c_k = Γ((bk-β)/a) e^{-iπ(β-bk)/a} x_1^{(β-bk)/a} / (a·k!)`, valid once
/// `bk > β` so that nothing is subtracted.
pub fn j_beta_coefficients_closed(a: i64, b: i64, beta: i64, k: i64, x1: SectorPoint) -> Result<Complex64> {
    if b * k <= beta {
        let k_min = beta.div_euclid(b) + 1;
        return Err(Error::TooSmallK { k, k_min });
    }
    ik1_closed(a, b, Complex64::new(beta as f64, 0.0), k, x1)
}

/// Steepest-descent direction for `x t^a`.
pub fn descent_angle(a: i64, x: SectorPoint) -> f64 {
    (std::f64::consts::PI - x.arg) / a as f64
}

/// The coefficient of `x_n^k` in J_β by quadrature:
/// `(1/k!) ∫ t^{-β-1+a_n k} (e^{H} - Taylor_{<=β-a_n k}) dt`.
pub fn j_beta_coefficient_quadrature(a: &OneRowMatrix, beta: i64, k: i64, x_head: &[SectorPoint], tol: f64) -> Result<QuadResult> {
    if x_head.len() + 1 != a.n() {
        return Err(Error::Invalid("head dimension mismatch".into()));
    }
    let n = a.n();
    let poly: Vec<(i64, SectorPoint)> = a.entries()[..n - 1].iter().copied().zip(x_head.iter().copied()).collect();
    let theta = descent_angle(a.entries()[n - 2], x_head[n - 2]);
    let r = regularized_half_line(beta, a.last() * k, &poly, theta, tol)?;
    Ok(r.scaled(Complex64::new(1.0 / factorial(k as u64), 0.0)))
}

/// Coefficient table of J_β for A = (a, b): quadrature for every `k` in
/// `ks`, closed form where `bk > β`.
pub fn j_beta_table(a: i64, b: i64, beta: i64, x1: SectorPoint, ks: std::ops::Range<i64>, tol: f64, exec: Exec) -> Result<CoefficientTable> {
    let m = OneRowMatrix::new(vec![a, b])?;
    if m.in_semigroup(beta) {
        return Err(Error::BetaInNA(beta));
    }
    let rows = par::map_range(exec, ks, |k| -> Result<Vec<CoefficientEntry>> {
        let q = j_beta_coefficient_quadrature(&m, beta, k, &[x1], tol)?;
        let mut out = vec![CoefficientEntry::new(k, q.value, Method::RegularizedQuadrature, q.error)];
        if b * k > beta {
            out.push(CoefficientEntry::new(k, j_beta_coefficients_closed(a, b, beta, k, x1)?, Method::RegularizedClosed, 0.0));
        }
        Ok(out)
    });
    let entries = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let context = TableContext { matrix: vec![a, b], beta: [beta as f64, 0.0], p: None, cycle: None, x_head: vec![x1] };
    Ok(CoefficientTable::new(context, entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JPhiCoefficient {
    pub k: i64,
    pub value: Complex64,
    pub error: f64,
    /// Set when the subtraction is active, so the value depends on φ.
    pub cutoff_dependent: bool,
}

/// The coefficient of `x_n^k` in J_{φ,β}. Once `a_n k > β` it is the
/// cutoff-free integral (closed form for n = 2); below that it is computed
/// with the canonical cutoff and flagged.
pub fn j_phi_coefficients(a: &OneRowMatrix, beta: i64, k: i64, x_head: &[SectorPoint], tol: f64) -> Result<JPhiCoefficient> {
    if x_head.len() + 1 != a.n() {
        return Err(Error::Invalid("head dimension mismatch".into()));
    }
    let n = a.n();
    let shift = a.last() * k;
    let dependent = shift <= beta;
    if !dependent && n == 2 {
        let value = ik1_closed(a.entries()[0], a.last(), Complex64::new(beta as f64, 0.0), k, x_head[0])?;
        return Ok(JPhiCoefficient { k, value, error: 0.0, cutoff_dependent: false });
    }
    let poly: Vec<(i64, SectorPoint)> = a.entries()[..n - 1].iter().copied().zip(x_head.iter().copied()).collect();
    let r = cutoff_half_line(beta, shift, &poly, tol)?;
    let f = factorial(k as u64);
    Ok(JPhiCoefficient { k, value: r.value / f, error: r.error / f, cutoff_dependent: dependent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sp(m: f64, a: f64) -> SectorPoint {
        SectorPoint::new(m, a).unwrap()
    }

    #[test]
    fn taylor_of_simple_exponential() {
        let t = taylor_coefficients(&[(2, Complex64::new(3.0, 0.0))], 6);
        assert_eq!(t[1], Complex64::new(0.0, 0.0));
        assert!((t[4] - Complex64::new(4.5, 0.0)).norm() < 1e-15);
        assert!((t[6] - Complex64::new(4.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(2.5), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        assert!(cutoff(1.2) > cutoff(1.7));
    }

    #[test]
    fn plain_integral_for_negative_beta() {
        // β = -1: ∫_0^∞ e^{-t²} dt = √π/2 with nothing subtracted.
        let a = OneRowMatrix::new(vec![1, 2]).unwrap();
        let v = j_beta_integral(&a, -1, &[SectorPoint::zero(), sp(1.0, PI)], 0.0, 1e-13).unwrap();
        assert!((v - Complex64::new(PI.sqrt() / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn subtraction_of_constant() {
        // β = 1, A = (2, 3), x_2 = 0: ∫ t^{-2}(e^{-t²} - 1) dt = -√π.
        let a = OneRowMatrix::new(vec![2, 3]).unwrap();
        let v = j_beta_integral(&a, 1, &[sp(1.0, PI), SectorPoint::zero()], 0.0, 1e-13).unwrap();
        assert!((v + Complex64::new(PI.sqrt(), 0.0)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn semigroup_beta_rejected() {
        let a = OneRowMatrix::new(vec![2, 3]).unwrap();
        let x = [sp(1.0, PI), sp(0.1, PI)];
        assert!(matches!(j_beta_integral(&a, 5, &x, 0.0, 1e-12), Err(Error::BetaInNA(5))));
        assert!(matches!(j_beta_coefficients_closed(2, 3, 1, 0, x[0]), Err(Error::TooSmallK { .. })));
    }

    #[test]
    fn cutoff_matches_regularized_when_nothing_is_subtracted() {
        let a = OneRowMatrix::new(vec![2, 3]).unwrap();
        let x = [sp(1.0, PI)];
        let c = j_phi_coefficients(&a, 1, 1, &x, 1e-13).unwrap();
        assert!(!c.cutoff_dependent);
        let q = j_beta_coefficient_quadrature(&a, 1, 1, &x, 1e-13).unwrap();
        assert!((c.value - q.value).norm() < 1e-12 * c.value.norm());
        assert!(j_phi_coefficients(&a, 5, 1, &x, 1e-13).unwrap().cutoff_dependent);
    }
}
