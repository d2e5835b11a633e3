//! The Γ-series bases: ψ^{(j)} for a two-entry row (a, b) and φ^{(j)} for a row
//! (1, a_2, ..., a_n), together with the restriction maps acting on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{gamma_coefficient, gcd, OneRowMatrix};
use crate::scalar::Scalar;
use crate::series::FractionalSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Variant {
    Psi2,
    PhiGeneral,
    PhiRestricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesLabel {
    pub matrix: Vec<i64>,
    pub beta: [f64; 2],
    pub j: i64,
    pub variant: Variant,
}

impl SeriesLabel {
    fn new<S: Scalar>(matrix: &[i64], beta: &S, j: i64, variant: Variant) -> Self {
        let b = beta.to_c64();
        SeriesLabel { matrix: matrix.to_vec(), beta: [b.re, b.im], j, variant }
    }
}

fn check_pair(a: i64, b: i64) -> Result<()> {
    if a < 1 || b <= a || gcd(a, b) != 1 {
        return Err(Error::InvalidMatrix(format!("need 1 <= a < b coprime, got ({a}, {b})")));
    }
    Ok(())
}

/// ψ^{(j)} for A = (a, b): terms
/// `[h]_{bm} / [am+j]_{am} · x_1^{h-bm} x_2^{am+j}`, `h = (β - jb)/a`, `m <= N`.
///
/// Stored with base `(h, 0)`, offsets `(-bm, am+j)` and grading weights
/// `(0, 1)`, so the truncation order is `aN + j`.
pub fn psi_series<S: Scalar>(a: i64, b: i64, beta: &S, j: i64, n: i64) -> Result<FractionalSeries<S>> {
    check_pair(a, b)?;
    if j < 0 || j >= a {
        return Err(Error::IndexOutOfRange { index: j, bound: a });
    }
    if n < 0 {
        return Err(Error::Invalid("truncation order must be nonnegative".into()));
    }
    let h = (beta.clone() - S::from_i64(j * b)) / S::from_i64(a);
    let v = [h.clone(), S::from_i64(j)];
    let mut s = FractionalSeries::new(vec![h.clone(), S::zero()], vec![0, 1], a * n + j)?;
    for m in 0..=n {
        let c = gamma_coefficient(&v, &[-b * m, a * m])?;
        s.insert(vec![-b * m, a * m + j], c)?;
    }
    if let Some(hn) = h.as_integer() {
        s.set_polynomial(hn >= 0 && b * n >= hn);
    }
    Ok(s.with_label(SeriesLabel::new(&[a, b], beta, j, Variant::Psi2)))
}

struct PhiShape {
    n: usize,
    top: i64,
    h_cap: Option<i64>,
}

fn phi_shape<S: Scalar>(ap: &OneRowMatrix, beta: &S, j: i64) -> Result<(PhiShape, S)> {
    let e = ap.entries();
    if e[0] != 1 {
        return Err(Error::NotLeadingOne(e[0]));
    }
    let n = e.len();
    if n < 3 {
        return Err(Error::InvalidMatrix("phi series need at least three entries".into()));
    }
    let top = e[n - 2];
    if j < 0 || j >= top {
        return Err(Error::IndexOutOfRange { index: j, bound: top });
    }
    let h = (beta.clone() - S::from_i64(j)) / S::from_i64(top);
    let h_cap = h.as_integer().filter(|&x| x >= 0);
    Ok((PhiShape { n, top, h_cap }, h))
}

/// Enumerates `m ∈ ℕ^{n-1}` (indexed by variables 1..n) with total at most
/// `budget`, calling `visit` with the x_0 offset `j + a_{n-1} m_{n-1} - Σ a_i m_i`.
fn enumerate_m(
    e: &[i64],
    shape: &PhiShape,
    j: i64,
    budget: i64,
    visit: &mut dyn FnMut(&[i64], i64) -> Result<()>,
) -> Result<()> {
    fn rec(
        e: &[i64],
        shape: &PhiShape,
        idx: usize,
        left: i64,
        d0: i64,
        m: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64], i64) -> Result<()>,
    ) -> Result<()> {
        if idx == shape.n {
            if d0 >= 0 {
                visit(m, d0)?;
            }
            return Ok(());
        }
        let mut cap = left;
        if idx == shape.n - 2 {
            if let Some(hc) = shape.h_cap {
                cap = cap.min(hc);
            }
        }
        for k in 0..=cap {
            let d = if idx == shape.n - 2 { d0 + shape.top * k } else { d0 - e[idx] * k };
            // Offsets of x_0 only grow through m_{n-1}, which is visited
            // after the middle variables; prune once that can no longer help.
            if idx > shape.n - 2 && d < 0 {
                break;
            }
            m[idx - 1] = k;
            rec(e, shape, idx + 1, left - k, d, m, visit)?;
        }
        m[idx - 1] = 0;
        Ok(())
    }
    let mut m = vec![0i64; shape.n - 1];
    rec(e, shape, 1, budget, j, &mut m, visit)
}

fn phi_weights(n: usize) -> Vec<i64> {
    let mut w = vec![1i64; n];
    w[0] = 0;
    w[n - 2] = -1;
    w
}

/// φ^{(j)} for A′ = (1, a_2, ..., a_n): the Γ-series with
/// `v^j = (j, 0, ..., 0, (β-j)/a_{n-1}, 0)` summed over `m` with total `<= N`.
///
/// Base `(0, ..., 0, h, 0)`; the x_0 offset is the full x_0 exponent
/// `j + a_{n-1} m_{n-1} - Σ a_i m_i`, the others are `m_i`, except the
/// `a_{n-1}` variable whose offset is `-m_{n-1}`. The grading weights
/// `(0, 1, ..., 1, -1, 1)` make the grading equal to `Σ m_i`.
pub fn phi_series<S: Scalar>(ap: &OneRowMatrix, beta: &S, j: i64, n: i64) -> Result<FractionalSeries<S>> {
    let (shape, h) = phi_shape(ap, beta, j)?;
    let e = ap.entries();
    let nv = shape.n;
    let mut v = vec![S::zero(); nv];
    v[0] = S::from_i64(j);
    v[nv - 2] = h.clone();
    let mut base = vec![S::zero(); nv];
    base[nv - 2] = h.clone();
    let mut s = FractionalSeries::new(base, phi_weights(nv), n)?;
    enumerate_m(e, &shape, j, n, &mut |m, d0| {
        let mut u = Vec::with_capacity(nv);
        u.push(d0 - j);
        u.extend_from_slice(m);
        u[nv - 2] = -m[nv - 3];
        let c = gamma_coefficient(&v, &u)?;
        let mut offsets = u;
        offsets[0] = d0;
        s.insert(offsets, c)
    })?;
    if let Some(hc) = shape.h_cap {
        s.set_polynomial(n >= hc + j + shape.top * hc);
    }
    Ok(s.with_label(SeriesLabel::new(e, beta, j, Variant::PhiGeneral)))
}

/// φ^{(j)}(0, x), built directly from its closed coefficients
/// `[h]_{m_{n-1}} j! / ∏_{i≠n-1} m_i!` over the terms with x_0 exponent 0.
pub fn phi_restricted<S: Scalar>(ap: &OneRowMatrix, beta: &S, j: i64, n: i64) -> Result<FractionalSeries<S>> {
    let (shape, h) = phi_shape(ap, beta, j)?;
    let e = ap.entries();
    let nv = shape.n;
    let mut base = vec![S::zero(); nv - 1];
    base[nv - 3] = h.clone();
    let mut w = phi_weights(nv);
    w.remove(0);
    let mut s = FractionalSeries::new(base, w, n)?;
    let jf = factorial_s::<S>(j);
    enumerate_m(e, &shape, j, n, &mut |m, d0| {
        if d0 != 0 {
            return Ok(());
        }
        let mut c = h.pochhammer(m[nv - 3] as u64) * jf.clone();
        for (i, &mi) in m.iter().enumerate() {
            if i != nv - 3 {
                c = c / factorial_s::<S>(mi);
            }
        }
        let mut offsets = m.to_vec();
        offsets[nv - 3] = -m[nv - 3];
        s.insert(offsets, c)
    })?;
    if let Some(hc) = shape.h_cap {
        s.set_polynomial(n >= hc + j + shape.top * hc);
    }
    Ok(s.with_label(SeriesLabel::new(e, beta, j, Variant::PhiRestricted)))
}

pub(crate) fn factorial_s<S: Scalar>(n: i64) -> S {
    (1..=n).fold(S::one(), |acc, i| acc * S::from_i64(i))
}

/// `∂^ℓ/∂x_0^ℓ` at `x_0 = 0`: keeps the terms with x_0 exponent exactly `ℓ`,
/// multiplied by `ℓ!`, and drops the variable x_0.
pub fn x0_derivative_restrict<S: Scalar>(s: &FractionalSeries<S>, ell: i64) -> Result<FractionalSeries<S>> {
    if s.nvars() < 2 || s.base()[0].as_integer() != Some(0) {
        return Err(Error::NonIntegralX0Exponent);
    }
    if s.terms().any(|(o, _)| o[0] < 0) {
        return Err(Error::NonIntegralX0Exponent);
    }
    let f = factorial_s::<S>(ell);
    let mut out = FractionalSeries::from_parts(
        s.base()[1..].to_vec(),
        s.weights()[1..].to_vec(),
        s.truncation(),
        s.terms()
            .filter(|(o, _)| o[0] == ell)
            .map(|(o, c)| (o[1..].to_vec(), c.clone() * f.clone())),
    )?;
    out.set_polynomial(s.is_polynomial());
    Ok(out)
}

/// Sets the middle variables x_2 = ... = x_{n-2} to zero (n >= 4), leaving a
/// series in (x_1, x_{n-1}, x_n).
pub fn restrict_middle_variables<S: Scalar>(s: &FractionalSeries<S>, a: &OneRowMatrix) -> Result<FractionalSeries<S>> {
    let n = a.n();
    if n < 4 || s.nvars() != n {
        return Err(Error::Invalid("restriction needs n >= 4 variables".into()));
    }
    let middle = 1..n - 2;
    for i in middle.clone() {
        if s.base()[i].as_integer() != Some(0) {
            return Err(Error::ZeroBaseWithFractionalExponent(i));
        }
    }
    let keep = [0, n - 2, n - 1];
    let pick = |v: &[i64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let mut terms = Vec::new();
    for (o, c) in s.terms() {
        if middle.clone().any(|i| o[i] < 0) {
            return Err(Error::ZeroBaseWithFractionalExponent(middle.clone().find(|&i| o[i] < 0).unwrap_or(1)));
        }
        if middle.clone().all(|i| o[i] == 0) {
            terms.push((pick(o), c.clone()));
        }
    }
    let base: Vec<S> = keep.iter().map(|&i| s.base()[i].clone()).collect();
    let mut out = FractionalSeries::from_parts(base, pick(s.weights()), s.truncation(), terms)?;
    out.set_polynomial(s.is_polynomial());
    Ok(out)
}

/// Convenience: the ψ^{(j)} coefficient at index `m` in double precision.
pub fn psi_coefficient(a: i64, b: i64, beta: Complex64, j: i64, m: i64) -> Complex64 {
    let h = (beta - (j * b) as f64) / a as f64;
    let num = h.pochhammer((b * m) as u64);
    let den = Complex64::new((a * m + j) as f64, 0.0).pochhammer((a * m) as u64);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use std::f64::consts::PI;

    use crate::sector::SectorPoint;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn psi_first_terms() {
        let s = psi_series(2, 3, &q(1, 2), 0, 1).unwrap();
        assert_eq!(s.get(&[0, 0]), Some(&q(1, 1)));
        assert_eq!(s.get(&[-3, 2]), Some(&q(21, 128)));
        assert_eq!(s.len(), 2);
        assert_eq!(s.truncation(), 2);
    }

    #[test]
    fn psi_terminates_for_semigroup_beta() {
        let s = psi_series(2, 3, &q(3, 1), 1, 10).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&[0, 1]), Some(&q(1, 1)));
        assert!(s.is_polynomial());
        assert!(matches!(psi_series(2, 3, &q(1, 2), 2, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn psi_evaluation_by_substitution() {
        let s = psi_series(2, 3, &c(0.5), 0, 1).unwrap();
        let x1 = SectorPoint::new(1.0, PI).unwrap();
        let x2 = SectorPoint::new(1e-3, PI).unwrap();
        let got = s.evaluate(&[x1, x2]).unwrap();
        let want = Complex64::from_polar(1.0, PI / 4.0)
            + (21.0 / 128.0) * Complex64::from_polar(1.0, PI * (1.0 / 4.0 - 3.0)) * Complex64::from_polar(1e-6, 2.0 * PI);
        assert!((got - want).norm() < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn phi_examples() {
        let a = OneRowMatrix::new(vec![1, 2, 3]).unwrap();
        let s = phi_series(&a, &q(1, 2), 0, 6).unwrap();
        assert_eq!(s.get(&[0, 0, 0]), Some(&q(1, 1)));
        let poly = phi_series(&a, &q(2, 1), 0, 30).unwrap();
        assert!(poly.is_polynomial());
        assert!(poly.terms().all(|(o, _)| o[1] > -2));
        let a146 = OneRowMatrix::new(vec![1, 4, 6]).unwrap();
        let s = phi_series(&a146, &q(7, 10), 3, 12).unwrap();
        assert!(!s.is_zero());
        assert!(s.terms().all(|(o, _)| o[0] >= 0));
    }

    #[test]
    fn phi_restricted_vanishes_off_semigroup() {
        let a = OneRowMatrix::new(vec![1, 2, 3]).unwrap();
        assert!(phi_restricted(&a, &q(1, 1), 1, 20).unwrap().is_zero());
        let r = phi_restricted(&a, &q(1, 3), 0, 20).unwrap();
        assert_eq!(r.get(&[0, 0]), Some(&q(1, 1)));
    }

    #[test]
    fn x0_restriction_examples() {
        let mut s = FractionalSeries::new(vec![q(0, 1), q(1, 3)], vec![0, 1], 4).unwrap();
        s.insert(vec![1, 1], q(1, 1)).unwrap();
        assert!(x0_derivative_restrict(&s, 0).unwrap().is_zero());
        let d = x0_derivative_restrict(&s, 1).unwrap();
        assert_eq!(d.get(&[1]), Some(&q(1, 1)));
        let bad = FractionalSeries::new(vec![q(1, 2), q(0, 1)], vec![0, 1], 1).unwrap();
        assert_eq!(x0_derivative_restrict(&bad, 0), Err(Error::NonIntegralX0Exponent));
    }
}
