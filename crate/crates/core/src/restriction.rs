//! The morphism ϖ for A′ = (1, ka, kb): the x_0-derivatives at x_0 = 0 of
//! the φ-series, their identification with the ψ-series of (a, b), and the
//! cycles γ̃ whose integrals realize the same splitting.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{self, Cycle, Integrand};
use crate::error::{Error, Result};
use crate::gamma_series::{factorial_s, phi_series, psi_series, x0_derivative_restrict};
use crate::lattice::{gcd, mod_inverse, OneRowMatrix};
use crate::scalar::Scalar;
use crate::sector::SectorPoint;
use crate::series::FractionalSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionIndex {
    pub j: i64,
    pub q: i64,
    pub r: i64,
    /// `p(j)`: `0 <= p < a` with `b·p ≡ q (mod a)`.
    pub p: i64,
}

impl RestrictionIndex {
    /// `(bp - q)/a`, the x_1 shift between the φ and ψ indexings.
    pub fn shift(&self, a: i64, b: i64) -> i64 {
        (b * self.p - self.q) / a
    }
}

/// Splits `j = kq + r` and solves `b·p ≡ q (mod a)`.
pub fn p_of_j(a: i64, b: i64, k: i64, j: i64) -> Result<RestrictionIndex> {
    if j < 0 || j >= k * a {
        return Err(Error::IndexOutOfRange { index: j, bound: k * a });
    }
    if gcd(a, b) != 1 || k < 1 {
        return Err(Error::InvalidMatrix(format!("need gcd(a, b) = 1 and k >= 1, got a={a}, b={b}, k={k}")));
    }
    let (q, r) = (j / k, j % k);
    let inv = mod_inverse(b, a).ok_or_else(|| Error::InvalidMatrix("b is not invertible modulo a".into()))?;
    Ok(RestrictionIndex { j, q, r, p: (q * inv).rem_euclid(a) })
}

/// Splits A′ = (1, ka, kb) into `(k, a, b)`.
pub fn split_matrix(ap: &OneRowMatrix) -> Result<(i64, i64, i64)> {
    if ap.n() != 3 || ap.entries()[0] != 1 {
        return Err(Error::InvalidMatrix("expected a matrix of the form (1, ka, kb)".into()));
    }
    Ok(ap.pair())
}

/// The shifted exponent `(β - r)/k` of the ψ-series met by component `r`.
pub fn reduced_beta<S: Scalar>(k: i64, beta: &S, r: i64) -> S {
    (beta.clone() - S::from_i64(r)) / S::from_i64(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaQuotient<S> {
    pub index: RestrictionIndex,
    /// `Γ(z+n)/Γ(z) · j!/p!` with `z = (β-r)/(ka) - pb/a + 1`, `n = (bp-q)/a`.
    pub value: S,
    /// Raw coefficient ratios at m = 0, 1, 2 (skipping vanishing ψ terms).
    pub raw_ratios: Vec<S>,
    /// The component vanishes identically: λ_j = 0.
    pub zero_lambda: bool,
}

/// The constant with ϖ(φ^{(j)})_r = λ_j ψ^{(p(j))}, together with raw ratios
/// of individual coefficients as an m-independence check.
pub fn lambda_quotient<S: Scalar>(a: i64, b: i64, k: i64, beta: &S, j: i64) -> Result<LambdaQuotient<S>> {
    let index = p_of_j(a, b, k, j)?;
    let n = index.shift(a, b);
    let hp = (reduced_beta(k, beta, index.r) - S::from_i64(b * index.p)) / S::from_i64(a);
    let z = hp.clone() + S::one();
    let mut rising = S::one();
    for i in 0..n {
        rising = rising * (z.clone() + S::from_i64(i));
    }
    let value = rising * factorial_s::<S>(j) / factorial_s::<S>(index.p);
    // φ-side: j! [h]_{bm+n} / m2!, ψ-side: [h']_{bm} p! / m2!, with h = h' + n.
    let h = hp.clone() + S::from_i64(n);
    let mut raw_ratios = Vec::new();
    for m in 0..3 {
        let phi = h.pochhammer((b * m + n) as u64) * factorial_s::<S>(j);
        let psi = hp.pochhammer((b * m) as u64) * factorial_s::<S>(index.p);
        if !psi.is_zero() {
            raw_ratios.push(phi / psi);
        }
    }
    let zero_lambda = value.is_zero();
    Ok(LambdaQuotient { index, value, raw_ratios, zero_lambda })
}

/// Components `ℓ = 0..k-1` of ϖ: `∂^ℓ φ/∂x_0^ℓ` at `x_0 = 0`.
pub fn varpi_apply<S: Scalar>(phi: &FractionalSeries<S>, k: i64) -> Result<Vec<FractionalSeries<S>>> {
    (0..k).map(|ell| x0_derivative_restrict(phi, ell)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarpiRow {
    pub j: i64,
    pub r: i64,
    pub p: i64,
    /// Components with at least one nonzero coefficient.
    pub nonzero: Vec<i64>,
    pub zero_lambda: bool,
    /// `max |ϖ(φ^{(j)})_r - λ_j ψ^{(p)}|` over coefficients.
    pub difference: f64,
    /// Spread of the raw coefficient ratios around λ_j.
    pub ratio_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarpiReport {
    pub matrix: Vec<i64>,
    pub order: i64,
    pub rows: Vec<VarpiRow>,
    /// `(r, p)` pairs of the basis ψ^{(p)}_{(β-r)/k} not reached by any j.
    pub missed: Vec<(i64, i64)>,
}

impl VarpiReport {
    pub fn max_difference(&self) -> f64 {
        self.rows.iter().map(|r| r.difference).fold(0.0, f64::max)
    }

    /// Every j has at most one nonzero component, at index r(j).
    pub fn single_component(&self) -> bool {
        self.rows.iter().all(|row| row.nonzero.iter().all(|&l| l == row.r))
    }
}

/// Checks ϖ(φ^{(j)}) against λ_j ψ^{(p(j))}_{(a,b),(β-r)/k} for every j,
/// coefficient by coefficient through grading `order`.
pub fn varpi_structure<S: Scalar>(ap: &OneRowMatrix, beta: &S, order: i64) -> Result<VarpiReport> {
    let (k, a, b) = split_matrix(ap)?;
    let mut rows = Vec::new();
    let mut reached = std::collections::BTreeSet::new();
    for j in 0..k * a {
        let phi = phi_series(ap, beta, j, order)?;
        let comps = varpi_apply(&phi, k)?;
        let lq = lambda_quotient(a, b, k, beta, j)?;
        let RestrictionIndex { r, p, .. } = lq.index;
        let nonzero: Vec<i64> = (0..k).filter(|&l| comps[l as usize].terms().any(|(_, c)| !c.is_zero())).collect();
        // ψ truncated at the largest m present in the component.
        let comp = &comps[r as usize];
        let m_max = comp.terms().map(|(o, _)| (o[1] - p).div_euclid(a)).max().unwrap_or(0).max(0);
        let psi = psi_series(a, b, &reduced_beta(k, beta, r), p, m_max)?.scale(&lq.value);
        let difference = compare_shifted(comp, &psi, lq.index.shift(a, b));
        let ratio_spread = lq.raw_ratios.iter().map(|x| (x.clone() - lq.value.clone()).magnitude()).fold(0.0, f64::max);
        if !lq.zero_lambda {
            reached.insert((r, p));
        }
        rows.push(VarpiRow { j, r, p, nonzero, zero_lambda: lq.zero_lambda, difference, ratio_spread });
    }
    let missed = (0..k).flat_map(|r| (0..a).map(move |p| (r, p))).filter(|rp| !reached.contains(rp)).collect();
    Ok(VarpiReport { matrix: ap.entries().to_vec(), order, rows, missed })
}

/// Largest coefficient difference between a ϖ component (base `h`) and a
/// ψ-series (base `h - n`), matching x_1 offsets shifted by `n`.
fn compare_shifted<S: Scalar>(comp: &FractionalSeries<S>, psi: &FractionalSeries<S>, n: i64) -> f64 {
    let mut worst = 0.0f64;
    for (o, c) in psi.terms() {
        let key = [o[0] - n, o[1]];
        let other = comp.get(&key).cloned().unwrap_or_else(S::zero);
        worst = worst.max((other - c.clone()).magnitude());
    }
    for (o, c) in comp.terms() {
        if psi.get(&[o[0] + n, o[1]]).is_none() {
            worst = worst.max(c.magnitude());
        }
    }
    worst
}

/// `λ_{ℓ,ν} = ω^{νℓ}/k`, the inverse of `(ω^{-νℓ})`; indexed `[ℓ][ν]`.
pub fn dft_weights(k: i64) -> Vec<Vec<Complex64>> {
    (0..k)
        .map(|l| (0..k).map(|nu| Complex64::from_polar(1.0 / k as f64, TAU * (nu * l) as f64 / k as f64)).collect())
        .collect()
}

/// `γ̃_r = Σ_ν λ_{r,ν} ω^{-νβ} γ^{(ν)}` with `γ^{(ν)}` the ν-th k-th root of γ.
pub fn build_tilde_cycle(gamma: &Cycle, k: i64, beta: Complex64, r: i64) -> Result<Cycle> {
    if r < 0 || r >= k {
        return Err(Error::IndexOutOfRange { index: r, bound: k });
    }
    let w = dft_weights(k);
    let mut out = Cycle { terms: Vec::new() };
    for nu in 0..k {
        let phase = (Complex64::new(0.0, -TAU * nu as f64 / k as f64) * beta).exp();
        out = out.plus(&gamma.root(k, nu)?.scale_weights(w[r as usize][nu as usize] * phase));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TildeCheck {
    pub ell: i64,
    pub r: i64,
    /// `∂^ℓ/∂x_0^ℓ` of the γ̃ integral at `x_0 = 0`.
    pub lhs: Complex64,
    /// `δ_{ℓr} · (1/k) I_γ((a, b), (β-r)/k)`.
    pub rhs: Complex64,
    /// `|lhs - rhs|` over `|(1/k) I_γ((a, b), (β-ℓ)/k)|`.
    pub relative: f64,
}

/// Integrates `t^ℓ · t^{-β-1} e^{x_1 t^{ka} + x_2 t^{kb}}` over γ̃_r, which is
/// the ℓ-th x_0-derivative at 0, and compares with the (a, b) integral.
#[allow(clippy::too_many_arguments)]
pub fn tilde_cycle_check(
    ap: &OneRowMatrix,
    beta: Complex64,
    r: i64,
    ell: i64,
    gamma: &Cycle,
    x1: SectorPoint,
    x2: SectorPoint,
    tol: f64,
) -> Result<TildeCheck> {
    let (k, a, b) = split_matrix(ap)?;
    let tilde = build_tilde_cycle(gamma, k, beta, r)?;
    let lhs = Integrand::new(beta * -1.0 - 1.0 + ell as f64, vec![(k * a, x1), (k * b, x2)]).integrate(&tilde, tol)?.value;
    let ab = OneRowMatrix::new(vec![a, b])?;
    let reduced = |l: i64| (beta - l as f64) / k as f64;
    let own = contour::integrate(&ab, reduced(ell), &[x1, x2], gamma, tol)?.value / k as f64;
    let rhs = if ell == r { own } else { Complex64::new(0.0, 0.0) };
    let relative = (lhs - rhs).norm() / own.norm();
    Ok(TildeCheck { ell, r, lhs, rhs, relative })
}
