//! Asymptotic-expansion coefficients `c_k` of the integrals along C_p, by
//! one-dimensional quadrature and by the closed Gamma-function formulas, plus
//! the diagnostics built on them (decomposition matrix, μ recovery, remainder
//! order, Gevrey order).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{Cycle, Integrand, PathSegment};
use crate::error::{Error, Result};
use crate::gamma_series::psi_coefficient;
use crate::lattice::OneRowMatrix;
use crate::linalg;
use crate::par::{self, Exec};
use crate::scalar::{as_integer_c64, Scalar};
use crate::sector::SectorPoint;
use crate::special::{factorial, ln_factorial, ln_gamma};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn ceil_div(n: i64, d: i64) -> i64 {
    -((-n).div_euclid(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorInfo {
    pub p: i64,
    pub ell: i64,
    pub alpha: f64,
}

/// `ℓ = ⌈ap/b - 1/2⌉` and `α = 2π(ℓ - ap/b)`; fails when `ω_p^a = -1`.
pub fn sector_info(p: i64, a: i64, b: i64) -> Result<SectorInfo> {
    if p < 1 || p > b {
        return Err(Error::BadP { p, b });
    }
    let num = 2 * a * p - b;
    let den = 2 * b;
    if num % den == 0 {
        return Err(Error::HalfTurn { p, a, b });
    }
    let ell = ceil_div(num, den);
    let alpha = 2.0 * PI * (ell as f64 - (a * p) as f64 / b as f64);
    Ok(SectorInfo { p, ell, alpha })
}

/// Smallest `k >= 0` with `Re(bk - β) > 0`.
pub fn k_min(b: i64, beta: Complex64) -> i64 {
    if beta.re < 0.0 {
        0
    } else {
        (beta.re / b as f64).floor() as i64 + 1
    }
}

fn check_sector(x1: SectorPoint) -> Result<()> {
    if x1.arg > PI / 2.0 && x1.arg < 1.5 * PI {
        Ok(())
    } else {
        Err(Error::WrongSector(x1.arg))
    }
}

fn ik1_unchecked(a: i64, b: i64, beta: Complex64, k: i64, x1: SectorPoint) -> Result<Complex64> {
    let e = (beta - (k * b) as f64) / a as f64;
    let lg = ln_gamma(-e)?;
    let log = -(a as f64).ln() - ln_factorial(k as u64) - I * PI * e + e * x1.ln() + lg;
    Ok(log.exp())
}

/// `I_{k,1} = e^{-iπ(β-kb)/a} x_1^{(β-kb)/a} Γ((bk-β)/a) / (a·k!)`, the
/// integral over ℝ_{≥0} of `t^{-β-1+bk} e^{x_1 t^a} / k!`.
pub fn ik1_closed(a: i64, b: i64, beta: Complex64, k: i64, x1: SectorPoint) -> Result<Complex64> {
    check_sector(x1)?;
    ik1_unchecked(a, b, beta, k, x1)
}

/// `I_{k,2} = I_{k,1} · e^{-2iπℓ(β-kb)/a}`.
pub fn ik2_closed(a: i64, b: i64, beta: Complex64, k: i64, p: i64, x1: SectorPoint) -> Result<Complex64> {
    let info = sector_info(p, a, b)?;
    let e = (beta - (k * b) as f64) / a as f64;
    Ok(ik1_closed(a, b, beta, k, x1)? * (-2.0 * PI * I * info.ell as f64 * e).exp())
}

/// `q_j^ℓ - 1` with `q_j = e^{2iπ(jb-β)/a}`; exactly zero when
/// `ℓ(jb-β)/a` is an integer, which can happen for non-integer β too.
pub fn q_power_minus_one(a: i64, b: i64, beta: Complex64, j: i64, ell: i64) -> Complex64 {
    let turns = ell as f64 * (Complex64::new((j * b) as f64, 0.0) - beta) / a as f64;
    if as_integer_c64(turns).is_some() {
        return Complex64::new(0.0, 0.0);
    }
    let theta = 2.0 * PI * turns;
    // e^{iθ} - 1 = 2i sin(θ/2) e^{iθ/2}, without cancellation for small θ.
    2.0 * I * (theta / 2.0).sin() * (I * theta / 2.0).exp()
}

/// `c_{am+j} = (q_j^ℓ - 1) · I_{am+j,1}`. The prefactor is tested first, so
/// the formula stays finite where the sine form has a pole.
pub fn c_closed(a: i64, b: i64, beta: Complex64, p: i64, k: i64, x1: SectorPoint) -> Result<Complex64> {
    let info = sector_info(p, a, b)?;
    check_sector(x1)?;
    let km = k_min(b, beta);
    if k < km {
        return Err(Error::TooSmallK { k, k_min: km });
    }
    let pre = q_power_minus_one(a, b, beta, k.rem_euclid(a), info.ell);
    if pre.is_zero() {
        return Ok(pre);
    }
    Ok(pre * ik1_unchecked(a, b, beta, k, x1)?)
}

/// `λ_j = π e^{-iπ(β-jb)/a} / (a · j! · sin(π(bj-β)/a) · Γ((β-bj)/a + 1))`.
pub fn lambda_j(a: i64, b: i64, beta: Complex64, j: i64) -> Result<Complex64> {
    let t = (beta - (b * j) as f64) / a as f64;
    if as_integer_c64(t).is_some() {
        return Err(Error::SinPole);
    }
    let s = (-PI * t).sin();
    let g = ln_gamma(t + 1.0)?.exp();
    Ok(PI * (-I * PI * t).exp() / (a as f64 * factorial(j as u64) * s * g))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionMatrix {
    pub a: i64,
    pub b: i64,
    pub beta: Complex64,
    pub ells: Vec<i64>,
    /// `matrix[j][c] = q_j^{ells[c]} - 1`.
    pub matrix: Vec<Vec<Complex64>>,
    pub det_direct: Complex64,
    pub det_formula: Complex64,
    pub rank: usize,
    /// The index with `q_{j0} = 1` when β is an integer.
    pub j0: Option<i64>,
}

impl DecompositionMatrix {
    pub fn relative_difference(&self) -> f64 {
        let scale = self.det_formula.norm().max(self.det_direct.norm());
        if scale == 0.0 {
            0.0
        } else {
            (self.det_direct - self.det_formula).norm() / scale
        }
    }
}

fn permutation_sign(v: &[i64]) -> f64 {
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// The matrix `(q_j^ℓ - 1)` for the given `ℓ` values (a permutation of
/// 1..=a) with its determinant computed directly and by the product
/// `∏(q_i - 1) ∏_{i<j}(q_j - q_i)`.
pub fn decomposition_matrix(a: i64, b: i64, beta: Complex64, ells: &[i64]) -> Result<DecompositionMatrix> {
    let mut sorted = ells.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=a).collect::<Vec<_>>() {
        return Err(Error::Invalid(format!("ells must be a permutation of 1..={a}")));
    }
    let matrix: Vec<Vec<Complex64>> =
        (0..a).map(|j| ells.iter().map(|&l| q_power_minus_one(a, b, beta, j, l)).collect()).collect();
    let det_direct = linalg::determinant(&matrix);
    let q: Vec<Complex64> = (0..a).map(|j| q_power_minus_one(a, b, beta, j, 1) + 1.0).collect();
    let mut det_formula = Complex64::new(permutation_sign(ells), 0.0);
    for j in 0..a as usize {
        det_formula *= q_power_minus_one(a, b, beta, j as i64, 1);
        for i in 0..j {
            det_formula *= q[j] - q[i];
        }
    }
    let rank = linalg::rank(&matrix, 1e-10);
    let j0 = as_integer_c64(beta).and_then(|bi| (0..a).find(|&j| (j * b - bi).rem_euclid(a) == 0));
    Ok(DecompositionMatrix { a, b, beta, ells: ells.to_vec(), matrix, det_direct, det_formula, rank, j0 })
}

/// Rotation θ for which `e^{iθ} C_p` decays for `x_1 t^a`:
/// `(π + α/2 - arg x_1)/a`, following the carried argument of `x_1`.
pub fn canonical_rotation(a: i64, b: i64, p: i64, x1: SectorPoint) -> Result<f64> {
    let info = sector_info(p, a, b)?;
    Ok((PI + info.alpha / 2.0 - x1.arg) / a as f64)
}

/// C_p deformed so that both rays follow steepest descent of `x_1 t^a`: in
/// along `arg t = (π - arg x_1)/a`, around the circle through `2πℓ/a`, out
/// again. It is homotopic to `e^{iθ}C_p` for the canonical θ, and avoids the
/// oscillation that costs relative accuracy at large `k`.
pub fn cp_for_head(a: i64, b: i64, p: i64, x1: SectorPoint, eps: f64) -> Result<Cycle> {
    let info = sector_info(p, a, b)?;
    let t1 = (PI - x1.arg) / a as f64;
    let t2 = t1 + 2.0 * PI * info.ell as f64 / a as f64;
    Ok(Cycle::single(vec![
        PathSegment::RayIn { eps, angle: t1 },
        PathSegment::Arc { radius: eps, from: t1, to: t2 },
        PathSegment::RayOut { eps, angle: t2 },
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Quadrature,
    ClosedForm,
    RegularizedClosed,
    RegularizedQuadrature,
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub k: i64,
    pub re: f64,
    pub im: f64,
    pub method: Method,
    pub err: f64,
}

impl CoefficientEntry {
    pub fn new(k: i64, value: Complex64, method: Method, err: f64) -> Self {
        CoefficientEntry { k, re: value.re, im: value.im, method, err }
    }
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableContext {
    #[serde(rename = "A")]
    pub matrix: Vec<i64>,
    pub beta: [f64; 2],
    pub p: Option<i64>,
    pub cycle: Option<Cycle>,
    pub x_head: Vec<SectorPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub k: i64,
    pub relative: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub gevrey_s: Option<f64>,
    pub remainder_slope: Option<f64>,
    pub max_discrepancy: Option<f64>,
}

/// Coefficients `c_k` with provenance, sorted by `k` then method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub v: String,
    pub context: TableContext,
    pub entries: Vec<CoefficientEntry>,
    pub discrepancies: Vec<Discrepancy>,
    pub diagnostics: Diagnostics,
}

impl CoefficientTable {
    pub fn new(context: TableContext, mut entries: Vec<CoefficientEntry>) -> Self {
        entries.sort_by(|x, y| x.k.cmp(&y.k).then(x.method.cmp(&y.method)));
        let mut t = CoefficientTable { v: "v1".into(), context, entries, discrepancies: Vec::new(), diagnostics: Diagnostics::default() };
        t.refresh_discrepancies();
        t
    }

    pub fn get(&self, k: i64, method: Method) -> Option<Complex64> {
        self.entries.iter().find(|e| e.k == k && e.method == method).map(CoefficientEntry::value)
    }

    pub fn values(&self, method: Method) -> Vec<(i64, Complex64)> {
        self.entries.iter().filter(|e| e.method == method).map(|e| (e.k, e.value())).collect()
    }

    pub fn merge(mut self, other: CoefficientTable) -> Self {
        let entries = std::mem::take(&mut self.entries).into_iter().chain(other.entries).collect();
        let mut t = CoefficientTable::new(self.context, entries);
        t.diagnostics = self.diagnostics;
        t
    }

    /// For every `k` with both a quadrature and a closed value:
    /// `|quad - closed| / |closed|`. A closed value of exactly 0 is compared
    /// against the largest closed value in the table instead.
    fn refresh_discrepancies(&mut self) {
        let scale = self
            .entries
            .iter()
            .filter(|e| matches!(e.method, Method::ClosedForm | Method::RegularizedClosed))
            .map(|e| e.value().norm())
            .fold(0.0, f64::max);
        let mut out = Vec::new();
        for e in self.entries.iter().filter(|e| matches!(e.method, Method::ClosedForm | Method::RegularizedClosed)) {
            let q = self
                .entries
                .iter()
                .find(|f| f.k == e.k && matches!(f.method, Method::Quadrature | Method::RegularizedQuadrature));
            if let Some(q) = q {
                let c = e.value();
                let d = (q.value() - c).norm();
                let relative = if c.norm() > 0.0 { d / c.norm() } else { d / scale.max(f64::MIN_POSITIVE) };
                out.push(Discrepancy { k: e.k, relative });
            }
        }
        self.diagnostics.max_discrepancy = out.iter().map(|d| d.relative).reduce(f64::max);
        self.discrepancies = out;
    }
}

fn context(a: &OneRowMatrix, beta: Complex64, p: Option<i64>, cycle: Option<&Cycle>, x_head: &[SectorPoint]) -> TableContext {
    TableContext { matrix: a.entries().to_vec(), beta: [beta.re, beta.im], p, cycle: cycle.cloned(), x_head: x_head.to_vec() }
}

/// `c_k = (1/k!) ∫_γ t^{-β-1+a_n k} exp(Σ_{j<n} x_j t^{a_j}) dt`, k = 0..=N.
pub fn coefficients_by_quadrature(
    a: &OneRowMatrix,
    beta: Complex64,
    x_head: &[SectorPoint],
    cycle: &Cycle,
    n: i64,
    tol: f64,
    exec: Exec,
) -> Result<CoefficientTable> {
    if x_head.len() + 1 != a.n() {
        return Err(Error::Invalid(format!("expected {} head values, got {}", a.n() - 1, x_head.len())));
    }
    let poly: Vec<(i64, SectorPoint)> = a.entries().iter().copied().zip(x_head.iter().copied()).collect();
    let an = a.last();
    let rows = par::map_range(exec, 0..n + 1, |k| -> Result<CoefficientEntry> {
        let integrand = Integrand::new(-beta - 1.0 + (an * k) as f64, poly.clone());
        let r = integrand.integrate(cycle, tol)?;
        let f = factorial(k as u64);
        Ok(CoefficientEntry::new(k, r.value / f, Method::Quadrature, r.error / f))
    });
    let entries = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTable::new(context(a, beta, None, Some(cycle), x_head), entries))
}

/// Quadrature table on the steepest-descent form of C_p for A = (a, b).
pub fn coefficients_on_cp(
    a: i64,
    b: i64,
    beta: Complex64,
    p: i64,
    x1: SectorPoint,
    n: i64,
    tol: f64,
    exec: Exec,
) -> Result<CoefficientTable> {
    let m = OneRowMatrix::new(vec![a, b])?;
    let cycle = cp_for_head(a, b, p, x1, 1.0)?;
    let mut t = coefficients_by_quadrature(&m, beta, &[x1], &cycle, n, tol, exec)?;
    t.context.p = Some(p);
    Ok(t)
}

/// Closed-form entries for `k` in `ks` (values below k_min are skipped).
pub fn closed_form_table(
    a: i64,
    b: i64,
    beta: Complex64,
    p: i64,
    x1: SectorPoint,
    ks: std::ops::Range<i64>,
    exec: Exec,
) -> Result<CoefficientTable> {
    let m = OneRowMatrix::new(vec![a, b])?;
    let start = ks.start.max(k_min(b, beta));
    let rows = par::map_range(exec, start..ks.end.max(start), |k| {
        c_closed(a, b, beta, p, k, x1).map(|v| CoefficientEntry::new(k, v, Method::ClosedForm, 0.0))
    });
    let entries = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTable::new(context(&m, beta, Some(p), None, &[x1]), entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuRecovery {
    pub mu: Vec<Complex64>,
    /// `λ_j · prefactor_j`; 0 where the prefactor vanishes and `None` where
    /// λ_j has its sine pole.
    pub expected: Vec<Option<Complex64>>,
    /// Per-j ratios `c_{am+j} / (ψ^{(j)}_m x_1^{…})` used for the average.
    pub ratios: Vec<Vec<Complex64>>,
    /// Largest deviation of a ratio from its mean, relative to `scale`.
    pub spread: Vec<f64>,
    /// `max_j |μ_j|`, the reference for vanishing coefficients.
    pub scale: f64,
    pub max_relative_error: f64,
}

pub const RATIO_TOLERANCE: f64 = 1e-6;

/// Coefficients μ_j of the quadrature expansion on C_p in the basis ψ^{(j)},
/// obtained by dividing each `c_{am+j}` by the matching ψ-term.
pub fn mu_recovery(a: i64, b: i64, beta: Complex64, p: i64, x1: SectorPoint, n: i64, tol: f64) -> Result<MuRecovery> {
    let info = sector_info(p, a, b)?;
    let table = coefficients_on_cp(a, b, beta, p, x1, n, tol, Exec::default())?;
    let pre = |j| q_power_minus_one(a, b, beta, j, info.ell);
    mu_from_coefficients(a, b, beta, x1, &table.values(Method::Quadrature), pre)
}

/// Divides `c_{am+j}` by `ψ^{(j)}_m x_1^{(β-jb)/a - bm}` and averages over
/// `m`; `prefactor(j)` is the factor expected in front of `λ_j`.
pub fn mu_from_coefficients(
    a: i64,
    b: i64,
    beta: Complex64,
    x1: SectorPoint,
    coeffs: &[(i64, Complex64)],
    prefactor: impl Fn(i64) -> Complex64,
) -> Result<MuRecovery> {
    let mut ratios = vec![Vec::new(); a as usize];
    for &(k, c) in coeffs {
        let (m, j) = (k.div_euclid(a), k.rem_euclid(a));
        let psi = psi_coefficient(a, b, beta, j, m);
        if psi.norm() == 0.0 {
            continue;
        }
        let e = (beta - (j * b) as f64) / a as f64 - (b * m) as f64;
        ratios[j as usize].push(c / (psi * x1.pow(e)?));
    }
    let mu: Vec<Complex64> =
        ratios.iter().map(|r| r.iter().sum::<Complex64>() / r.len().max(1) as f64).collect();
    let scale = mu.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let spread: Vec<f64> = ratios
        .iter()
        .zip(&mu)
        .map(|(r, m)| r.iter().map(|z| (z - m).norm()).fold(0.0, f64::max) / m.norm().max(scale).max(f64::MIN_POSITIVE))
        .collect();
    let worst = spread.iter().copied().fold(0.0, f64::max);
    if worst > RATIO_TOLERANCE {
        return Err(Error::InconsistentRatios { spread: worst });
    }
    let mut expected = Vec::with_capacity(a as usize);
    for j in 0..a {
        let pre = prefactor(j);
        expected.push(match lambda_j(a, b, beta, j) {
            _ if pre.is_zero() => Some(pre),
            Ok(l) => Some(l * pre),
            Err(Error::SinPole) => None,
            Err(e) => return Err(e),
        });
    }
    let max_relative_error = mu
        .iter()
        .zip(&expected)
        .filter_map(|(m, e)| e.map(|e| (m - e).norm() / e.norm().max(scale)))
        .fold(0.0, f64::max);
    Ok(MuRecovery { mu, expected, ratios, spread, scale, max_relative_error })
}

/// `r_N(z) = e^z - Σ_{k<=N} z^k/k!`, summed as a tail series for moderate
/// `|z|` so small remainders keep full relative accuracy.
pub fn exp_remainder(z: Complex64, n: i64) -> Complex64 {
    if z.norm() <= n as f64 + 2.0 {
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..=n + 1 {
            term *= z / k as f64;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut k = n + 1;
        while k < n + 400 {
            sum += term;
            k += 1;
            term *= z / k as f64;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let mut poly = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..=n {
            poly += term;
            term *= z / (k + 1) as f64;
        }
        z.exp() - poly
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderPoint {
    pub modulus: f64,
    pub remainder: Complex64,
    pub error: f64,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<RemainderPoint>,
}

/// Fits `log|I - S_N|` against `log|x_n|`. The remainder is integrated
/// directly as `∫ t^{-β-1} e^{head(t)} r_N(x_n t^{a_n}) dt`, which equals
/// `I - S_N` without the cancellation of subtracting two close numbers.
#[allow(clippy::too_many_arguments)]
pub fn remainder_slope(
    a: &OneRowMatrix,
    beta: Complex64,
    x_head: &[SectorPoint],
    cycle: &Cycle,
    n: i64,
    xn_moduli: &[f64],
    xn_arg: f64,
    tol: f64,
) -> Result<RemainderFit> {
    if x_head.len() + 1 != a.n() {
        return Err(Error::Invalid("head dimension mismatch".into()));
    }
    let poly: Vec<(i64, SectorPoint)> = a.entries().iter().copied().zip(x_head.iter().copied()).collect();
    let an = a.last();
    let mut points = Vec::with_capacity(xn_moduli.len());
    for &m in xn_moduli {
        let xn = SectorPoint::new(m, xn_arg)?;
        let mut full = poly.clone();
        full.push((an, xn));
        let check = Integrand::new(-beta - 1.0, full);
        for angle in cycle.unbounded_angles() {
            check.check_decay(angle)?;
        }
        let xv = xn.value();
        let factor = move |t: Complex64| exp_remainder(xv * t.powi(an as i32), n);
        let integrand = Integrand::new(-beta - 1.0, poly.clone()).with_factor(&factor);
        let r = integrand.integrate(cycle, tol)?;
        points.push(RemainderPoint { modulus: m, remainder: r.value, error: r.error, used: true });
    }
    // Drop up to two of the smallest-|x_n| points whose quadrature error is
    // not small against the remainder itself.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].modulus.total_cmp(&points[j].modulus));
    for &i in order.iter().take(2) {
        if points[i].error > 0.1 * points[i].remainder.norm() {
            points[i].used = false;
        }
    }
    let used: Vec<&RemainderPoint> = points.iter().filter(|p| p.used && p.remainder.norm() > 0.0).collect();
    let xs: Vec<Vec<f64>> = used.iter().map(|p| vec![p.modulus.ln(), 1.0]).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.remainder.norm().ln()).collect();
    let c = linalg::least_squares(&xs, &ys)?;
    Ok(RemainderFit { slope: c[0], intercept: c[1], points })
}

/// Gevrey index from the growth of the closed-form coefficients: regress
/// `log|c_k| + log k!` on `(log k!, k, 1)` over `10 <= k <= 60`. A convergent
/// series (fitted value below 1) is reported as order 1.
pub fn gevrey_order_estimate(table: &CoefficientTable) -> Result<f64> {
    let closed: Vec<(i64, Complex64)> = table
        .entries
        .iter()
        .filter(|e| matches!(e.method, Method::ClosedForm | Method::RegularizedClosed))
        .map(|e| (e.k, e.value()))
        .filter(|(_, v)| v.norm() > 0.0)
        .collect();
    if closed.len() < 40 {
        return Err(Error::Invalid(format!("need at least 40 nonzero closed-form coefficients, have {}", closed.len())));
    }
    let window: Vec<&(i64, Complex64)> = closed.iter().filter(|(k, _)| (10..=60).contains(k)).collect();
    let xs: Vec<Vec<f64>> = window.iter().map(|(k, _)| vec![ln_factorial(*k as u64), *k as f64, 1.0]).collect();
    let ys: Vec<f64> = window.iter().map(|(k, v)| v.norm().ln() + ln_factorial(*k as u64)).collect();
    let c = linalg::least_squares(&xs, &ys)?;
    Ok(c[0].max(1.0))
}

/// Compares `(qa+j)! c_{qa+j}` with `j! ∂^{qb} c_j / ∂x_1^{qb}`, both from the
/// closed forms; returns the relative difference.
pub fn derivative_relation_check(a: i64, b: i64, beta: Complex64, j: i64, q: i64, x1: SectorPoint) -> Result<f64> {
    if j < 0 || j >= a || q < 0 {
        return Err(Error::IndexOutOfRange { index: j, bound: a });
    }
    let k = q * a + j;
    let lhs = ik1_unchecked(a, b, beta, k, x1)? * factorial(k as u64);
    let e = (beta - (j * b) as f64) / a as f64;
    let rhs = ik1_unchecked(a, b, beta, j, x1)? * factorial(j as u64) * e.pochhammer((q * b) as u64)
        / x1.pow(Complex64::new((q * b) as f64, 0.0))?;
    Ok((lhs - rhs).norm() / lhs.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn minus_one() -> SectorPoint {
        SectorPoint::new(1.0, PI).unwrap()
    }

    #[test]
    fn sector_examples() {
        let s = sector_info(1, 2, 3).unwrap();
        assert_eq!(s.ell, 1);
        assert!((s.alpha - 2.0 * PI / 3.0).abs() < 1e-15);
        let s = sector_info(3, 2, 3).unwrap();
        assert_eq!((s.ell, s.alpha), (2, 0.0));
        assert!(matches!(sector_info(1, 1, 2), Err(Error::HalfTurn { .. })));
    }

    #[test]
    fn k_min_examples() {
        assert_eq!(k_min(3, c(0.3)), 1);
        assert_eq!(k_min(3, c(3.0)), 2);
        assert_eq!(k_min(3, Complex64::new(-0.7, 0.2)), 0);
    }

    #[test]
    fn closed_form_guards() {
        assert!(matches!(ik1_closed(2, 3, c(6.0), 2, minus_one()), Err(Error::GammaPole(_))));
        assert!(matches!(ik1_closed(2, 3, c(0.3), 2, SectorPoint::new(1.0, 0.0).unwrap()), Err(Error::WrongSector(_))));
        assert!(matches!(c_closed(2, 3, c(0.3), 1, 0, minus_one()), Err(Error::TooSmallK { .. })));
        assert!(matches!(lambda_j(2, 3, c(3.0), 1), Err(Error::SinPole)));
    }

    #[test]
    fn integer_beta_kills_residue_class() {
        // β = 1 = 3·1 - 2·1: q_1 = 1, so c_{2m+1} = 0 on every C_p.
        for m in 1..6 {
            assert_eq!(c_closed(2, 3, c(1.0), 1, 2 * m + 1, minus_one()).unwrap(), c(0.0));
        }
    }

    #[test]
    fn coefficient_factorization() {
        // c_{am+j} = λ_j (q_j^ℓ - 1) ψ_m x_1^{h - bm}.
        let (a, b, beta, j, m) = (2, 3, c(0.3), 0, 2);
        let x1 = minus_one();
        let lhs = c_closed(a, b, beta, 1, a * m + j, x1).unwrap();
        let e = (beta - (j * b) as f64) / a as f64 - (b * m) as f64;
        let rhs = lambda_j(a, b, beta, j).unwrap()
            * q_power_minus_one(a, b, beta, j, 1)
            * psi_coefficient(a, b, beta, j, m)
            * x1.pow(e).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
    }

    #[test]
    fn decomposition_example() {
        let d = decomposition_matrix(2, 3, c(0.5), &[1, 2]).unwrap();
        assert!((d.det_direct - Complex64::new(0.0, 4.0)).norm() < 1e-14);
        assert!((d.det_formula - Complex64::new(0.0, 4.0)).norm() < 1e-14);
        let swapped = decomposition_matrix(2, 3, c(0.5), &[2, 1]).unwrap();
        assert!(swapped.relative_difference() < 1e-14);
        let one = decomposition_matrix(1, 2, c(0.3), &[1]).unwrap();
        assert!((one.det_direct - one.matrix[0][0]).norm() < 1e-15);
    }

    #[test]
    fn exponential_remainder_branches_agree() {
        for &z in &[Complex64::new(-3.0, 1.0), Complex64::new(0.01, 0.0), Complex64::new(-7.5, 0.0)] {
            for n in [0, 2, 5] {
                let direct = z.exp() - (0..=n).map(|k| z.powi(k as i32) / factorial(k as u64)).sum::<Complex64>();
                let r = exp_remainder(z, n);
                assert!((r - direct).norm() <= 1e-12 * direct.norm().max(1e-300) + 1e-15, "z={z} n={n}");
            }
        }
    }

    #[test]
    fn derivative_relation_trivial_and_generic() {
        assert_eq!(derivative_relation_check(2, 3, c(0.3), 0, 0, minus_one()).unwrap(), 0.0);
        assert!(derivative_relation_check(2, 3, c(0.3), 0, 2, minus_one()).unwrap() < 1e-10);
        assert!(derivative_relation_check(3, 5, c(0.7), 1, 1, minus_one()).unwrap() < 1e-10);
    }
}
