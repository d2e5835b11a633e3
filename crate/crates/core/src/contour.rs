//! Integration cycles built from rays, arcs and half-lines, and quadrature of
//! `t^c · exp(Σ x_j t^{a_j}) · g(t)` along them with the branch of `log t`
//! carried by each segment.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::OneRowMatrix;
use crate::quadrature::{self, QuadOptions, QuadResult};
use crate::scalar::as_integer_c64;
use crate::sector::SectorPoint;
use crate::special::factorial;

const TAU: f64 = 2.0 * PI;

/// One piece of a path. Along rays and half-lines the argument of `t` is the
/// constant `angle`; along an arc it runs continuously from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PathSegment {
    /// From infinity in to `eps·e^{i angle}`.
    RayIn { eps: f64, angle: f64 },
    /// From `eps·e^{i angle}` out to infinity.
    RayOut { eps: f64, angle: f64 },
    Arc { radius: f64, from: f64, to: f64 },
    /// From 0 out to infinity; only integrable integrands (or regularized
    /// ones, see the expansion module) may use it.
    HalfLineFromZero { angle: f64 },
}

impl PathSegment {
    pub fn is_unbounded(&self) -> bool {
        !matches!(self, PathSegment::Arc { .. })
    }

    /// Direction angle of an unbounded segment.
    pub fn ray_angle(&self) -> Option<f64> {
        match *self {
            PathSegment::RayIn { angle, .. } | PathSegment::RayOut { angle, .. } | PathSegment::HalfLineFromZero { angle } => Some(angle),
            PathSegment::Arc { .. } => None,
        }
    }

    fn map(&self, radius: impl Fn(f64) -> f64, angle: impl Fn(f64) -> f64) -> PathSegment {
        match *self {
            PathSegment::RayIn { eps, angle: a } => PathSegment::RayIn { eps: radius(eps), angle: angle(a) },
            PathSegment::RayOut { eps, angle: a } => PathSegment::RayOut { eps: radius(eps), angle: angle(a) },
            PathSegment::Arc { radius: r, from, to } => PathSegment::Arc { radius: radius(r), from: angle(from), to: angle(to) },
            PathSegment::HalfLineFromZero { angle: a } => PathSegment::HalfLineFromZero { angle: angle(a) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleTerm {
    pub weight: Complex64,
    pub path: Vec<PathSegment>,
}

/// A finite complex combination of paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub terms: Vec<CycleTerm>,
}

impl Cycle {
    pub fn single(path: Vec<PathSegment>) -> Self {
        Cycle { terms: vec![CycleTerm { weight: Complex64::new(1.0, 0.0), path }] }
    }

    /// The cycle C_p: in along ℝ_{≥ε}, around the circle of radius ε through
    /// the angle 2πp/b, out along the ray of argument 2πp/b.
    pub fn cp(p: i64, b: i64, eps: f64) -> Result<Self> {
        if b < 1 || p < 1 || p > b {
            return Err(Error::BadP { p, b });
        }
        if !(eps > 0.0) {
            return Err(Error::Invalid("eps must be positive".into()));
        }
        let end = TAU * p as f64 / b as f64;
        Ok(Cycle::single(vec![
            PathSegment::RayIn { eps, angle: 0.0 },
            PathSegment::Arc { radius: eps, from: 0.0, to: end },
            PathSegment::RayOut { eps, angle: end },
        ]))
    }

    /// Positively oriented circle of radius `eps`.
    pub fn circle(eps: f64) -> Self {
        Cycle::single(vec![PathSegment::Arc { radius: eps, from: 0.0, to: TAU }])
    }

    pub fn half_line(angle: f64) -> Self {
        Cycle::single(vec![PathSegment::HalfLineFromZero { angle }])
    }

    /// `e^{iθ}·c`: every angle and carried argument shifted by θ.
    pub fn rotate(&self, theta: f64) -> Self {
        self.map_segments(|s| s.map(|r| r, |a| a + theta))
    }

    /// Image of the cycle under `t ↦ ω^{-ν} t^{1/k}`, `ω = e^{2πi/k}`, taking
    /// the k-th root along the carried argument.
    pub fn root(&self, k: i64, nu: i64) -> Result<Self> {
        if k < 1 || nu < 0 || nu >= k {
            return Err(Error::Invalid(format!("root_cycle needs k >= 1 and 0 <= nu < k, got k={k}, nu={nu}")));
        }
        let kf = k as f64;
        let shift = TAU * nu as f64 / kf;
        Ok(self.map_segments(|s| s.map(|r| r.powf(1.0 / kf), |a| a / kf - shift)))
    }

    pub fn scale_weights(&self, w: Complex64) -> Self {
        Cycle {
            terms: self.terms.iter().map(|t| CycleTerm { weight: t.weight * w, path: t.path.clone() }).collect(),
        }
    }

    pub fn plus(&self, other: &Cycle) -> Self {
        Cycle { terms: self.terms.iter().chain(&other.terms).cloned().collect() }
    }

    fn map_segments(&self, f: impl Fn(&PathSegment) -> PathSegment) -> Self {
        Cycle {
            terms: self.terms.iter().map(|t| CycleTerm { weight: t.weight, path: t.path.iter().map(&f).collect() }).collect(),
        }
    }

    pub fn unbounded_angles(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|t| t.path.iter().filter_map(PathSegment::ray_angle)).collect()
    }

    /// When the integrand is single-valued, an incoming ray and an outgoing
    /// ray of the same path that coincide in ℂ cancel; removes such pairs
    /// (this turns C_b into a circle).
    pub fn cancel_coincident_rays(&self) -> Self {
        let mut out = self.clone();
        for term in &mut out.terms {
            loop {
                let mut hit = None;
                'search: for (i, s) in term.path.iter().enumerate() {
                    if let PathSegment::RayIn { eps: e1, angle: a1 } = *s {
                        for (j, u) in term.path.iter().enumerate() {
                            if let PathSegment::RayOut { eps: e2, angle: a2 } = *u {
                                let turns = (a2 - a1) / TAU;
                                if e1 == e2 && (turns - turns.round()).abs() < 1e-12 {
                                    hit = Some((i, j));
                                    break 'search;
                                }
                            }
                        }
                    }
                }
                match hit {
                    Some((i, j)) => {
                        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                        term.path.remove(hi);
                        term.path.remove(lo);
                    }
                    None => break,
                }
            }
        }
        out
    }
}

pub fn cycle_cp(p: i64, b: i64, eps: f64) -> Result<Cycle> {
    Cycle::cp(p, b, eps)
}

pub fn rotate_cycle(c: &Cycle, theta: f64) -> Cycle {
    c.rotate(theta)
}

pub fn root_cycle(c: &Cycle, k: i64, nu: i64) -> Result<Cycle> {
    c.root(k, nu)
}

/// Optional extra factor multiplying the exponential, a function of `t`.
pub type Factor<'a> = &'a (dyn Fn(Complex64) -> Complex64 + Sync);

/// `t^power · exp(Σ x_j t^{a_j}) · factor(t)`.
#[derive(Clone)]
pub struct Integrand<'a> {
    pub power: Complex64,
    /// Pairs `(a_j, x_j)` with `x_j ≠ 0`.
    pub poly: Vec<(i64, SectorPoint)>,
    pub factor: Option<Factor<'a>>,
}

impl<'a> Integrand<'a> {
    /// The GKZ integrand `t^{-β-1} exp(Σ x_j t^{a_j})`. Terms with `x_j = 0`
    /// are dropped, so setting a variable to zero gives literally the same
    /// integrand as deleting the column.
    pub fn hypergeometric(a: &OneRowMatrix, beta: Complex64, x: &[SectorPoint]) -> Result<Self> {
        if x.len() != a.n() {
            return Err(Error::Invalid(format!("expected {} point values, got {}", a.n(), x.len())));
        }
        Ok(Integrand::new(-beta - 1.0, a.entries().iter().copied().zip(x.iter().copied()).collect()))
    }

    pub fn new(power: Complex64, poly: Vec<(i64, SectorPoint)>) -> Self {
        Integrand { power, poly: poly.into_iter().filter(|(_, x)| !x.is_zero()).collect(), factor: None }
    }

    pub fn with_factor(mut self, f: Factor<'a>) -> Self {
        self.factor = Some(f);
        self
    }

    fn exponent(&self, t: Complex64, ln_t: Complex64) -> Complex64 {
        let mut e = self.power * ln_t;
        for &(aj, xj) in &self.poly {
            e += xj.value() * t.powi(aj as i32);
        }
        e
    }

    pub fn eval(&self, t: Complex64, ln_t: Complex64) -> Complex64 {
        let v = self.exponent(t, ln_t).exp();
        match self.factor {
            Some(f) => v * f(t),
            None => v,
        }
    }

    fn log_abs(&self, t: Complex64, ln_t: Complex64) -> f64 {
        let base = self.exponent(t, ln_t).re;
        match self.factor {
            Some(f) => base + f(t).norm().ln(),
            None => base,
        }
    }

    fn dominant(&self) -> Option<(i64, SectorPoint)> {
        self.poly.iter().copied().max_by_key(|(a, _)| *a)
    }

    /// Checks that the dominant term decays along the direction `angle`.
    pub fn check_decay(&self, angle: f64) -> Result<()> {
        let (a, x) = self.dominant().ok_or(Error::NotRapidDecay { angle })?;
        if x.modulus * (x.arg + a as f64 * angle).cos() < -1e-9 * x.modulus {
            Ok(())
        } else {
            Err(Error::NotRapidDecay { angle })
        }
    }

    /// Radius beyond which the dominant term controls the exponent.
    fn dominance_radius(&self, angle: f64) -> f64 {
        let Some((top, x)) = self.dominant() else { return 1.0 };
        let rho = -(x.modulus * (x.arg + top as f64 * angle).cos());
        let n = self.poly.len() as f64 + 1.0;
        let mut r: f64 = 1.0;
        for &(aj, xj) in &self.poly {
            if aj < top {
                r = r.max((4.0 * n * xj.modulus / rho).powf(1.0 / (top - aj) as f64));
            }
        }
        r
    }

    /// Breakpoints `s_0 = start < s_1 < ...` along a ray, marching until the
    /// integrand has dropped 37 e-folds (≈ 1e-16) below its maximum, is
    /// decreasing, and the dominant term has taken over.
    fn ray_breakpoints(&self, start: f64, angle: f64) -> Result<Vec<f64>> {
        let dir = Complex64::from_polar(1.0, angle);
        let floor = self.dominance_radius(angle);
        let log_at = |s: f64| self.log_abs(dir * s, Complex64::new(s.ln(), angle));
        let mut pts = vec![start];
        let mut best = log_at(start);
        let mut prev = best;
        let mut s = start;
        for _ in 0..4000 {
            s = 1.15 * s + 0.05;
            pts.push(s);
            let l = log_at(s);
            if l.is_nan() {
                return Err(Error::NotRapidDecay { angle });
            }
            best = best.max(l);
            if s >= floor && l < prev && (l < best - 37.0 || l == f64::NEG_INFINITY) {
                return Ok(pts);
            }
            prev = l;
        }
        Err(Error::NotRapidDecay { angle })
    }

    fn ray(&self, eps: f64, angle: f64, opts: QuadOptions) -> Result<QuadResult> {
        let dir = Complex64::from_polar(1.0, angle);
        let pts = self.ray_breakpoints(eps, angle)?;
        quadrature::integrate(|s| self.eval(dir * s, Complex64::new(s.ln(), angle)) * dir, &pts, opts)
    }

    fn arc(&self, radius: f64, from: f64, to: f64, opts: QuadOptions) -> Result<QuadResult> {
        let (lo, hi, sign) = if to >= from { (from, to, 1.0) } else { (to, from, -1.0) };
        let pieces = (((hi - lo) / (PI / 8.0)).ceil() as usize).max(1);
        let pts: Vec<f64> = (0..=pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64).collect();
        let ln_r = radius.ln();
        let r = quadrature::integrate(
            |th| {
                let t = Complex64::from_polar(radius, th);
                self.eval(t, Complex64::new(ln_r, th)) * Complex64::new(0.0, 1.0) * t
            },
            &pts,
            opts,
        )?;
        Ok(r.scaled(Complex64::new(sign, 0.0)))
    }

    fn half_line(&self, angle: f64, opts: QuadOptions) -> Result<QuadResult> {
        if self.power.re <= -1.0 {
            return Err(Error::Invalid("half line from 0 needs an integrable power at the origin".into()));
        }
        let dir = Complex64::from_polar(1.0, angle);
        let mut pts: Vec<f64> = vec![0.0];
        pts.extend((0..=30).rev().map(|i| 2f64.powi(-i)));
        let tail = self.ray_breakpoints(1.0, angle)?;
        pts.extend_from_slice(&tail[1..]);
        quadrature::integrate(|s| self.eval(dir * s, Complex64::new(s.ln(), angle)) * dir, &pts, opts)
    }

    pub fn segment(&self, seg: &PathSegment, opts: QuadOptions) -> Result<QuadResult> {
        match *seg {
            PathSegment::RayOut { eps, angle } => self.ray(eps, angle, opts),
            PathSegment::RayIn { eps, angle } => Ok(self.ray(eps, angle, opts)?.scaled(Complex64::new(-1.0, 0.0))),
            PathSegment::Arc { radius, from, to } => self.arc(radius, from, to, opts),
            PathSegment::HalfLineFromZero { angle } => self.half_line(angle, opts),
        }
    }

    /// Σ weight · ∫_path over the cycle; the decay precondition is checked on
    /// every unbounded segment before any quadrature is done.
    pub fn integrate(&self, cycle: &Cycle, tol: f64) -> Result<QuadResult> {
        let cycle = if as_integer_c64(self.power).is_some() { cycle.cancel_coincident_rays() } else { cycle.clone() };
        for angle in cycle.unbounded_angles() {
            self.check_decay(angle)?;
        }
        let opts = QuadOptions::with_tol(tol);
        let mut total = QuadResult::zero();
        for term in &cycle.terms {
            let mut path = QuadResult::zero();
            for seg in &term.path {
                path = path.combine(self.segment(seg, opts)?);
            }
            total = total.combine(path.scaled(term.weight));
        }
        Ok(total)
    }
}

/// `Σ weights · ∫ t^{-β-1} exp(Σ x_j t^{a_j}) dt` over the cycle.
pub fn integrate(a: &OneRowMatrix, beta: Complex64, x: &[SectorPoint], cycle: &Cycle, tol: f64) -> Result<QuadResult> {
    Integrand::hypergeometric(a, beta, x)?.integrate(cycle, tol)
}

/// Rotation angle θ closest to 0 for which every unbounded segment of
/// `e^{iθ}·cycle` lies in the decay region of `x t^{a}`; the midpoint of the
/// feasible interval is returned.
pub fn decaying_rotation(cycle: &Cycle, a: i64, x: SectorPoint) -> Option<f64> {
    let af = a as f64;
    let window = (-TAU, TAU);
    let mut feasible = vec![window];
    for phi in cycle.unbounded_angles() {
        // cos(arg x + a(φ + θ)) < 0  ⇔  θ ∈ ((π/2 - arg - aφ + 2πm)/a, (3π/2 - arg - aφ + 2πm)/a)
        let mut allowed = Vec::new();
        for m in -4 * a..=4 * a {
            let lo = (PI / 2.0 - x.arg - af * phi + TAU * m as f64) / af;
            let hi = lo + PI / af;
            if hi > window.0 && lo < window.1 {
                allowed.push((lo, hi));
            }
        }
        let mut next = Vec::new();
        for &(l1, h1) in &feasible {
            for &(l2, h2) in &allowed {
                let (l, h) = (l1.max(l2), h1.min(h2));
                if h - l > 1e-9 {
                    next.push((l, h));
                }
            }
        }
        feasible = next;
    }
    feasible
        .into_iter()
        .map(|(l, h)| {
            let dist = if l <= 0.0 && 0.0 <= h { 0.0 } else { l.abs().min(h.abs()) };
            (dist, 0.5 * (l + h))
        })
        .min_by(|p, q| p.0.total_cmp(&q.0).then(p.1.abs().total_cmp(&q.1.abs())))
        .map(|(_, mid)| mid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleIntegral {
    pub value: Complex64,
    /// `2πi Σ_{A·l=β} x^l / l!` when β ∈ ℕ.
    pub combinatorial: Option<Complex64>,
    pub quadrature: Complex64,
    pub quadrature_error: f64,
    /// Relative difference between the two when both exist.
    pub discrepancy: Option<f64>,
}

/// Integral along C_b. For integer β the rays cancel and this is the circle
/// of radius ε; for β ∈ ℕ the value is the residue sum, cross-checked by
/// quadrature.
pub fn circle_integral(a: &OneRowMatrix, beta: Complex64, x: &[SectorPoint], eps: f64) -> Result<CircleIntegral> {
    let integrand = Integrand::hypergeometric(a, beta, x)?;
    let int_beta = as_integer_c64(beta);
    let cycle = match int_beta {
        Some(_) => Cycle::circle(eps),
        None => Cycle::cp(a.pair().2, a.pair().2, eps)?,
    };
    let q = integrand.integrate(&cycle, 1e-13)?;
    let combinatorial = int_beta.map(|b| {
        let mut sum = Complex64::new(0.0, 0.0);
        for l in a.decompositions(b) {
            let mut term = Complex64::new(1.0, 0.0);
            for (xi, &li) in x.iter().zip(&l) {
                term *= xi.value().powi(li as i32) / factorial(li);
            }
            sum += term;
        }
        Complex64::new(0.0, TAU) * sum
    });
    let discrepancy = combinatorial.map(|c| {
        let scale = c.norm().max(q.l1 * 1e-3).max(f64::MIN_POSITIVE);
        (c - q.value).norm() / scale
    });
    Ok(CircleIntegral {
        value: combinatorial.unwrap_or(q.value),
        combinatorial,
        quadrature: q.value,
        quadrature_error: q.error,
        discrepancy,
    })
}

/// `|I(ε₁) - I(ε₂)| / |I(ε₁)|` for the cycle C_p.
pub fn epsilon_independence_check(
    a: &OneRowMatrix,
    beta: Complex64,
    x: &[SectorPoint],
    p: i64,
    eps1: f64,
    eps2: f64,
    tol: f64,
) -> Result<f64> {
    let b = a.pair().2;
    let i1 = integrate(a, beta, x, &Cycle::cp(p, b, eps1)?, tol)?.value;
    let i2 = integrate(a, beta, x, &Cycle::cp(p, b, eps2)?, tol)?.value;
    Ok((i1 - i2).norm() / i1.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(m: f64, a: f64) -> SectorPoint {
        SectorPoint::new(m, a).unwrap()
    }

    #[test]
    fn cp_shape() {
        let c = Cycle::cp(1, 3, 1.0).unwrap();
        match c.terms[0].path[1] {
            PathSegment::Arc { from, to, .. } => assert!((to - from - TAU / 3.0).abs() < 1e-15),
            _ => panic!("expected arc"),
        }
        assert!(matches!(Cycle::cp(0, 3, 1.0), Err(Error::BadP { .. })));
        assert!(matches!(Cycle::cp(4, 3, 1.0), Err(Error::BadP { .. })));
    }

    #[test]
    fn rotations_compose() {
        let c = Cycle::cp(2, 3, 0.5).unwrap();
        assert_eq!(c.rotate(0.0), c);
        let back = c.rotate(0.7).rotate(-0.7);
        for (s, t) in back.terms[0].path.iter().zip(&c.terms[0].path) {
            match (s, t) {
                (PathSegment::Arc { from: f1, to: t1, .. }, PathSegment::Arc { from: f2, to: t2, .. }) => {
                    assert!((f1 - f2).abs() < 1e-15 && (t1 - t2).abs() < 1e-15)
                }
                _ => assert_eq!(s.ray_angle().map(|x| (x * 1e12).round()), t.ray_angle().map(|x| (x * 1e12).round())),
            }
        }
    }

    #[test]
    fn root_of_cycle() {
        let c = Cycle::cp(1, 3, 4.0).unwrap();
        assert_eq!(c.root(1, 0).unwrap(), c);
        let r = c.root(2, 1).unwrap();
        assert_eq!(r.terms[0].path[0], PathSegment::RayIn { eps: 2.0, angle: -PI });
    }

    #[test]
    fn residue_at_origin() {
        let a = OneRowMatrix::new(vec![2, 3]).unwrap();
        let x = [SectorPoint::zero(), SectorPoint::zero()];
        let c = Cycle::cp(3, 3, 1.0).unwrap();
        let r = integrate(&a, Complex64::new(0.0, 0.0), &x, &c, 1e-13).unwrap();
        assert!((r.value - Complex64::new(0.0, TAU)).norm() < 1e-13);
    }

    #[test]
    fn growth_is_rejected() {
        let a = OneRowMatrix::new(vec![2, 3]).unwrap();
        let x = [sp(1.0, PI), sp(1.0, 0.0)];
        let c = Cycle::cp(1, 3, 1.0).unwrap();
        assert!(matches!(integrate(&a, Complex64::new(0.3, 0.0), &x, &c, 1e-10), Err(Error::NotRapidDecay { .. })));
    }

    #[test]
    fn rotation_search_matches_sector() {
        // For C_1 of (2,3) with x_1 = -1 the rotation lands at π/6.
        let c = Cycle::cp(1, 3, 1.0).unwrap();
        let th = decaying_rotation(&c, 2, sp(1.0, PI)).unwrap();
        assert!((th - PI / 6.0).abs() < 1e-12, "{th}");
        let c2 = Cycle::cp(2, 3, 1.0).unwrap();
        let th = decaying_rotation(&c2, 2, sp(1.0, PI)).unwrap();
        assert!((th + PI / 6.0).abs() < 1e-12, "{th}");
    }

    #[test]
    fn circle_integral_examples() {
        let a = OneRowMatrix::new(vec![2, 3]).unwrap();
        let x = [sp(0.7, 0.4), sp(0.3, -1.0)];
        let r = circle_integral(&a, Complex64::new(5.0, 0.0), &x, 1.0).unwrap();
        let want = Complex64::new(0.0, TAU) * x[0].value() * x[1].value();
        assert!((r.value - want).norm() < 1e-14);
        assert!(r.discrepancy.unwrap() < 1e-10);
        let r = circle_integral(&a, Complex64::new(1.0, 0.0), &x, 1.0).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert!(r.quadrature.norm() < 1e-13);
    }
}
