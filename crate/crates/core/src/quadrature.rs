//! Globally adaptive Gauss–Legendre quadrature of complex-valued functions of
//! a real parameter.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const PANEL_ORDER: usize = 32;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], by Newton
/// iteration on P_n from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Stop once the error estimate is below `rel_tol · |value|`.
    pub rel_tol: f64,
    /// Or below this absolute level.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-13, abs_tol: 0.0, max_panels: 4000 }
    }
}

impl QuadOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        QuadOptions { rel_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    /// Quadrature estimate of ∫|f|, the scale below which cancellation makes
    /// relative accuracy unattainable.
    pub l1: f64,
    pub panels: usize,
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, l1: 0.0, panels: 0 }
    }

    pub fn scaled(self, w: Complex64) -> Self {
        QuadResult { value: self.value * w, error: self.error * w.norm(), l1: self.l1 * w.norm(), panels: self.panels }
    }

    pub fn combine(self, other: QuadResult) -> Self {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            l1: self.l1 + other.l1,
            panels: self.panels + other.panels,
        }
    }
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let (x, w) = rule32();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let v = f(mid + half * xi);
        sum += v * *wi;
        abs += v.norm() * wi;
    }
    (sum * half, abs * half.abs())
}

struct Panel {
    a: f64,
    b: f64,
    whole: Complex64,
    left: (Complex64, f64),
    right: (Complex64, f64),
}

impl Panel {
    fn new<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64) -> Self {
        let m = 0.5 * (a + b);
        Panel { a, b, whole, left: panel(f, a, m), right: panel(f, m, b) }
    }
    fn value(&self) -> Complex64 {
        self.left.0 + self.right.0
    }
    fn error(&self) -> f64 {
        (self.value() - self.whole).norm()
    }
    fn splittable(&self) -> bool {
        let m = 0.5 * (self.a + self.b);
        m > self.a && m < self.b && (self.b - self.a) > 1e-13 * self.a.abs().max(self.b.abs())
    }
}

/// Integrates `f` over consecutive intervals given by `breakpoints` (at least
/// two, increasing). Each panel is compared with its two halves; the panel
/// with the largest discrepancy is bisected until the summed discrepancy is
/// below the tolerance or the roundoff floor `1e-14 · ∫|f|`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, breakpoints: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    if breakpoints.len() < 2 {
        return Ok(QuadResult::zero());
    }
    let mut panels: Vec<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let whole = panel(&f, w[0], w[1]).0;
            Panel::new(&f, w[0], w[1], whole)
        })
        .collect();
    loop {
        let value: Complex64 = panels.iter().map(Panel::value).sum();
        let error: f64 = panels.iter().map(Panel::error).sum();
        let l1: f64 = panels.iter().map(|p| p.left.1 + p.right.1).sum();
        let target = (opts.rel_tol * value.norm()).max(opts.abs_tol).max(1e-14 * l1);
        if error <= target {
            return Ok(QuadResult { value, error, l1, panels: panels.len() });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable())
            .max_by(|x, y| x.1.error().total_cmp(&y.1.error()))
            .map(|(i, _)| i);
        let Some(i) = worst.filter(|_| panels.len() < opts.max_panels) else {
            return Err(Error::QuadratureNoConvergence { value: value.norm(), error });
        };
        let p = panels.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        panels.push(Panel::new(&f, p.a, m, p.left.0));
        panels.push(Panel::new(&f, m, p.b, p.right.0));
        // Keep the panels ordered so the final sum is independent of history.
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(32);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m62: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((m62 - 2.0 / 63.0).abs() < 1e-14);
        let (x5, w5) = gauss_legendre(5);
        let m8: f64 = x5.iter().zip(&w5).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| Complex64::new(1.0 / (1e-4 + (x - 0.3).powi(2)), 0.0);
        let r = integrate(f, &[0.0, 1.0], QuadOptions::with_tol(1e-12)).unwrap();
        let exact = 100.0 * ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan());
        assert!((r.value.re - exact).abs() < 1e-9 * exact, "{} vs {}", r.value.re, exact);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        let f = |x: f64| Complex64::new(0.0, 20.0 * x).exp();
        let r = integrate(f, &[0.0, 3.0], QuadOptions::with_tol(1e-13)).unwrap();
        let exact = (Complex64::new(0.0, 60.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn panel_limit_is_reported() {
        let f = |x: f64| Complex64::new(if x < 0.3 { 0.0 } else { 1.0 }, 0.0);
        let opts = QuadOptions { rel_tol: 1e-15, abs_tol: 0.0, max_panels: 5 };
        assert!(matches!(integrate(f, &[0.0, 1.0], opts), Err(Error::QuadratureNoConvergence { .. })));
    }
}
