//! Weyl-algebra operators with polynomial coefficients acting on
//! [`FractionalSeries`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::{kernel_basis, OneRowMatrix};
use crate::scalar::Scalar;
use crate::series::FractionalSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct OpTerm<S> {
    pub coeff: S,
    /// Exponents of the multiplying monomial `x^mono`.
    pub mono: Vec<u32>,
    /// Orders of the derivative `∂^deriv`.
    pub deriv: Vec<u32>,
}

/// `Σ coeff · x^mono ∂^deriv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialOperator<S> {
    nvars: usize,
    terms: Vec<OpTerm<S>>,
}

impl<S: Scalar> DifferentialOperator<S> {
    pub fn new(nvars: usize, terms: Vec<OpTerm<S>>) -> Result<Self> {
        if terms.iter().any(|t| t.mono.len() != nvars || t.deriv.len() != nvars) {
            return Err(Error::Invalid("operator term has the wrong number of variables".into()));
        }
        Ok(DifferentialOperator { nvars, terms })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[OpTerm<S>] {
        &self.terms
    }

    /// `∂^{plus} - ∂^{minus}`.
    pub fn binomial(plus: Vec<u32>, minus: Vec<u32>) -> Result<Self> {
        let n = plus.len();
        DifferentialOperator::new(
            n,
            vec![
                OpTerm { coeff: S::one(), mono: vec![0; n], deriv: plus },
                OpTerm { coeff: -S::one(), mono: vec![0; n], deriv: minus },
            ],
        )
    }
}

fn split_signs(u: &[i64]) -> (Vec<u32>, Vec<u32>) {
    let pos = u.iter().map(|&x| x.max(0) as u32).collect();
    let neg = u.iter().map(|&x| (-x).max(0) as u32).collect();
    (pos, neg)
}

/// Binomials `∂^{u₊} - ∂^{u₋}` generating the toric ideal, one per kernel
/// basis vector, written with the derivative in the first variable first
/// (for (a, b) this is `∂_1^b - ∂_2^a`).
pub fn toric_generators<S: Scalar>(a: &OneRowMatrix) -> Result<Vec<DifferentialOperator<S>>> {
    let basis: Vec<Vec<i64>> = if a.n() == 2 {
        let e = a.entries();
        vec![vec![-e[1], e[0]]]
    } else {
        kernel_basis(a)?.into_iter().map(|u| u.components).collect()
    };
    basis
        .iter()
        .map(|u| {
            let (pos, neg) = split_signs(u);
            if u[0] > 0 {
                DifferentialOperator::binomial(pos, neg)
            } else {
                DifferentialOperator::binomial(neg, pos)
            }
        })
        .collect()
}

/// `Σ a_j x_j ∂_j - β`.
pub fn euler_operator<S: Scalar>(a: &OneRowMatrix, beta: &S) -> DifferentialOperator<S> {
    let n = a.n();
    let mut terms: Vec<OpTerm<S>> = a
        .entries()
        .iter()
        .enumerate()
        .map(|(j, &aj)| {
            let mut e = vec![0u32; n];
            e[j] = 1;
            OpTerm { coeff: S::from_i64(aj), mono: e.clone(), deriv: e }
        })
        .collect();
    terms.push(OpTerm { coeff: -beta.clone(), mono: vec![0; n], deriv: vec![0; n] });
    DifferentialOperator { nvars: n, terms }
}

/// Result of applying an operator: the image series plus, per output term,
/// the sum of absolute values of the contributions (for relative residuals).
#[derive(Debug, Clone)]
pub struct Application<S> {
    pub series: FractionalSeries<S>,
    pub contribution_scale: BTreeMap<Vec<i64>, f64>,
}

/// Applies `op` term by term using `∂(x^c) = c x^{c-1}` on `base + offset`.
/// The output is truncated at `N + min_t w·(mono_t - deriv_t)` so that every
/// kept coefficient receives all of its contributions.
pub fn apply<S: Scalar>(op: &DifferentialOperator<S>, s: &FractionalSeries<S>) -> Result<FractionalSeries<S>> {
    Ok(apply_tracked(op, s)?.series)
}

pub fn apply_tracked<S: Scalar>(op: &DifferentialOperator<S>, s: &FractionalSeries<S>) -> Result<Application<S>> {
    if op.nvars != s.nvars() {
        return Err(Error::Invalid("operator and series have different variable counts".into()));
    }
    let w = s.weights();
    let shift = |t: &OpTerm<S>| -> Vec<i64> { t.mono.iter().zip(&t.deriv).map(|(&m, &d)| m as i64 - d as i64).collect() };
    let moves: Vec<i64> = op.terms.iter().map(|t| w.iter().zip(shift(t)).map(|(a, b)| a * b).sum()).collect();
    let lowest = moves.iter().copied().min().unwrap_or(0);
    let highest = moves.iter().copied().max().unwrap_or(0);
    // A complete polynomial input has no missing terms, so nothing is lost.
    let n_out = if s.is_polynomial() { s.truncation() + highest.max(0) } else { s.truncation() + lowest };
    let mut acc: BTreeMap<Vec<i64>, S> = BTreeMap::new();
    let mut scale: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (o, c) in s.terms() {
        let expo = s.exponent(o);
        for t in &op.terms {
            let mut coeff = t.coeff.clone() * c.clone();
            for (e, &d) in expo.iter().zip(&t.deriv) {
                if d > 0 {
                    coeff = coeff * e.pochhammer(d as u64);
                }
            }
            if coeff.is_zero() {
                continue;
            }
            let out: Vec<i64> = o.iter().zip(shift(t)).map(|(a, b)| a + b).collect();
            if s.grading(&out) > n_out {
                continue;
            }
            *scale.entry(out.clone()).or_insert(0.0) += coeff.magnitude();
            let entry = acc.entry(out).or_insert_with(S::zero);
            *entry = entry.clone() + coeff;
        }
    }
    let mut series = FractionalSeries::from_parts(s.base().to_vec(), w.to_vec(), n_out, acc)?;
    series.set_polynomial(s.is_polynomial());
    Ok(Application { series, contribution_scale: scale })
}

/// Largest absolute coefficient of `op(s)` inside the reliable range.
pub fn annihilation_residual<S: Scalar>(op: &DifferentialOperator<S>, s: &FractionalSeries<S>) -> Result<f64> {
    Ok(apply(op, s)?.max_coefficient())
}

/// Largest `|Σ contributions| / Σ |contributions|` over output offsets; zero
/// when every coefficient cancels exactly.
pub fn relative_annihilation_residual<S: Scalar>(op: &DifferentialOperator<S>, s: &FractionalSeries<S>) -> Result<f64> {
    let app = apply_tracked(op, s)?;
    let mut worst = 0.0f64;
    for (o, v) in app.series.terms() {
        let denom = app.contribution_scale.get(o).copied().unwrap_or(0.0);
        if denom > 0.0 {
            worst = worst.max(v.magnitude() / denom);
        }
    }
    Ok(worst)
}
