//! The integer row `A`, its kernel lattice and the Γ[v; u] coefficients.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `x` modulo `m` (requires gcd(x, m) = 1).
pub fn mod_inverse(x: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (x.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// A single row `a_1 < ... < a_n` of coprime positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct OneRowMatrix {
    entries: Vec<i64>,
}

impl TryFrom<Vec<i64>> for OneRowMatrix {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        OneRowMatrix::new(v)
    }
}

impl From<OneRowMatrix> for Vec<i64> {
    fn from(a: OneRowMatrix) -> Self {
        a.entries
    }
}

impl OneRowMatrix {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidMatrix("need at least two entries".into()));
        }
        if entries[0] <= 0 {
            return Err(Error::InvalidMatrix("entries must be positive".into()));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMatrix("entries must be strictly increasing".into()));
        }
        if entries.iter().fold(0, |g, &x| gcd(g, x)) != 1 {
            return Err(Error::InvalidMatrix("entries must have gcd 1".into()));
        }
        Ok(OneRowMatrix { entries })
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn last(&self) -> i64 {
        self.entries[self.n() - 1]
    }

    /// `(k, a, b)` with `a_{n-1} = k a`, `a_n = k b`, gcd(a, b) = 1.
    pub fn pair(&self) -> (i64, i64, i64) {
        let n = self.n();
        let (x, y) = (self.entries[n - 2], self.entries[n - 1]);
        let k = gcd(x, y);
        (k, x / k, y / k)
    }

    /// The matrix with column `i` removed, if still valid.
    pub fn without(&self, i: usize) -> Result<OneRowMatrix> {
        let mut e = self.entries.clone();
        if i >= e.len() {
            return Err(Error::IndexOutOfRange { index: i as i64, bound: e.len() as i64 });
        }
        e.remove(i);
        OneRowMatrix::new(e)
    }

    pub fn dot(&self, u: &[i64]) -> Result<i64> {
        if u.len() != self.n() {
            return Err(Error::Invalid(format!("vector of length {} for n={}", u.len(), self.n())));
        }
        self.entries.iter().zip(u).try_fold(0i64, |acc, (&a, &x)| {
            a.checked_mul(x).and_then(|p| acc.checked_add(p)).ok_or(Error::Overflow)
        })
    }

    /// All `l ∈ ℕⁿ` with `A·l = beta`.
    pub fn decompositions(&self, beta: i64) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        let mut cur = vec![0u64; self.n()];
        if beta >= 0 {
            self.decompose_rec(0, beta, &mut cur, &mut out);
        }
        out
    }

    fn decompose_rec(&self, i: usize, rest: i64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i + 1 == self.n() {
            if rest % self.entries[i] == 0 {
                cur[i] = (rest / self.entries[i]) as u64;
                out.push(cur.clone());
            }
            return;
        }
        let a = self.entries[i];
        for m in 0..=rest / a {
            cur[i] = m as u64;
            self.decompose_rec(i + 1, rest - m * a, cur, out);
        }
        cur[i] = 0;
    }

    /// Membership of `beta` in the semigroup ℕA.
    pub fn in_semigroup(&self, beta: i64) -> bool {
        if beta < 0 {
            return false;
        }
        // Coin-problem table; fine for the small betas used here.
        let mut reach = vec![false; beta as usize + 1];
        reach[0] = true;
        for t in 1..=beta as usize {
            reach[t] = self.entries.iter().any(|&a| a as usize <= t && reach[t - a as usize]);
        }
        reach[beta as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeVector {
    pub components: Vec<i64>,
}

impl LatticeVector {
    pub fn new(components: Vec<i64>) -> Self {
        LatticeVector { components }
    }
}

/// A vector `v` with `A·v = beta`, kept together with its `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector<S = Complex64> {
    pub components: Vec<S>,
    pub beta: S,
}

impl<S: Scalar> ExponentVector<S> {
    pub fn new(a: &OneRowMatrix, components: Vec<S>) -> Result<Self> {
        if components.len() != a.n() {
            return Err(Error::Invalid("exponent vector length mismatch".into()));
        }
        let beta = a
            .entries()
            .iter()
            .zip(&components)
            .fold(S::zero(), |acc, (&ai, v)| acc + S::from_i64(ai) * v.clone());
        Ok(ExponentVector { components, beta })
    }
}

/// The basis `u^{(2)}, ..., u^{(n)}` of ker_ℤ(A) for a row with leading 1.
pub fn kernel_basis(a: &OneRowMatrix) -> Result<Vec<LatticeVector>> {
    let e = a.entries();
    if e[0] != 1 {
        return Err(Error::NotLeadingOne(e[0]));
    }
    let n = e.len();
    if n == 2 {
        return Ok(vec![LatticeVector::new(vec![-e[1], 1])]);
    }
    let mut out = Vec::with_capacity(n - 1);
    for i in 1..n {
        let mut u = vec![0i64; n];
        if i == n - 2 {
            u[0] = e[i];
            u[i] = -1;
        } else {
            u[0] = -e[i];
            u[i] = 1;
        }
        out.push(LatticeVector::new(u));
    }
    Ok(out)
}

/// Falling factorial `[v]_u = v (v-1) ... (v-u+1)`.
pub fn pochhammer<S: Scalar>(v: &S, u: u64) -> S {
    v.pochhammer(u)
}

/// Γ[v; u] = [v]_{u₋} / [v+u]_{u₊}.
pub fn gamma_coefficient<S: Scalar>(v: &[S], u: &[i64]) -> Result<S> {
    if v.len() != u.len() {
        return Err(Error::Invalid("length mismatch in gamma_coefficient".into()));
    }
    let mut num = S::one();
    let mut den = S::one();
    for (vi, &ui) in v.iter().zip(u) {
        if ui < 0 {
            num = num * vi.pochhammer(ui.unsigned_abs());
        } else if ui > 0 {
            let shifted = vi.clone() + S::from_i64(ui);
            den = den * shifted.pochhammer(ui as u64);
        }
    }
    if den.is_zero() {
        return Err(Error::DenominatorVanishes);
    }
    if num.is_zero() {
        return Ok(S::zero());
    }
    Ok(num / den)
}

/// Indices (0-based) whose entry is a negative integer.
pub fn negative_support<S: Scalar>(w: &[S]) -> BTreeSet<usize> {
    w.iter()
        .enumerate()
        .filter_map(|(i, x)| x.as_integer().filter(|&n| n < 0).map(|_| i))
        .collect()
}

/// Default radius of the bounded kernel search.
pub const DEFAULT_SEARCH_RADIUS: i64 = 25;

/// A kernel vector `u` with `max |u_i| <= radius` and
/// nsupp(v+u) ⊊ nsupp(v), if one exists. This is a bounded search, hence a
/// heuristic: `None` means no witness within the radius.
pub fn negative_support_witness<S: Scalar>(
    v: &[S],
    a: &OneRowMatrix,
    radius: i64,
) -> Option<LatticeVector> {
    let base = negative_support(v);
    if base.is_empty() {
        return None;
    }
    let n = a.n();
    let e = a.entries();
    let mut u = vec![-radius; n - 1];
    loop {
        let partial: i64 = u.iter().zip(e).map(|(x, y)| x * y).sum();
        if partial % e[n - 1] == 0 {
            let last = -partial / e[n - 1];
            if last.abs() <= radius {
                let mut full = u.clone();
                full.push(last);
                let shifted: Vec<S> = v
                    .iter()
                    .zip(&full)
                    .map(|(x, &d)| x.clone() + S::from_i64(d))
                    .collect();
                let s = negative_support(&shifted);
                if s.len() < base.len() && s.is_subset(&base) {
                    return Some(LatticeVector::new(full));
                }
            }
        }
        // Odometer increment over the first n-1 coordinates.
        let mut i = 0;
        loop {
            if i == n - 1 {
                return None;
            }
            u[i] += 1;
            if u[i] <= radius {
                break;
            }
            u[i] = -radius;
            i += 1;
        }
    }
}

/// Bounded-search test of minimal negative support (heuristic, see
/// [`negative_support_witness`]).
pub fn has_minimal_negative_support<S: Scalar>(v: &[S], a: &OneRowMatrix, radius: i64) -> bool {
    negative_support_witness(v, a, radius).is_none()
}
