//! Truncated multivariate series `Σ c_o · ∏ x_i^{base_i + o_i}` with integer
//! offsets `o` and one (possibly non-integer) base exponent per variable.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma_series::SeriesLabel;
use crate::scalar::Scalar;
use crate::sector::SectorPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSeries<S = Complex64> {
    base: Vec<S>,
    weights: Vec<i64>,
    truncation: i64,
    terms: BTreeMap<Vec<i64>, S>,
    polynomial: bool,
    label: Option<SeriesLabel>,
}

impl<S: Scalar> FractionalSeries<S> {
    /// Empty series. Terms are kept only when `weights · offsets <= truncation`.
    pub fn new(base: Vec<S>, weights: Vec<i64>, truncation: i64) -> Result<Self> {
        if base.len() != weights.len() || base.is_empty() {
            return Err(Error::Invalid("base and weights must have the same nonzero length".into()));
        }
        Ok(FractionalSeries { base, weights, truncation, terms: BTreeMap::new(), polynomial: false, label: None })
    }

    pub fn nvars(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[S] {
        &self.base
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn label(&self) -> Option<&SeriesLabel> {
        self.label.as_ref()
    }

    pub fn with_label(mut self, label: SeriesLabel) -> Self {
        self.label = Some(label);
        self
    }

    /// True when the series is known to have no terms beyond the truncation.
    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub fn set_polynomial(&mut self, yes: bool) {
        self.polynomial = yes;
    }

    pub fn grading(&self, offsets: &[i64]) -> i64 {
        self.weights.iter().zip(offsets).map(|(w, o)| w * o).sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &S)> {
        self.terms.iter()
    }

    pub fn get(&self, offsets: &[i64]) -> Option<&S> {
        self.terms.get(offsets)
    }

    /// Adds `c` to the coefficient at `offsets`; zero results are removed.
    pub fn insert(&mut self, offsets: Vec<i64>, c: S) -> Result<()> {
        if offsets.len() != self.nvars() {
            return Err(Error::Invalid("offset length mismatch".into()));
        }
        if self.grading(&offsets) > self.truncation {
            return Err(Error::Invalid(format!(
                "offset {offsets:?} has grading above the truncation {}",
                self.truncation
            )));
        }
        if c.is_zero() {
            return Ok(());
        }
        let sum = match self.terms.remove(&offsets) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(offsets, sum);
        }
        Ok(())
    }

    /// Full exponent `base + offsets` of a term.
    pub fn exponent(&self, offsets: &[i64]) -> Vec<S> {
        self.base.iter().zip(offsets).map(|(b, &o)| b.clone() + S::from_i64(o)).collect()
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.empty_like();
        if !c.is_zero() {
            for (o, v) in &self.terms {
                out.terms.insert(o.clone(), v.clone() * c.clone());
            }
        }
        out.polynomial = self.polynomial;
        out
    }

    pub fn empty_like(&self) -> Self {
        FractionalSeries {
            base: self.base.clone(),
            weights: self.weights.clone(),
            truncation: self.truncation,
            terms: BTreeMap::new(),
            polynomial: false,
            label: None,
        }
    }

    /// Same series with a lower truncation.
    pub fn truncated(&self, n: i64) -> Self {
        let mut out = self.empty_like();
        out.truncation = n.min(self.truncation);
        for (o, v) in &self.terms {
            if self.grading(o) <= out.truncation {
                out.terms.insert(o.clone(), v.clone());
            }
        }
        out.polynomial = self.polynomial && out.len() == self.len();
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.base != other.base || self.weights != other.weights {
            return Err(Error::Invalid("series have different bases or weights".into()));
        }
        Ok(())
    }

    /// Sum, truncated to the lower of the two orders.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = match (self.polynomial, other.polynomial) {
            (true, true) => self.truncation.max(other.truncation),
            (true, false) => other.truncation,
            (false, true) => self.truncation,
            (false, false) => self.truncation.min(other.truncation),
        };
        let mut out = self.empty_like();
        out.truncation = n;
        for (o, v) in self.terms.iter().chain(other.terms.iter()) {
            if out.grading(o) <= n {
                out.insert(o.clone(), v.clone())?;
            }
        }
        out.polynomial = self.polynomial && other.polynomial;
        Ok(out)
    }

    /// Re-expresses the series with a new base differing from the old one by
    /// integers; offsets and the truncation are shifted accordingly.
    pub fn rebase(&self, new_base: &[S]) -> Result<Self> {
        if new_base.len() != self.nvars() {
            return Err(Error::Invalid("rebase length mismatch".into()));
        }
        let mut shift = Vec::with_capacity(self.nvars());
        for (old, new) in self.base.iter().zip(new_base) {
            let d = (old.clone() - new.clone())
                .as_integer()
                .ok_or_else(|| Error::Invalid("rebase by a non-integer amount".into()))?;
            shift.push(d);
        }
        let dn: i64 = self.weights.iter().zip(&shift).map(|(w, s)| w * s).sum();
        let mut out = FractionalSeries {
            base: new_base.to_vec(),
            weights: self.weights.clone(),
            truncation: self.truncation + dn,
            terms: BTreeMap::new(),
            polynomial: self.polynomial,
            label: self.label.clone(),
        };
        for (o, v) in &self.terms {
            let shifted: Vec<i64> = o.iter().zip(&shift).map(|(a, b)| a + b).collect();
            out.terms.insert(shifted, v.clone());
        }
        Ok(out)
    }

    /// Largest coefficient difference over offsets both series determine.
    /// The bases must agree up to integers; `other` is rebased onto `self`.
    pub fn max_abs_difference(&self, other: &Self) -> Result<f64> {
        let other = other.rebase(&self.base)?;
        if self.weights != other.weights {
            return Err(Error::Invalid("series have different grading weights".into()));
        }
        let n = match (self.polynomial, other.polynomial) {
            (true, true) => i64::MAX,
            (true, false) => other.truncation,
            (false, true) => self.truncation,
            (false, false) => self.truncation.min(other.truncation),
        };
        let mut worst = 0.0f64;
        for (o, v) in &self.terms {
            if self.grading(o) <= n {
                let w = other.terms.get(o).cloned().unwrap_or_else(S::zero);
                worst = worst.max((v.clone() - w).magnitude());
            }
        }
        for (o, w) in &other.terms {
            if other.grading(o) <= n && !self.terms.contains_key(o) {
                worst = worst.max(w.magnitude());
            }
        }
        Ok(worst)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// Partial sum at `x`, using the carried branch of each point.
    pub fn evaluate(&self, x: &[SectorPoint]) -> Result<Complex64> {
        if x.len() != self.nvars() {
            return Err(Error::Invalid("point dimension mismatch".into()));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (o, v) in &self.terms {
            let mut term = v.to_c64();
            for (i, e) in self.exponent(o).iter().enumerate() {
                term *= x[i].pow(e.to_c64()).map_err(|_| Error::ZeroBaseWithFractionalExponent(i))?;
            }
            total += term;
        }
        Ok(total)
    }

    pub fn to_complex(&self) -> FractionalSeries<Complex64> {
        FractionalSeries {
            base: self.base.iter().map(|b| b.to_c64()).collect(),
            weights: self.weights.clone(),
            truncation: self.truncation,
            terms: self.terms.iter().map(|(o, v)| (o.clone(), v.to_c64())).collect(),
            polynomial: self.polynomial,
            label: self.label.clone(),
        }
    }

    /// Builds a series from raw parts, dropping zero coefficients and any
    /// term above the truncation.
    pub(crate) fn from_parts(
        base: Vec<S>,
        weights: Vec<i64>,
        truncation: i64,
        terms: impl IntoIterator<Item = (Vec<i64>, S)>,
    ) -> Result<Self> {
        let mut out = FractionalSeries::new(base, weights, truncation)?;
        for (o, v) in terms {
            if out.grading(&o) <= truncation {
                out.insert(o, v)?;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub offsets: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// Serialized form of a series (schema `v1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub v: String,
    pub label: Option<SeriesLabel>,
    pub base_exponents: Vec<[f64; 2]>,
    pub weights: Vec<i64>,
    pub truncation: i64,
    pub polynomial: bool,
    pub zero: bool,
    pub terms: Vec<TermDoc>,
}

impl FractionalSeries<Complex64> {
    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            v: "v1".into(),
            label: self.label.clone(),
            base_exponents: self.base.iter().map(|b| [b.re, b.im]).collect(),
            weights: self.weights.clone(),
            truncation: self.truncation,
            polynomial: self.polynomial,
            zero: self.is_zero(),
            terms: self
                .terms
                .iter()
                .map(|(o, v)| TermDoc { offsets: o.clone(), re: v.re, im: v.im })
                .collect(),
        }
    }

    pub fn from_doc(doc: &SeriesDoc) -> Result<Self> {
        if doc.v != "v1" {
            return Err(Error::Invalid(format!("unsupported schema version {:?}", doc.v)));
        }
        let base = doc.base_exponents.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let mut s = FractionalSeries::new(base, doc.weights.clone(), doc.truncation)?;
        for t in &doc.terms {
            s.insert(t.offsets.clone(), Complex64::new(t.re, t.im))?;
        }
        s.polynomial = doc.polynomial;
        s.label = doc.label.clone();
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn insert_rejects_out_of_range_and_drops_zero() {
        let mut s = FractionalSeries::new(vec![c(0.5, 0.0), c(0.0, 0.0)], vec![0, 1], 3).unwrap();
        s.insert(vec![-1, 2], c(1.0, 0.0)).unwrap();
        assert!(s.insert(vec![0, 4], c(1.0, 0.0)).is_err());
        s.insert(vec![0, 0], c(0.0, 0.0)).unwrap();
        assert_eq!(s.len(), 1);
        s.insert(vec![-1, 2], c(-1.0, 0.0)).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn evaluate_half_power() {
        let mut s = FractionalSeries::new(vec![c(0.5, 0.0)], vec![1], 0).unwrap();
        s.insert(vec![0], c(1.0, 0.0)).unwrap();
        let v = s.evaluate(&[SectorPoint::new(4.0, PI).unwrap()]).unwrap();
        assert!((v - c(0.0, 2.0)).norm() < 1e-15);
        assert!(s.evaluate(&[SectorPoint::zero()]).is_err());
    }

    #[test]
    fn rebase_preserves_monomials() {
        let mut s = FractionalSeries::new(vec![c(0.25, 0.0), c(0.0, 0.0)], vec![0, 1], 4).unwrap();
        s.insert(vec![-3, 2], c(2.0, 0.0)).unwrap();
        let r = s.rebase(&[c(-0.75, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.get(&[-2, 2]), Some(&c(2.0, 0.0)));
        assert_eq!(r.exponent(&[-2, 2]), s.exponent(&[-3, 2]));
        assert!(s.rebase(&[c(0.3, 0.0), c(0.0, 0.0)]).is_err());
        assert_eq!(s.max_abs_difference(&r).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let mut s = FractionalSeries::new(vec![c(0.1, -0.3), c(0.0, 0.0)], vec![0, 1], 5).unwrap();
        s.insert(vec![0, 0], c(1.0 / 3.0, 0.0)).unwrap();
        s.insert(vec![-3, 2], c(0.1, 1e-300)).unwrap();
        let text = serde_json::to_string(&s.to_doc()).unwrap();
        let back: SeriesDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(FractionalSeries::from_doc(&back).unwrap(), s);
    }
}
