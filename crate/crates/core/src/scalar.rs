//! Coefficient fields. Series and operators are generic over [`Scalar`] so the
//! same code runs in double precision and in exact rational arithmetic.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Tolerance used to decide that a floating complex number is an integer.
pub const INTEGER_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// Absolute value as a float, used for residuals and tolerances.
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// `Some(n)` when the value is the integer `n`.
    fn as_integer(&self) -> Option<i64>;
    /// Falling factorial `v (v-1) ... (v-u+1)`.
    fn pochhammer(&self, u: u64) -> Self {
        let mut acc = Self::one();
        for i in 0..u {
            let f = self.clone() - Self::from_i64(i as i64);
            if f.is_zero() {
                return Self::zero();
            }
            acc = acc * f;
        }
        acc
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn as_integer(&self) -> Option<i64> {
        as_integer_c64(*self)
    }
    fn pochhammer(&self, u: u64) -> Self {
        if u <= 170 {
            let mut acc = Complex64::new(1.0, 0.0);
            for i in 0..u {
                let f = *self - i as f64;
                if f.re == 0.0 && f.im == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                acc *= f;
            }
            return acc;
        }
        // Long products: accumulate logarithms of the factors so the branch of
        // the total argument is the sum of the factor arguments.
        let mut log = Complex64::new(0.0, 0.0);
        for i in 0..u {
            let f = *self - i as f64;
            if f.re == 0.0 && f.im == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            log += f.ln();
        }
        log.exp()
    }
}

/// Integer test for floating complex values, with a relative tolerance.
pub fn as_integer_c64(z: Complex64) -> Option<i64> {
    let r = z.re.round();
    let scale = 1.0_f64.max(z.re.abs());
    if (z.re - r).abs() <= INTEGER_TOL * scale && z.im.abs() <= INTEGER_TOL * scale && r.abs() < 9.0e15 {
        Some(r as i64)
    } else {
        None
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn is_zero(&self) -> bool {
        <BigRational as Zero>::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }
}

/// Converts a rational to the nearest double, also when numerator and
/// denominator individually overflow `f64`.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let (n2, d2) = if shift > 0 {
        (n.clone(), d.clone() << (shift as usize))
    } else {
        (n.clone() << ((-shift) as usize), d.clone())
    };
    let head = BigRational::new(n2, d2).to_f64().unwrap_or(f64::NAN);
    head * 2f64.powi(shift as i32)
}

/// Exact rational approximation of a float, for feeding decimal parameters
/// such as `0.7` to the rational mode. Uses the shortest decimal expansion
/// that round-trips, so `0.7` becomes `7/10` rather than its binary value.
pub fn rational_from_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x:e}");
    let (mantissa, exp) = text.split_once('e')?;
    let exp: i32 = exp.parse().ok()?;
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let frac_len = mantissa.split_once('.').map(|(_, f)| f.len() as i32).unwrap_or(0);
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_len;
    let ten = BigRational::from_integer(BigInt::from(10));
    for _ in 0..scale.abs() {
        value = if scale > 0 { value * ten.clone() } else { value / ten.clone() };
    }
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rationals_are_short() {
        let q = rational_from_decimal(0.7).unwrap();
        assert_eq!(q, BigRational::new(7.into(), 10.into()));
        let q = rational_from_decimal(-2.5).unwrap();
        assert_eq!(q, BigRational::new((-5).into(), 2.into()));
        assert_eq!(rational_from_decimal(3.0).unwrap(), BigRational::from_i64(3));
    }

    #[test]
    fn integer_detection() {
        assert_eq!(as_integer_c64(Complex64::new(-3.0, 0.0)), Some(-3));
        assert_eq!(as_integer_c64(Complex64::new(2.5, 0.0)), None);
        assert_eq!(as_integer_c64(Complex64::new(2.0, 1e-3)), None);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(10).pow(400);
        let q = BigRational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&q) - 3.0).abs() < 1e-15);
    }
}
