use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::as_integer_c64;

/// A complex number kept as modulus and a continuous argument. Non-integer
/// powers use this argument, so the branch is part of the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorPoint {
    pub modulus: f64,
    pub arg: f64,
}

impl SectorPoint {
    pub fn new(modulus: f64, arg: f64) -> Result<Self> {
        if !(modulus >= 0.0) || !modulus.is_finite() || !arg.is_finite() {
            return Err(Error::Invalid(format!("bad sector point {modulus}@{arg}")));
        }
        Ok(SectorPoint { modulus, arg })
    }

    pub const fn zero() -> Self {
        SectorPoint { modulus: 0.0, arg: 0.0 }
    }

    /// Principal-argument representation of `z`.
    pub fn from_complex(z: Complex64) -> Self {
        SectorPoint { modulus: z.norm(), arg: z.arg() }
    }

    pub fn is_zero(&self) -> bool {
        self.modulus == 0.0
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.arg)
    }

    /// `ln|z| + i arg z` on the carried branch.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.modulus.ln(), self.arg)
    }

    pub fn pow(&self, c: Complex64) -> Result<Complex64> {
        if self.modulus == 0.0 {
            if c.re == 0.0 && c.im == 0.0 {
                return Ok(Complex64::new(1.0, 0.0));
            }
            return match as_integer_c64(c) {
                Some(n) if n > 0 => Ok(Complex64::new(0.0, 0.0)),
                _ => Err(Error::ZeroBaseWithFractionalExponent(0)),
            };
        }
        if let Some(n) = as_integer_c64(c) {
            if n.abs() < 64 && c.im == 0.0 && c.re == n as f64 {
                return Ok(Complex64::from_polar(self.modulus.powi(n as i32), self.arg * n as f64));
            }
        }
        Ok((c * self.ln()).exp())
    }

    pub fn scale(&self, s: f64) -> Self {
        SectorPoint { modulus: self.modulus * s, arg: self.arg }
    }

    pub fn rotate(&self, theta: f64) -> Self {
        SectorPoint { modulus: self.modulus, arg: self.arg + theta }
    }

    pub fn mul(&self, other: &SectorPoint) -> Self {
        SectorPoint { modulus: self.modulus * other.modulus, arg: self.arg + other.arg }
    }
}

impl fmt::Display for SectorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.modulus, self.arg)
    }
}

/// Parses `mod@arg`; the argument accepts a trailing `pi` multiplier such
/// as `1pi`, `-0.5pi` or plain `pi`, optionally over a divisor (`4pi/3`).
impl FromStr for SectorPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (m, a) = s
            .split_once('@')
            .ok_or_else(|| Error::Invalid(format!("expected mod@arg, got {s:?}")))?;
        let modulus: f64 = m.trim().parse().map_err(|_| Error::Invalid(format!("bad modulus {m:?}")))?;
        let arg = parse_angle(a)?;
        SectorPoint::new(modulus, arg)
    }
}

pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Invalid(format!("bad angle {text:?}"));
    if let Some((num, den)) = t.split_once('/') {
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        return Ok(parse_angle(num)? / d);
    }
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*');
        let factor = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(factor * PI)
    } else {
        t.parse::<f64>().map_err(|_| bad())
    }
}
