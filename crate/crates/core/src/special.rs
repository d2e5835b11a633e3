//! Complex Gamma function (Lanczos, g = 7, nine coefficients) and factorials.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::as_integer_c64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_pole(z: Complex64) -> Result<()> {
    if let Some(n) = as_integer_c64(z) {
        if n <= 0 {
            return Err(Error::GammaPole(z.re));
        }
    }
    Ok(())
}

/// A logarithm of Γ(z). Only `exp` of the result is meaningful: the imaginary
/// part is not the continuous branch of log Γ.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    Ok(ln_gamma_unchecked(z))
}

fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection: Γ(z) Γ(1-z) = π / sin(πz).
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_unchecked(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Ok(PI / (s * ln_gamma_unchecked(1.0 - z).exp()));
    }
    Ok(ln_gamma_unchecked(z).exp())
}

/// Γ(z + n) / Γ(z) for an integer shift `n` of either sign, as a finite
/// product. Errors when the quotient is infinite.
pub fn gamma_shift_ratio(z: Complex64, n: i64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    if n >= 0 {
        for i in 0..n {
            acc *= z + i as f64;
        }
    } else {
        for i in 1..=(-n) {
            let f = z - i as f64;
            if f.norm() == 0.0 {
                return Err(Error::GammaPole(f.re));
            }
            acc /= f;
        }
    }
    Ok(acc)
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn ln_factorial(n: u64) -> f64 {
    if n <= 170 {
        factorial(n).ln()
    } else {
        ln_gamma_unchecked(Complex64::new(n as f64 + 1.0, 0.0)).re
    }
}
