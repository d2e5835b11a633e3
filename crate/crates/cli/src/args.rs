use std::path::PathBuf;

use clap::{Parser, Subcommand};
use gkz_core::sector::parse_angle;
use gkz_core::SectorPoint;
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(name = "gkz", version, about = "Gevrey solutions and exponential integrals of one-row GKZ systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Matrix entries, comma separated (e.g. `2,3` or `1,4,6`).
    #[arg(long = "A", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<i64>>,

    /// Parameter β as `re`, `re+im i`, `im i` or `mod@arg`.
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub beta: Option<Complex64>,

    /// Series index j.
    #[arg(long, global = true)]
    pub j: Option<i64>,

    /// Cycle index p of C_p.
    #[arg(long, global = true)]
    pub p: Option<i64>,

    /// Root order of a tilde cycle; must match the matrix (1, ka, kb).
    #[arg(long, global = true)]
    pub k: Option<i64>,

    /// Component r of a tilde cycle.
    #[arg(long, global = true)]
    pub r: Option<i64>,

    /// Radius of the small arc.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub eps: f64,

    /// Rotation of the cycle, in radians or as a multiple of `pi`.
    #[arg(long, global = true, value_parser = parse_theta, allow_hyphen_values = true)]
    pub theta: Option<f64>,

    /// Truncation order, or the largest k of a coefficient table.
    #[arg(long = "N", global = true)]
    pub n: Option<i64>,

    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,

    /// Point value `mod@arg`, one per variable; repeat the flag.
    #[arg(long = "x", global = true, value_parser = parse_point, allow_hyphen_values = true)]
    pub x: Vec<SectorPoint>,

    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Run on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build ψ^{(j)} (two entries) or φ^{(j)} (leading entry 1).
    Series,
    /// Integrate along C_p, its rotation, or a tilde cycle.
    Integral,
    /// Expansion coefficients c_k with closed forms where available.
    Expansion,
    /// The decomposition matrix and its determinant identity.
    Decompose,
    /// The restriction morphism from (1, ka, kb) to (a, b).
    Restrict,
    /// Run an acceptance suite, or `all`.
    Verify { suite: String },
}

pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.contains('@') {
        return s.parse::<SectorPoint>().map(|p| p.value()).map_err(|e| e.to_string());
    }
    let bad = || format!("cannot parse {text:?} as a complex number");
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return num(&s).map(|re| Complex64::new(re, 0.0));
    };
    // The split is the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        t => num(t.trim_end_matches('*')),
    };
    match split {
        Some(i) => Ok(Complex64::new(num(&body[..i])?, imag(&body[i..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

fn parse_point(text: &str) -> Result<SectorPoint, String> {
    text.parse().map_err(|e: gkz_core::Error| e.to_string())
}

fn parse_theta(text: &str) -> Result<f64, String> {
    parse_angle(text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.3").unwrap(), Complex64::new(0.3, 0.0));
        assert_eq!(parse_complex("-0.7+0.2i").unwrap(), Complex64::new(-0.7, 0.2));
        assert_eq!(parse_complex("-0.7 + 0.2 i").unwrap(), Complex64::new(-0.7, 0.2));
        assert_eq!(parse_complex("1e-3-2i").unwrap(), Complex64::new(1e-3, -2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), Complex64::new(0.0, 2.5));
        let z = parse_complex("2@0.5pi").unwrap();
        assert!((z - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+").is_err());
    }
}
