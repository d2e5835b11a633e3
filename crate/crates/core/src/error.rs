use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must have leading entry 1, found {0}")]
    NotLeadingOne(i64),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
    #[error("Pochhammer denominator vanishes")]
    DenominatorVanishes,
    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: i64, bound: i64 },
    #[error("x0 base exponent is not 0 or an x0 offset is negative")]
    NonIntegralX0Exponent,
    #[error("variable {0} is zero but carries a non-positive-integer exponent")]
    ZeroBaseWithFractionalExponent(usize),
    #[error("cycle index p={p} outside 1..={b}")]
    BadP { p: i64, b: i64 },
    #[error("integrand does not decay along ray at angle {angle}")]
    NotRapidDecay { angle: f64 },
    #[error("adaptive quadrature did not converge (error {error:e}, value {value:e})")]
    QuadratureNoConvergence { value: f64, error: f64 },
    #[error("omega_p^a = -1 (p={p}, a={a}, b={b}): sector is empty")]
    HalfTurn { p: i64, a: i64, b: i64 },
    #[error("Gamma function pole at {0}")]
    GammaPole(f64),
    #[error("argument {0} of x_1 is outside (pi/2, 3pi/2)")]
    WrongSector(f64),
    #[error("k={k} is below k_min={k_min}")]
    TooSmallK { k: i64, k_min: i64 },
    #[error("sin pole: (beta - b j)/a is an integer")]
    SinPole,
    #[error("coefficient ratios depend on m (spread {spread:e})")]
    InconsistentRatios { spread: f64 },
    #[error("beta={0} lies in the semigroup generated by A")]
    BetaInNA(i64),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of an analytic precondition (decay, sector, poles)
    /// as opposed to malformed input.
    pub fn is_analytic(&self) -> bool {
        matches!(
            self,
            Error::NotRapidDecay { .. }
                | Error::QuadratureNoConvergence { .. }
                | Error::HalfTurn { .. }
                | Error::GammaPole(_)
                | Error::WrongSector(_)
                | Error::TooSmallK { .. }
                | Error::SinPole
                | Error::InconsistentRatios { .. }
                | Error::BetaInNA(_)
                | Error::DenominatorVanishes
                | Error::ZeroBaseWithFractionalExponent(_)
        )
    }
}
