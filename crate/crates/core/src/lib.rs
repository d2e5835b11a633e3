//! GKZ hypergeometric systems for a single-row matrix `A = (1, a_1, …, a_n)`
//! in the monomial-integral representation: Γ-series solutions, the
//! operators that annihilate them, contour integrals and their asymptotic
//! expansion coefficients, and the restriction to sub-matrices.

pub mod contour;
pub mod error;
pub mod expansion;
pub mod gamma_series;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod regularized;
pub mod restriction;
pub mod scalar;
pub mod sector;
pub mod series;
pub mod special;
pub mod verify;

pub use contour::{Cycle, PathSegment};
pub use error::{Error, Result};
pub use lattice::OneRowMatrix;
pub use par::Exec;
pub use sector::SectorPoint;
pub use series::FractionalSeries;
