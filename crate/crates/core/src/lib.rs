//! Exact and certified computation in James tree spaces over finite trees.
//!
//! The crate is generic over the scalar type ([`Scalar`]); the aliases below fix
//! the two instantiations used in practice: exact rationals for anything that
//! ends up in a certificate, and `f64` for solver-side work.

pub mod completion;
pub mod dual;
pub mod error;
pub mod norm;
pub mod probe;
pub mod sample;
pub mod scalar;
pub mod sigma_q;
pub mod tree;
pub mod vector;

pub use error::{Error, Result};
pub use norm::{family_value, norm_bruteforce, norm_dp, projection_pi_s, NormCertificate};
pub use scalar::{Rational, Scalar};
pub use tree::{NodeId, Segment, SegmentFamily, Tree};
pub use vector::{JtFunctional, JtVector};

/// Exact primal vector.
pub type RatVector = JtVector<Rational>;
/// Exact functional.
pub type RatFunctional = JtFunctional<Rational>;
/// Exact norm certificate.
pub type RatCertificate = NormCertificate<Rational>;
/// Floating-point primal vector.
pub type F64Vector = JtVector<f64>;
/// Floating-point functional.
pub type F64Functional = JtFunctional<f64>;
