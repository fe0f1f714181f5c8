//! Scalars, polynomials, root finding and resultants.

pub mod complex;
pub mod gauss;
pub mod poly;
pub mod resultant;
pub mod roots;
pub mod scalar;

pub use complex::BigComplex;
pub use gauss::{gaussian_gcd, GaussRational};
pub use poly::Poly;
pub use resultant::{determinant, homogeneous_resultant, resultant, solve};
pub use roots::{poly_roots, poly_roots_scalar, RootCluster};
pub use scalar::{Field, Scalar, ScalarMode};
