//! Exact arithmetic in Q(λ_q) and the plane linear algebra built on it.

mod field;
mod linalg;
pub mod poly;

pub use poly::parse_rational;

pub use field::{lambda_f64, minimal_poly, FieldElement, HeckeField, Scalar};
pub use linalg::{dot, wedge, Mat2, Vec2};
