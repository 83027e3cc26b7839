//! Exact calculus of trace polynomials under the heat semigroup on `U(N)`
//! and `GL(N, ℂ)`, the large-N limit transforms built from it, and Monte
//! Carlo tools for checking those limits on sampled matrices.
//!
//! The algebraic core is generic over the coefficient ring through
//! [`Scalar`]; the aliases below fix the rings used in practice.

pub mod dense;
pub mod error;
pub mod exppoly;
pub mod heat;
pub mod lab;
pub mod monomial;
pub mod ops;
pub mod poly;
pub mod scalar;
pub mod series;
pub mod single_var;
pub mod tpoly;
pub mod validation;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use exppoly::ExpPoly;
pub use monomial::{grade_basis, partitions, TraceMonomial};
pub use ops::{apply_d, apply_d_tilde, apply_dn, apply_l, apply_t, operator_matrix, GradedOperatorMatrix, OperatorTag};
pub use poly::{cayley_hamilton_u2, TracePolynomial};
pub use scalar::{JsonCoeff, Rational, Scalar, ToComplex};
pub use single_var::{SingleVarPoly, Var};
pub use tpoly::TPoly;

pub type RationalTracePoly = TracePolynomial<Rational>;
pub type ComplexTracePoly = TracePolynomial<num_complex::Complex64>;
/// Trace polynomials whose coefficients are polynomials in `t`.
pub type TimeTracePoly = TracePolynomial<TPoly>;
