//! Exact design polynomial systems in the `f` and `k` unknowns.

mod matrix;
mod poly;
mod spec;
mod system;

pub use matrix::{build_b, build_b_inverse, RationalMatrix};
pub use poly::{parse_rational, rational_to_string, to_f64, Monomial, Rational, RationalPolynomial};
pub use spec::{default_alpha, inverse_target_sum, DesignSpec};
pub use system::{elementary_symmetric, system_f, system_k, FloatSystem, Formulation, PolySystem};
