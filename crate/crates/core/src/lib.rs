//! Exact and numerical machinery for multiple t-values: basis enumeration,
//! the stuffle algebra, rigorous arbitrary-precision evaluation, and
//! integer-relation detection.

pub mod algebra;
pub mod approx;
pub mod eval;
pub mod index;
pub mod relations;

pub use algebra::{Atom, Combo, Monomial, Rat};
pub use approx::BigApprox;
pub use eval::{EvalConfig, Evaluator};
pub use index::Index;
