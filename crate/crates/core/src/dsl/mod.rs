//! Metric expression DSL: grammar, jet/complex evaluators, and the JSON
//! model-spec format.
//!
//! Expressions are functions of the base coordinates `z1..zn` and their
//! conjugates only, never of fiber variables; the engine builds the fiber
//! dependence `G(z, v) = G_{ij}(z) v^i conj(v^j)` itself, keeping it exactly
//! quadratic.

pub mod eval;
pub mod parse;
pub mod spec;

pub use eval::{coordinate_env, eval_complex, eval_jet, EvalError};
pub use parse::{parse, BinOp, Expr, ParseError, UnaryOp};
pub use spec::{DomainSpec, MetricSpec, ParsedSpec, SpecError};
