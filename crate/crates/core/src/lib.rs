//! Numerical engine for the induced Kahler metric on the total space of a
//! Hermitian holomorphic vector bundle.
//!
//! Given a base manifold with Kahler metric `g` and a bundle metric `G`, the
//! total space carries the (1,1)-form built from the pullback of the base form
//! plus the complex Hessian of the norm-square function. This crate computes
//! every tensor attached to that construction (Chern curvature, horizontal and
//! vertical metric blocks, curvature of the induced metric, Ricci forms,
//! primitives) on concrete model bundles, using truncated Taylor jets as the
//! sole differentiation mechanism, so that every identity can be checked to
//! machine precision without finite-difference tuning.
//!
//! Modules:
//! - [`jet`]: multivariate truncated Taylor arithmetic and Wirtinger
//!   derivative extraction;
//! - [`linalg`]: small dense complex Hermitian linear algebra (cyclic Jacobi
//!   eigensolver) and Gauss-Jordan over jet-valued matrices;
//! - [`dsl`]: the metric expression language, its parser and evaluators, and
//!   the JSON model-spec format;
//! - [`catalog`]: builtin model bundles and construction from spec files;
//! - [`geometry`]: the tensor operations and scalar utilities (Schwarzian
//!   derivative, genus bound arithmetic).

pub mod catalog;
pub mod dsl;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod rng;

pub use num_complex::Complex64;
