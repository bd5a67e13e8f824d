//! Monolithic phase-field fracture with slack-variable irreversibility.
//!
//! The crack-irreversibility inequality `φ ≥ ⁿφ` is rewritten as the equality
//! `θ² = φ − ⁿφ` with a slack field `θ`, and enforced either with a Lagrange
//! multiplier field `Λ` or with a quadratic penalty. Displacements, phase
//! field, slack and multiplier are solved together by Newton's method.
//!
//! Kernels are generic over [`scalar::Real`]; the aliases below fix `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the element formulas
#![allow(clippy::needless_range_loop)]

pub mod benchmarks;
pub mod error;
pub mod fem;
pub mod io;
pub mod material;
pub mod mesh;
pub mod scalar;
pub mod selfcheck;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use fem::Formulation;

pub type Tensor2 = tensor::Tensor2s<f64>;
pub type Lame = tensor::LameParams<f64>;
pub type Model = material::PhaseFieldModel<f64>;
pub type Bulk = fem::BulkMaterial<f64>;
