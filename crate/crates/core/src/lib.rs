//! Exact computations on Hermitian polar spaces and the Ree-Tits octagon
//! O(2): oppositeness matrices, their p-ranks, association-scheme
//! invariants, partial-spread and partial-ovoid bounds, and an exact
//! maximum-clique solver.

pub mod arith;
pub mod bounds;
pub mod clique;
pub mod field;
pub mod hermitian;
pub mod incidence;
pub mod matfile;
pub mod matrix;
pub mod modrank;
pub mod scheme;

pub use field::{Field, FieldElement, FieldError};
pub use matrix::{BitMatrix, IntMatrix};
