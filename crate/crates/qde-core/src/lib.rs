//! Exact computation with finite-dimensional quiver algebras: presentations,
//! concrete algebras and modules, bounded complexes of projectives up to
//! homotopy, and constructions that patch tilting complexes over pullback
//! (Milnor) squares of algebra surjections.
//!
//! Everything is deterministic: fixed basis orders, canonical echelon forms,
//! and seeded search wherever sampling is involved.

pub mod algebra;
pub mod complex;
pub mod construct;
pub mod error;
pub mod fixtures;
pub mod matrix;
pub mod module;
pub mod parse;
pub mod quiver;
pub mod scalar;

pub use error::{QdeError, Result};
pub use scalar::{FieldTag, Scalar};
