//! The Clifford algebra of `n` fermionic modes and its differential calculus.

mod calculus;
mod context;
mod element;
mod field;

pub use calculus::TRACE_ZERO_TOL;
pub use context::{CliffordContext, DEFAULT_MAX_MODES};
pub use element::Element;
pub use field::VectorField;
