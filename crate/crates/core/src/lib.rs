//! Optimal-transport geometry on fermionic density matrices.
//!
//! The crate realises the Clifford algebra of `n` fermionic modes as
//! `2^n x 2^n` matrices and builds on it:
//!
//! * the fermionic differential calculus (`grad`, `div`, the number operator
//!   and the heat semigroup it generates), in [`clifford`];
//! * double and triple operator integrals with logarithmic-mean kernels, in
//!   [`operator_integral`] and [`rho`];
//! * the Riemannian metric for which the fermionic Fokker-Planck equation is
//!   the gradient flow of the entropy, with geodesics, distances and the
//!   entropy Hessian, in [`geometry`];
//! * closed forms for one and two modes, in [`lowdim`].
//!
//! ```
//! use fermi_ot::{clifford::CliffordContext, density::Density, geometry};
//!
//! let ctx = CliffordContext::new(1).unwrap();
//! let rho = Density::new(fermi_ot::clifford::Element::from_real_coeffs(&ctx, &[1.0, 0.5]).unwrap()).unwrap();
//! let s = geometry::entropy(&rho);
//! assert!(s > 0.0);
//! ```

// `!(x <= b)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clifford;
pub mod density;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod json;
pub mod lowdim;
pub mod means;
pub mod ode;
pub mod operator_integral;
pub mod quad;
pub mod report;
pub mod rho;
pub mod sampling;
pub mod spectral;

pub use clifford::{CliffordContext, Element, VectorField};
pub use density::{Density, StrictDensity};
pub use error::{Error, Result};
pub use rho::RhoCalculus;
pub use spectral::SpectralDecomp;
