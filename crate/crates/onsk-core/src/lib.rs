//! Exact verification toolkit for q-boson matrix-product reflection K matrices
//! and Onsager-algebra spin chains.

pub mod error;
pub mod field;
pub mod kmatrix;
pub mod linalg;
pub mod onsager;
pub mod qboson;
pub mod report;
pub mod sample;
pub mod sp4;
pub mod spectra;
pub mod suites;
pub mod spinrep;

pub use error::{Error, Result};
pub use field::{make_params, unit_circle_point, Field, Gaussian, Params, Rational, Scalar};

/// Sparse operator on `(C^2)^{⊗n}` over the ground field.
pub type Operator = linalg::Op<Scalar>;
