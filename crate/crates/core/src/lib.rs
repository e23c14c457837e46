//! Polyhedral inner and outer approximations of recession cones of
//! spectrahedra and spectrahedral shadows.

// `!(a <= b)` is used on purpose so NaN takes the failing branch; index loops
// mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate openblas_src;

pub mod config;
pub mod conic;
mod error;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod polyhedral;
pub mod shadow;
pub mod spectra;
pub mod validation;

pub use config::ApproxConfig;
pub use error::{Assumption, Error, Result};
