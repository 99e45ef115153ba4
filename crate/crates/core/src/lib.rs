//! Neumann-Poincare spectra and plasmon localization on closed surfaces in
//! three dimensions, computed with a collocation boundary-element method.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bem;
pub mod calr;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod pipeline;
pub mod plasmon;
pub mod spectrum;

pub use error::{Error, Result};
pub use spectrum::{almost_sure_fraction, solve_spectrum, weyl_constant, weyl_fit, Spectrum, WeylFit, WeylWindow};
