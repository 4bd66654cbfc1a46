//! Localization of generalized wavelet transforms.
//!
//! The crate models signals on sampled spaces, the four built-in transforms
//! (finite STFT, 1D wavelet, Shearlet and the finite wavelet transform over a
//! prime field), their canonical observables, global uncertainties and the
//! ambiguity-function decay bounds that follow from them.

// Validation writes `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod cli;
pub mod error;
pub mod groups;
pub mod io;
pub mod observables;
pub mod spaces;
pub mod transforms;
pub mod uncertainty;
pub mod window_design;
pub mod windows;

pub use error::{Error, Result};
