#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical toolkit for α-modulation spaces and intrinsically localized
//! Gabor-wavelet frames on uniform periodic grids.

pub mod atoms;
pub mod error;
pub mod frame;
pub mod gramian;
pub mod bapu;
pub mod covering;
pub mod decay;
pub mod signal;
pub mod spaces;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
