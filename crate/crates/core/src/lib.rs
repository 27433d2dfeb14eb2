//! Fourier analysis on finite product probability spaces, noisy inner
//! products under pairwise-independent column laws, and numerical
//! certificates for the correlation bounds satisfied by low-degree functions.

pub mod error;
pub mod spaces;
pub mod fourier;
pub mod correlation;
pub mod gowers;
pub mod certify;
pub mod extract;
pub mod experiment;

pub use error::{Error, Result};
