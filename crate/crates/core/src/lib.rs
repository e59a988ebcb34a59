//! Spin chains engineered for perfect quantum state transfer, and their
//! robustness against static coupling disorder.
//!
//! The pipeline runs: [`spectra`] generates a spectrum and makes it
//! commensurate. [`inverse_eigen`] reconstructs the couplings from it,
//! [`design`] normalises the chain, [`dynamics`] evolves it, [`disorder`]
//! averages over random coupling errors, and [`analysis`] extracts the
//! localisation and read-out window diagnostics.

pub mod analysis;
pub mod design;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod inverse_eigen;
pub mod spectra;
mod tridiag;

pub use error::{Error, Result};
