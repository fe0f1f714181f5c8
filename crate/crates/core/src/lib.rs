//! Numerical and exact tools for the dynamics of rational maps of the
//! Riemann sphere: periodic spectra, exceptional families, homoclinic
//! asymptotics, horseshoe spectra and degenerating families.

pub mod algebra;
pub mod cer;
pub mod degeneration;
pub mod error;
pub mod exceptional;
pub mod homoclinic;
pub mod periodic;
pub mod ratmap;

pub use error::{Error, Result};
