//! Bisection of a one-dimensional massive Fermi field into subsection mode
//! bases.
//!
//! * [`field`]: dispersion, spinors and plane-wave modes on a section and its halves
//! * [`bogoliubov`]: closed-form transform coefficients and their quadrature oracle
//! * [`spectrum`]: vacuum occupation spectra and Left/Right filling correlations
//! * [`fock`]: exact small Fock-space engine used as ground truth
//! * [`detector`]: oscillator (smeared) detector modes, overlaps and registration
//! * [`povm`]: joint probability tables for two measured subsystems
//! * [`verify`]: the invariant suite behind the `verify` command

pub mod bogoliubov;
pub mod detector;
pub mod error;
pub mod field;
pub mod fock;
pub mod povm;
pub mod quadrature;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
