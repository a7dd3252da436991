//! Mie-scattering generalized eigenfunctions for Maxwell's equations in the
//! exterior of a perfectly conducting ball, and the frequency-localized
//! propagator kernel built from them.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: spherical Bessel/Hankel functions, Riccati derivatives,
//!   associated Legendre functions and real spherical harmonics.
//! * [`vsh`]: the three vector spherical harmonic families, sphere
//!   quadrature grids and inner products.
//! * [`mie`]: diagonal scattering coefficients of the conducting ball and
//!   the B-ratio bound sweep.
//! * [`field`]: modal synthesis of the incoming/outgoing series, the
//!   generalized eigenfunction, its magnetic field and residual checks.
//! * [`kernel`]: the smooth frequency cutoff, the propagator kernel by modal
//!   summation plus panel quadrature, and the time-decay sweep.
//! * [`cli`]: configuration parsing, CSV output and the verification suite
//!   behind the `mieprop` binary.

pub mod cli;
pub mod error;
pub mod field;
pub mod kernel;
pub mod mie;
pub mod quadrature;
pub mod sampling;
pub mod specfun;
pub mod summation;
pub mod vsh;

pub use error::{Error, Result};
pub use num_complex::Complex64;
