//! Collective decay of two distant two-level emitters coupled to a 1D waveguide,
//! with the retardation of the shared field kept exact.
//!
//! The central objects are the symmetric/antisymmetric amplitudes `c_±(t)` obeying
//! a linear delay differential equation, their exact piecewise (reflection) series,
//! the equivalent multi-branch Lambert-W mode expansion, and the emission spectra
//! built from the Fourier transforms of those amplitudes. A small circuit module
//! maps a Josephson-junction transmission line onto the dimensionless parameters.
//!
//! Conventions: unless a function says otherwise, time is in units of `1/γ`,
//! frequencies/detunings in units of `γ`, and the single-emitter rate is `γ = 1`.

pub mod cqed;
pub mod dde;
pub mod driven;
pub mod dynamics;
mod error;
pub mod lambert;
pub mod params;
mod series;
pub mod spectrum;

pub use error::{Error, Result};
pub use params::{InitialState, Parity, Sign, SystemParams};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;
