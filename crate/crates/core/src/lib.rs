//! Composite pulse sequences for robust population transfer in V-shaped
//! (three-state) and Y-shaped (four-state) linkages.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`dynamics`]: Cayley–Klein parameters, closed-form single-pulse
//!   propagators for the V and Y systems and their composition.
//! * [`ms`]: Morris–Shore bright/dark bases for arbitrary star linkages,
//!   reduction to an effective two-state problem and reconstruction of the
//!   full propagator.
//! * [`solver`]: design of composite phases by nullifying the low-order
//!   Taylor coefficients of the transfer probability.
//! * [`oracle`]: a brute-force fixed-step integrator of the Schrödinger
//!   equation used as an independent reference.
//! * [`scan`]: robustness landscapes over mixing angle, pulse area and
//!   detuning.
//! * [`presets`]: the published phase sets.
//!
//! Angles are in radians and time is in units of the pulse duration unless
//! stated otherwise.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod linalg;
pub mod ms;
pub mod oracle;
pub mod presets;
pub mod scan;
pub mod sequence;
pub mod solver;
pub mod taylor;

pub use dynamics::{
    cayley_klein_rectangular, cayley_klein_resonant, compose, propagator_v, propagator_y,
    transition_probability, CayleyKlein, MixingAngles, PhaseVector, Propagator, System,
    ZetaPhase,
};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use sequence::{CompositeSequence, Envelope, OperatingPoint, PulseParams};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
