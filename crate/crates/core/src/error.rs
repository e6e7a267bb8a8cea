use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Arguments are inconsistent with each other.
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate linkage: all couplings vanish")]
    DegenerateLinkage,
    /// A probability or derivative evaluation produced NaN or infinity.
    #[error("non-finite value at theta={theta}, area={area}, detuning={detuning}")]
    NonFinite { theta: f64, area: f64, detuning: f64 },
    #[error("integrator did not converge under step doubling: defect {defect:e} > {tolerance:e}")]
    Integrator { defect: f64, tolerance: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
