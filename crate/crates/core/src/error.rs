use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what}: no convergence (reached {achieved:.3e}, required {required:.3e})")]
    NoConvergence {
        what: &'static str,
        achieved: f64,
        required: f64,
    },

    #[error("Lambert W branch {branch} at z = {z}: {reason}")]
    LambertBranch {
        branch: i32,
        z: Complex64,
        reason: &'static str,
    },

    /// An amplitude in a denominator dropped below the pole guard.
    #[error("amplitude magnitude {magnitude:.3e} at t = {t} is below the pole guard 1e-12")]
    AmplitudePole { t: f64, magnitude: f64 },

    #[error("frequency {omega:.6e} rad/s outside the waveguide band (edge {band_edge:.6e} rad/s)")]
    OutsideBand { omega: f64, band_edge: f64 },

    #[error("{0}")]
    Unsupported(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
