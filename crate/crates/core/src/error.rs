use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid tabulated potential: {0}")]
    InvalidTable(String),

    #[error("no classical turning points at E = {energy:e} J (energy above the barrier)")]
    NoTurningPoints { energy: f64 },

    #[error("classical turning point at x = {x:e} m (E - V = {gap:e} J)")]
    TurningPoint { x: f64, gap: f64 },

    #[error("no propagating channel at the domain edge x = {x:e} m (E = {energy:e} J, V = {potential:e} J)")]
    NoPropagatingChannel { x: f64, energy: f64, potential: f64 },

    #[error("vanishing wavenumber in segment {segment}")]
    ZeroWavenumber { segment: usize },

    #[error("adaptive quadrature did not converge on [{a:e}, {b:e}] (estimated error {error:e})")]
    QuadratureFailed { a: f64, b: f64, error: f64 },

    #[error("matrix chain overflowed at segment {segment}")]
    Overflow { segment: usize },

    #[error("M22 of the chain product vanishes; amplitude is undefined")]
    SingularChain,

    #[error("missing WKB phase data for the third-order boundary")]
    MissingPhase,

    #[error("polar amplitude collapsed at xbar = {xbar} (r = {r:e})")]
    AmplitudeCollapse { xbar: f64, r: f64 },

    #[error("no exact reference for potential `{name}`; supported: {supported}")]
    NoExactReference { name: String, supported: &'static str },

    #[error("all {failed} sweep points failed")]
    SweepFailed { failed: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path:?}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidTable(_)
                | Error::NoExactReference { .. }
                | Error::Config(_)
                | Error::Io { .. }
        )
    }
}
