//! Transmission coefficients of 1-D potential barriers.
//!
//! Five solvers share the potentials in [`potential`]:
//!
//! * step-potential transfer matrices with plane-wave, first-order WKB or
//!   third-order WKB open boundaries ([`transfer`]);
//! * backward integration of the amplitude equation of the polar form
//!   `ψ = r e^{iθ}` with plane-wave or WKB boundary data ([`polar`]).
//!
//! Closed-form references and the WKB tunneling formula live in [`exact`];
//! sweeps and error statistics in [`experiments`].
// negated float comparisons are used on purpose so NaN falls into the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod matrix;
pub mod method;
pub mod polar;
pub mod potential;
pub mod quadrature;
pub mod transfer;
pub mod wkb;

pub use error::{Error, Result};
pub use method::{Method, TcResult};
pub use potential::{Domain, Potential};
