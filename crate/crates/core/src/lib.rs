//! Limiting Gaussian covariance structure of scaled truncated multi-overlaps in
//! the high-temperature Sherrington–Kirkpatrick model, together with an exact
//! small-N quenched Gibbs computation used to check it.
//!
//! The crate is organised in four layers:
//!
//! * [`moments`]: the fixed point `q2`, the moment table `q_p` and the scalar
//!   coefficient families derived from it.
//! * [`covariance`]: the limiting covariances `A_s(p, p~)` of the Gaussian
//!   family `{Y_{S,p}}`, multi-overlap covariances and Wick moments.
//! * [`skexact`]: exact enumeration of the Gibbs measure for one disorder
//!   sample and per-disorder expectations of truncated-overlap monomials.
//! * [`harness`]: disorder-averaged experiments, finite-size extrapolation and
//!   comparison against the theory.

pub mod covariance;
pub mod error;
pub mod harness;
pub mod moments;
pub mod skexact;

pub use error::{Error, Result};
