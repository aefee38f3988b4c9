//! Limiting covariances of the Gaussian family `{Y_{S,p}}` and the joint
//! moments they predict.

mod export;
mod key;
mod model;
mod wick;

pub use export::{covariance_csv, covariance_json, multioverlap_matrix, CovarianceExport};
pub use key::{Monomial, OverlapKey};
pub use model::{a_high, a_two, required_q_order, AsymmetryRecord, CovarianceModel, ASYMMETRY_FLAG};
pub use wick::{joint_moment_prediction, min_eigenvalue, wick_moment, PSD_TOLERANCE};
