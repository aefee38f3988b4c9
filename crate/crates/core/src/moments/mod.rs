//! Fixed point `q2`, moment table `q_p` and the derived coefficient families.
//!
//! All expectations over the standard Gaussian `Y` are evaluated with a
//! deterministic Gauss–Hermite rule, so every function here is pure.

mod coeffs;
mod params;
mod qtable;
mod quadrature;

pub use coeffs::{coeff_table, CoeffTable, KappaVariant, PhiVariant, Variants};
pub use params::{ModelParams, ParamPolicy, DEFAULT_BETA_GUARD};
pub use qtable::{fixed_point_map, q_table, solve_q2, QTable, DEFAULT_P_MAX, DEFAULT_SOLVER_TOL};
pub use quadrature::{hermite_rule, QuadratureRule, DEFAULT_QUADRATURE_ORDER};
