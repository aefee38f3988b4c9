use nalgebra::{DMatrix, SymmetricEigen};

use super::key::Monomial;
use super::model::CovarianceModel;
use crate::error::{Error, Result};

/// Eigenvalue floor for the positive-semidefinite check.
pub const PSD_TOLERANCE: f64 = 1e-10;

const MAX_WICK_DEGREE: usize = 16;

pub fn min_eigenvalue(cov: &DMatrix<f64>) -> f64 {
    if cov.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(cov.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Joint moment `E[prod_a Y_a^{exponents[a]}]` of a centred Gaussian vector
/// with covariance `cov`, as a sum over perfect matchings of the expanded
/// factor list.
pub fn wick_moment(cov: &DMatrix<f64>, exponents: &[u32]) -> Result<f64> {
    if !cov.is_square() || cov.nrows() != exponents.len() {
        return Err(Error::invalid(format!(
            "covariance is {}x{} but {} exponents were given",
            cov.nrows(),
            cov.ncols(),
            exponents.len()
        )));
    }
    let lambda_min = min_eigenvalue(cov);
    if lambda_min < -PSD_TOLERANCE {
        return Err(Error::ModelInconsistency {
            min_eigenvalue: lambda_min,
        });
    }
    let factors: Vec<usize> = exponents
        .iter()
        .enumerate()
        .flat_map(|(a, &k)| std::iter::repeat_n(a, k as usize))
        .collect();
    let k = factors.len();
    if k % 2 == 1 {
        return Ok(0.0);
    }
    if k > MAX_WICK_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: k,
            max: MAX_WICK_DEGREE,
        });
    }
    Ok(matching_sum(cov, &factors, (1u32 << k) - 1))
}

// `remaining` is a bitmask over positions in `factors`
fn matching_sum(cov: &DMatrix<f64>, factors: &[usize], remaining: u32) -> f64 {
    if remaining == 0 {
        return 1.0;
    }
    let first = remaining.trailing_zeros() as usize;
    let rest = remaining & !(1 << first);
    let mut total = 0.0;
    let mut others = rest;
    while others != 0 {
        let j = others.trailing_zeros() as usize;
        others &= others - 1;
        let c = cov[(factors[first], factors[j])];
        if c != 0.0 {
            total += c * matching_sum(cov, factors, rest & !(1 << j));
        }
    }
    total
}

/// Predicted limit of `N^{k/2} nu(monomial)`: the product over replica sets of
/// the Gaussian moments of each group.
pub fn joint_moment_prediction(m: &Monomial, model: &CovarianceModel) -> Result<f64> {
    let mut total = 1.0;
    for (_, group) in m.groups() {
        let degree: u32 = group.iter().map(|(_, e)| e).sum();
        if degree % 2 == 1 {
            return Ok(0.0);
        }
        let n = group.len();
        let mut cov = DMatrix::zeros(n, n);
        for (a, (ka, _)) in group.iter().enumerate() {
            for (b, (kb, _)) in group.iter().enumerate() {
                cov[(a, b)] = model.limit_cov(ka, kb)?;
            }
        }
        let exps: Vec<u32> = group.iter().map(|(_, e)| *e).collect();
        total *= wick_moment(&cov, &exps)?;
    }
    Ok(total)
}
