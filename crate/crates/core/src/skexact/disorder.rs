use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::{stream, StreamPurpose};
use crate::error::{Error, Result};

pub const MAX_SITES: usize = 24;
/// Cap when third- or fourth-order correlation tensors are requested.
pub const MAX_SITES_HIGH_ORDER: usize = 20;

/// Couplings `g_ij` (i < j) of one disorder sample, stored row-major over the
/// strict upper triangle. The `1/sqrt(N)` scaling is applied at energy
/// evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    pub n_sites: usize,
    pub couplings: Vec<f64>,
    pub seed: u64,
    pub sample_index: u64,
}

impl DisorderSample {
    /// Builds a sample from explicit couplings (row-major strict upper triangle).
    pub fn from_couplings(n_sites: usize, couplings: Vec<f64>) -> Result<Self> {
        check_sites(n_sites)?;
        if couplings.len() != n_sites * (n_sites - 1) / 2 {
            return Err(Error::invalid(format!(
                "{n_sites} sites need {} couplings, got {}",
                n_sites * (n_sites - 1) / 2,
                couplings.len()
            )));
        }
        Ok(DisorderSample {
            n_sites,
            couplings,
            seed: 0,
            sample_index: 0,
        })
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n_sites - i - 1) / 2 + (j - i - 1)
    }

    /// `g_ij` for `i != j`, zero on the diagonal.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.couplings[self.index(i, j)]
        }
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if !(2..=MAX_SITES).contains(&n_sites) {
        return Err(Error::invalid(format!(
            "n_sites must be in 2..={MAX_SITES}, got {n_sites}"
        )));
    }
    Ok(())
}

/// Draws i.i.d. standard Gaussian couplings determined by
/// `(seed, n_sites, sample_index)`.
pub fn sample_disorder(n_sites: usize, seed: u64, sample_index: u64) -> Result<DisorderSample> {
    check_sites(n_sites)?;
    let count = n_sites * (n_sites - 1) / 2;
    let couplings = stream(seed, n_sites, sample_index, StreamPurpose::Couplings)
        .sample_iter(StandardNormal)
        .take(count)
        .collect();
    Ok(DisorderSample {
        n_sites,
        couplings,
        seed,
        sample_index,
    })
}
