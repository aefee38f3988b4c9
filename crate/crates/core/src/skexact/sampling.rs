use rand::Rng;

use super::summary::GibbsSummary;
use crate::error::{Error, Result};

/// Inverse-CDF sampler over the configurations of one sample.
#[derive(Debug, Clone)]
pub struct ReplicaSampler {
    n_sites: usize,
    cdf: Vec<f64>,
}

impl ReplicaSampler {
    pub fn new(summary: &GibbsSummary) -> Result<Self> {
        let w = summary.config_weights.as_ref().ok_or_else(|| {
            Error::InvalidState("replica sampling needs a summary built with keep_weights".into())
        })?;
        let mut acc = 0.0;
        let cdf = w
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        Ok(ReplicaSampler {
            n_sites: summary.n_sites,
            cdf,
        })
    }

    /// Configuration index of one replica.
    pub fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cdf.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// Overlap `(1/N) sum_i sigma_i sigma'_i` of two configuration indices.
    pub fn overlap(&self, a: usize, b: usize) -> f64 {
        let differ = ((a ^ b) & ((1usize << self.n_sites) - 1)).count_ones() as f64;
        1.0 - 2.0 * differ / self.n_sites as f64
    }
}

/// Draws `count` i.i.d. replicas as spin vectors.
pub fn sample_replicas(
    summary: &GibbsSummary,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<i8>>> {
    let sampler = ReplicaSampler::new(summary)?;
    Ok((0..count).map(|_| summary.spins(sampler.draw(rng))).collect())
}

/// Empirical `<exp(t N (R_12 - q2)^2)>` over `pairs` independent replica
/// pairs, one value per entry of `t_values`.
pub fn overlap_tail_statistic(
    summary: &GibbsSummary,
    q2: f64,
    t_values: &[f64],
    pairs: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if pairs == 0 {
        return Err(Error::invalid("tail statistic needs at least one replica pair"));
    }
    let sampler = ReplicaSampler::new(summary)?;
    let n = summary.n_sites as f64;
    let mut acc = vec![0.0; t_values.len()];
    for _ in 0..pairs {
        let a = sampler.draw(rng);
        let b = sampler.draw(rng);
        let d = sampler.overlap(a, b) - q2;
        for (s, t) in acc.iter_mut().zip(t_values) {
            *s += (t * n * d * d).exp();
        }
    }
    Ok(acc.into_iter().map(|s| s / pairs as f64).collect())
}
