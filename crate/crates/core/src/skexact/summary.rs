use serde::{Deserialize, Serialize};

use super::disorder::{DisorderSample, MAX_SITES_HIGH_ORDER};
use super::enumerate::enumerate;
use super::symmetric::{symmetric3, symmetric4};
use crate::error::{Error, Result};
use crate::moments::ModelParams;

/// Which Hamiltonian the enumeration uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FieldMode {
    /// Full SK model.
    #[default]
    Sk,
    /// Couplings switched off; spins are independent with `<sigma_i> = tanh h`.
    IndependentField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsOptions {
    /// Highest raw-moment order stored (2, 3 or 4).
    pub order: usize,
    /// Keep the normalized weight of every configuration (needed for sampling).
    pub keep_weights: bool,
    pub field_mode: FieldMode,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            order: 2,
            keep_weights: false,
            field_mode: FieldMode::Sk,
        }
    }
}

/// Exact Gibbs moments of one disorder sample.
///
/// Tensors are dense and row-major with every index combination filled,
/// coincident indices reduced through `sigma_i^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSummary {
    pub n_sites: usize,
    pub params: ModelParams,
    pub order: usize,
    pub seed: u64,
    pub sample_index: u64,
    pub m: Vec<f64>,
    pub pair: Vec<f64>,
    pub triple: Option<Vec<f64>>,
    pub quad: Option<Vec<f64>>,
    pub log_z: f64,
    /// Normalized weights indexed by configuration; bit `i` set means `sigma_i = -1`.
    pub config_weights: Option<Vec<f64>>,
}

impl GibbsSummary {
    pub fn pair_at(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.n_sites + j]
    }

    /// Spin vector of configuration `index`.
    pub fn spins(&self, index: usize) -> Vec<i8> {
        (0..self.n_sites)
            .map(|i| if index >> i & 1 == 1 { -1 } else { 1 })
            .collect()
    }
}

/// Enumerates all `2^N` configurations of `disorder` at `params`.
pub fn gibbs_correlations(
    disorder: &DisorderSample,
    params: ModelParams,
    options: GibbsOptions,
) -> Result<GibbsSummary> {
    let n = disorder.n_sites;
    if !(2..=4).contains(&options.order) {
        return Err(Error::invalid(format!(
            "correlation order must be 2, 3 or 4, got {}",
            options.order
        )));
    }
    if options.order > 2 && n > MAX_SITES_HIGH_ORDER {
        return Err(Error::invalid(format!(
            "order {} correlations are limited to n_sites <= {MAX_SITES_HIGH_ORDER}, got {n}",
            options.order
        )));
    }
    let mut j = vec![0.0; n * n];
    if options.field_mode == FieldMode::Sk {
        let scale = params.beta / (n as f64).sqrt();
        for a in 0..n {
            for b in 0..n {
                j[a * n + b] = scale * disorder.coupling(a, b);
            }
        }
    }
    let e = enumerate(n, &j, params.h, options.order, options.keep_weights)?;

    let m: Vec<f64> = (0..n).map(|i| e.raw(1 << i)).collect();
    let mut pair = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            pair[a * n + b] = e.raw((1u64 << a) ^ (1u64 << b));
        }
    }
    let bit = |i: usize| 1u64 << i;
    let triple = (options.order >= 3)
        .then(|| symmetric3(n, |a, b, c| e.raw(bit(a) ^ bit(b) ^ bit(c))));
    let quad = (options.order >= 4)
        .then(|| symmetric4(n, |a, b, c, d| e.raw(bit(a) ^ bit(b) ^ bit(c) ^ bit(d))));
    Ok(GibbsSummary {
        n_sites: n,
        params,
        order: options.order,
        seed: disorder.seed,
        sample_index: disorder.sample_index,
        m,
        pair,
        triple,
        quad,
        log_z: e.log_z,
        config_weights: e.weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skexact::sample_disorder;

    /// Direct sum over configurations, no tricks.
    fn naive(d: &DisorderSample, p: ModelParams) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64) {
        let n = d.n_sites;
        let scale = p.beta / (n as f64).sqrt();
        let energies: Vec<f64> = (0..1usize << n)
            .map(|c| {
                let s: Vec<f64> = (0..n).map(|i| if c >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
                let mut e = p.h * s.iter().sum::<f64>();
                for i in 0..n {
                    for k in (i + 1)..n {
                        e += scale * d.coupling(i, k) * s[i] * s[k];
                    }
                }
                e
            })
            .collect();
        let emax = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = energies.iter().map(|e| (e - emax).exp()).collect();
        let z: f64 = w.iter().sum();
        let sp = |c: usize, i: usize| if c >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut m = vec![0.0; n];
        let mut pair = vec![0.0; n * n];
        let mut tri = vec![0.0; n * n * n];
        let mut quad = vec![0.0; n * n * n * n];
        for (c, wc) in w.iter().enumerate() {
            let wc = wc / z;
            for a in 0..n {
                m[a] += wc * sp(c, a);
                for b in 0..n {
                    pair[a * n + b] += wc * sp(c, a) * sp(c, b);
                    for e in 0..n {
                        tri[(a * n + b) * n + e] += wc * sp(c, a) * sp(c, b) * sp(c, e);
                        for f in 0..n {
                            quad[((a * n + b) * n + e) * n + f] +=
                                wc * sp(c, a) * sp(c, b) * sp(c, e) * sp(c, f);
                        }
                    }
                }
            }
        }
        (m, pair, tri, quad, z.ln() + emax)
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn matches_naive_enumeration() {
        for n in [2, 3, 4, 5, 7, 8, 10] {
            for (beta, h) in [(0.15, 0.3), (0.9, 0.1), (2.5, 0.0)] {
                let p = ModelParams::new(beta, h).unwrap();
                let d = sample_disorder(n, 42, n as u64).unwrap();
                let opts = GibbsOptions {
                    order: 4,
                    keep_weights: true,
                    ..Default::default()
                };
                let s = gibbs_correlations(&d, p, opts).unwrap();
                let (m, pair, tri, quad, lz) = naive(&d, p);
                assert!(max_diff(&s.m, &m) < 1e-12, "n={n} beta={beta}");
                assert!(max_diff(&s.pair, &pair) < 1e-12);
                assert!(max_diff(s.triple.as_ref().unwrap(), &tri) < 1e-12);
                assert!(max_diff(s.quad.as_ref().unwrap(), &quad) < 1e-12);
                assert!((s.log_z - lz).abs() < 1e-10 * lz.abs().max(1.0));
                let w = s.config_weights.as_ref().unwrap();
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_site_hand_check() {
        // H = J s1 s2 + h (s1 + s2) with J = beta g / sqrt 2
        let d = DisorderSample::from_couplings(2, vec![0.7]).unwrap();
        let p = ModelParams::new(0.5, 0.2).unwrap();
        let s = gibbs_correlations(&d, p, GibbsOptions::default()).unwrap();
        let j = 0.5 * 0.7 / 2f64.sqrt();
        let (wpp, wmm, wpm) = ((j + 0.4f64).exp(), (j - 0.4f64).exp(), (-j).exp());
        let z = wpp + wmm + 2.0 * wpm;
        assert!((s.m[0] - (wpp - wmm) / z).abs() < 1e-15);
        assert!((s.m[1] - (wpp - wmm) / z).abs() < 1e-15);
        assert!((s.pair_at(0, 1) - (wpp + wmm - 2.0 * wpm) / z).abs() < 1e-15);
        assert!((s.log_z - z.ln()).abs() < 1e-14);
        assert_eq!(s.pair_at(0, 0), 1.0);
    }

    #[test]
    fn independent_field_anchor() {
        let d = sample_disorder(9, 3, 0).unwrap();
        let p = ModelParams::new(0.8, 0.3).unwrap();
        let opts = GibbsOptions {
            order: 3,
            field_mode: FieldMode::IndependentField,
            ..Default::default()
        };
        let s = gibbs_correlations(&d, p, opts).unwrap();
        let t = 0.3f64.tanh();
        for i in 0..9 {
            assert!((s.m[i] - t).abs() < 1e-14);
            for k in 0..9 {
                let want = if i == k { 1.0 } else { t * t };
                assert!((s.pair_at(i, k) - want).abs() < 1e-14);
            }
        }
        assert!((s.log_z - 9.0 * (2.0 * 0.3f64.cosh()).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_spin_flip_symmetry() {
        let d = sample_disorder(11, 5, 2).unwrap();
        let p = ModelParams::new(1.3, 0.0).unwrap();
        let opts = GibbsOptions {
            order: 3,
            ..Default::default()
        };
        let s = gibbs_correlations(&d, p, opts).unwrap();
        assert!(s.m.iter().all(|x| x.abs() < 1e-13));
        assert!(s.triple.unwrap().iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn rejects_bad_order_and_size() {
        let d = sample_disorder(4, 0, 0).unwrap();
        let p = ModelParams::new(0.1, 0.1).unwrap();
        for order in [1, 5] {
            let o = GibbsOptions {
                order,
                ..Default::default()
            };
            assert!(gibbs_correlations(&d, p, o).is_err());
        }
        let d = sample_disorder(21, 0, 0).unwrap();
        let o = GibbsOptions {
            order: 3,
            ..Default::default()
        };
        assert!(gibbs_correlations(&d, p, o).is_err());
    }

    #[test]
    fn extreme_couplings_stay_finite() {
        let d = DisorderSample::from_couplings(3, vec![400.0, -350.0, 500.0]).unwrap();
        let p = ModelParams::new(5.0, 3.0).unwrap();
        let s = gibbs_correlations(&d, p, GibbsOptions::default()).unwrap();
        assert!(s.log_z.is_finite());
        assert!(s.m.iter().all(|x| x.is_finite() && x.abs() <= 1.0 + 1e-12));
    }
}
