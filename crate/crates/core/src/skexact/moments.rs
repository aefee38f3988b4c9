use std::collections::BTreeMap;

use super::summary::GibbsSummary;
use super::symmetric::{symmetric3, symmetric4};
use crate::covariance::{Monomial, OverlapKey};
use crate::error::{Error, Result};
use crate::moments::QTable;

pub const MAX_MONOMIAL_DEGREE: usize = 4;

/// Central spin correlations `E[prod (sigma_a - m_a)]` of one sample.
#[derive(Debug, Clone)]
pub struct CentralTensors {
    pub n_sites: usize,
    pub order: usize,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub c3: Option<Vec<f64>>,
    pub c4: Option<Vec<f64>>,
}

impl CentralTensors {
    pub fn from_summary(s: &GibbsSummary) -> Self {
        let n = s.n_sites;
        let m = &s.m;
        let p = &s.pair;
        let mut u = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                u[i * n + j] = p[i * n + j] - m[i] * m[j];
            }
        }
        let c3 = s.triple.as_ref().map(|t| {
            let t3 = |a: usize, b: usize, c: usize| t[(a * n + b) * n + c];
            let p2 = |a: usize, b: usize| p[a * n + b];
            symmetric3(n, |i, j, k| {
                t3(i, j, k) - m[i] * p2(j, k) - m[j] * p2(i, k) - m[k] * p2(i, j)
                    + 2.0 * m[i] * m[j] * m[k]
            })
        });
        let c4 = match (&s.triple, &s.quad) {
            (Some(t), Some(q)) => {
                let t3 = |a: usize, b: usize, c: usize| t[(a * n + b) * n + c];
                let p2 = |a: usize, b: usize| p[a * n + b];
                Some(symmetric4(n, |i, j, k, l| {
                    q[((i * n + j) * n + k) * n + l]
                        - m[i] * t3(j, k, l)
                        - m[j] * t3(i, k, l)
                        - m[k] * t3(i, j, l)
                        - m[l] * t3(i, j, k)
                        + m[i] * m[j] * p2(k, l)
                        + m[i] * m[k] * p2(j, l)
                        + m[i] * m[l] * p2(j, k)
                        + m[j] * m[k] * p2(i, l)
                        + m[j] * m[l] * p2(i, k)
                        + m[k] * m[l] * p2(i, j)
                        - 3.0 * m[i] * m[j] * m[k] * m[l]
                }))
            }
            _ => None,
        };
        CentralTensors {
            n_sites: n,
            order: s.order,
            m: m.clone(),
            u,
            c3,
            c4,
        }
    }

    fn mpow(&self, p: u32) -> Vec<f64> {
        self.m.iter().map(|x| x.powi(p as i32)).collect()
    }

    fn central_flat(&self, order: usize, index: usize) -> f64 {
        match order {
            2 => self.u[index],
            3 => self.c3.as_ref().expect("order checked")[index],
            _ => self.c4.as_ref().expect("order checked")[index],
        }
    }

    fn central(&self, sites: &[usize]) -> f64 {
        let n = self.n_sites;
        match sites.len() {
            2 => self.u[sites[0] * n + sites[1]],
            3 => self.c3.as_ref().expect("order checked")[(sites[0] * n + sites[1]) * n + sites[2]],
            4 => {
                self.c4.as_ref().expect("order checked")
                    [((sites[0] * n + sites[1]) * n + sites[2]) * n + sites[3]]
            }
            _ => unreachable!("replica multiplicity outside 2..=4"),
        }
    }
}

fn replica_positions(mono: &Monomial) -> BTreeMap<u32, usize> {
    let mut count = BTreeMap::new();
    for key in mono.expanded() {
        for &label in key.set() {
            *count.entry(label).or_insert(0) += 1;
        }
    }
    count
}

/// True when some replica appears in exactly one factor, which makes the
/// Gibbs expectation zero for every disorder sample.
pub fn vanishes_identically(mono: &Monomial) -> bool {
    replica_positions(mono).values().any(|&c| c == 1)
}

/// Correlation order needed to evaluate `mono` (at least 2).
pub fn required_order(mono: &Monomial) -> usize {
    replica_positions(mono).values().copied().max().unwrap_or(0).max(2)
}

/// `(1/N) sum_i m_i^p - q_p`, the value of `T_{empty,p}`.
pub fn empty_key_value(t: &CentralTensors, p: u32, q: &QTable) -> Result<f64> {
    let mean = t.mpow(p).iter().sum::<f64>() / t.n_sites as f64;
    Ok(mean - q.get(p as usize)?)
}

/// Gibbs expectation of `T_{S,p} T_{S~,p~}` for one disorder sample.
pub fn truncated_pair_moment(
    t: &CentralTensors,
    k1: &OverlapKey,
    k2: &OverlapKey,
    q: &QTable,
) -> Result<f64> {
    let (k1, k2) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
    match (k1.size(), k2.size()) {
        (0, 0) => Ok(empty_key_value(t, k1.p(), q)? * empty_key_value(t, k2.p(), q)?),
        (0, _) | (_, 0) => Ok(0.0),
        _ if k1.set() != k2.set() => Ok(0.0),
        _ => {
            let n = t.n_sites;
            let a = t.mpow(k1.p());
            let b = t.mpow(k2.p());
            let s = k1.size();
            let mut sum = 0.0;
            for (ai, urow) in a.iter().zip(t.u.chunks_exact(n)) {
                for (bj, &uij) in b.iter().zip(urow) {
                    let mut v = ai * bj;
                    for _ in 0..s {
                        v *= uij;
                    }
                    sum += v;
                }
            }
            Ok(sum / (n * n) as f64)
        }
    }
}

/// Gibbs expectation of a product of truncated overlaps for one disorder
/// sample, degree at most [`MAX_MONOMIAL_DEGREE`].
///
/// Each replica contributes the central correlation of the sites of the
/// factors it appears in; a replica appearing in a single factor makes the
/// whole expectation vanish.
pub fn truncated_monomial_moment(t: &CentralTensors, mono: &Monomial, q: &QTable) -> Result<f64> {
    let degree = mono.degree();
    if degree == 0 {
        return Err(Error::invalid("monomial has degree 0"));
    }
    if degree > MAX_MONOMIAL_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree,
            max: MAX_MONOMIAL_DEGREE,
        });
    }
    let mut scalar = 1.0;
    let mut factors = Vec::new();
    for key in mono.expanded() {
        if key.size() == 0 {
            scalar *= empty_key_value(t, key.p(), q)?;
        } else {
            factors.push(key);
        }
    }
    let mut replicas: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (pos, key) in factors.iter().enumerate() {
        for &label in key.set() {
            replicas.entry(label).or_default().push(pos);
        }
    }
    let mut positions = Vec::with_capacity(replicas.len());
    for (label, pos) in replicas {
        if pos.len() == 1 {
            return Ok(0.0);
        }
        if pos.len() > t.order {
            return Err(Error::invalid(format!(
                "replica {label} appears in {} factors; needs order-{} correlations, summary has order {}",
                pos.len(),
                pos.len(),
                t.order
            )));
        }
        positions.push(pos);
    }
    let r = factors.len();
    if r == 0 {
        return Ok(scalar);
    }
    // factors with p = 0 carry unit weights and are skipped
    let weights: Vec<(usize, Vec<f64>)> = factors
        .iter()
        .enumerate()
        .filter(|(_, k)| k.p() > 0)
        .map(|(a, k)| (a, t.mpow(k.p())))
        .collect();
    let n = t.n_sites;
    // replicas present in every factor read the tensor at the tuple's own index
    let full: Vec<bool> = positions.iter().map(|p| p.len() == r).collect();
    let mut sites = vec![0usize; r];
    let mut buf = [0usize; MAX_MONOMIAL_DEGREE];
    let mut sum = 0.0;
    let mut linear = 0usize;
    'outer: loop {
        let mut v = 1.0;
        for (a, w) in &weights {
            v *= w[sites[*a]];
        }
        for (pos, &all) in positions.iter().zip(&full) {
            if all {
                v *= t.central_flat(r, linear);
            } else {
                for (b, &a) in buf.iter_mut().zip(pos) {
                    *b = sites[a];
                }
                v *= t.central(&buf[..pos.len()]);
            }
        }
        sum += v;
        linear += 1;
        let mut d = r;
        loop {
            if d == 0 {
                break 'outer;
            }
            d -= 1;
            sites[d] += 1;
            if sites[d] < n {
                break;
            }
            sites[d] = 0;
        }
    }
    Ok(scalar * (sum / (n as f64).powi(r as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{hermite_rule, q_table, ModelParams};
    use crate::skexact::{gibbs_correlations, sample_disorder, GibbsOptions};

    fn setup(n: usize, order: usize) -> (GibbsSummary, CentralTensors, QTable) {
        let p = ModelParams::new(0.9, 0.25).unwrap();
        let d = sample_disorder(n, 17, 4).unwrap();
        let o = GibbsOptions {
            order,
            keep_weights: true,
            ..Default::default()
        };
        let s = gibbs_correlations(&d, p, o).unwrap();
        let t = CentralTensors::from_summary(&s);
        let q = q_table(&p, &hermite_rule(61).unwrap(), 12).unwrap();
        (s, t, q)
    }

    fn key(labels: &[u32], p: u32) -> OverlapKey {
        OverlapKey::new(labels.iter().copied(), p).unwrap()
    }

    /// Explicit sum over all replica configurations.
    fn brute(s: &GibbsSummary, mono: &Monomial, q: &QTable) -> f64 {
        let n = s.n_sites;
        let w = s.config_weights.as_ref().unwrap();
        let labels: Vec<u32> = {
            let mut v: Vec<u32> = mono.expanded().iter().flat_map(|k| k.set().to_vec()).collect();
            v.sort();
            v.dedup();
            v
        };
        let k = labels.len();
        let size = 1usize << n;
        let mut total = 0.0;
        let mut idx = vec![0usize; k];
        loop {
            let mut weight = 1.0;
            for &c in &idx {
                weight *= w[c];
            }
            let mut prod = 1.0;
            for key in mono.expanded() {
                let mut t = 0.0;
                for i in 0..n {
                    let mut v = s.m[i].powi(key.p() as i32);
                    for l in key.set() {
                        let c = idx[labels.iter().position(|x| x == l).unwrap()];
                        let sigma = if c >> i & 1 == 1 { -1.0 } else { 1.0 };
                        v *= sigma - s.m[i];
                    }
                    t += v;
                }
                t /= n as f64;
                if key.size() == 0 {
                    t -= q.get(key.p() as usize).unwrap();
                }
                prod *= t;
            }
            total += weight * prod;
            let mut d = 0;
            loop {
                if d == k {
                    return total;
                }
                idx[d] += 1;
                if idx[d] < size {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    #[test]
    fn central_pair_is_connected_correlation() {
        let (s, t, _) = setup(7, 2);
        for i in 0..7 {
            assert!((t.u[i * 7 + i] - (1.0 - s.m[i] * s.m[i])).abs() < 1e-15);
            for j in 0..7 {
                assert_eq!(t.u[i * 7 + j], t.u[j * 7 + i]);
            }
        }
    }

    #[test]
    fn monomials_match_replica_enumeration() {
        let (s, t, q) = setup(4, 4);
        let cases = vec![
            Monomial::new().times(key(&[1, 2], 0), 2),
            Monomial::new().times(key(&[1, 2], 1), 1).times(key(&[1, 2], 0), 1),
            Monomial::new().times(key(&[1, 2, 3], 0), 2),
            Monomial::new().times(key(&[1], 1), 2),
            Monomial::new().times(key(&[1], 2), 1).times(key(&[1], 1), 1),
            Monomial::new().times(key(&[], 2), 2),
            Monomial::new().times(key(&[], 2), 1).times(key(&[], 3), 1),
            Monomial::new().times(key(&[1, 2], 0), 4),
            Monomial::new()
                .times(key(&[1, 2], 0), 1)
                .times(key(&[1, 3], 0), 1)
                .times(key(&[2, 3], 0), 1),
            Monomial::new().times(key(&[1], 0), 3),
            Monomial::new().times(key(&[1], 1), 2).times(key(&[], 2), 1),
            Monomial::new().times(key(&[1, 2], 1), 3),
        ];
        for mono in cases {
            let fast = truncated_monomial_moment(&t, &mono, &q).unwrap();
            let slow = brute(&s, &mono, &q);
            assert!((fast - slow).abs() < 1e-13, "{mono}: {fast} vs {slow}");
        }
    }

    #[test]
    fn degree_two_equals_pair_moment() {
        let (_, t, q) = setup(8, 2);
        let keys = [key(&[], 2), key(&[], 3), key(&[1], 1), key(&[1], 2), key(&[1, 2], 0), key(&[1, 2], 3), key(&[2, 3], 0)];
        for a in &keys {
            for b in &keys {
                let mono = Monomial::new().times(a.clone(), 1).times(b.clone(), 1);
                let m = truncated_monomial_moment(&t, &mono, &q).unwrap();
                let p = truncated_pair_moment(&t, a, b, &q).unwrap();
                assert_eq!(m, p, "{a} {b}");
            }
        }
    }

    #[test]
    fn single_appearance_vanishes() {
        let (_, t, q) = setup(5, 2);
        let mono = Monomial::new().times(key(&[1, 2], 0), 1).times(key(&[1, 3], 0), 1);
        assert_eq!(truncated_monomial_moment(&t, &mono, &q).unwrap(), 0.0);
    }

    #[test]
    fn triangle_is_trace_of_u_cubed() {
        let (_, t, q) = setup(9, 2);
        let mono = Monomial::new()
            .times(key(&[1, 2], 0), 1)
            .times(key(&[1, 3], 0), 1)
            .times(key(&[2, 3], 0), 1);
        let n = 9;
        let u = nalgebra::DMatrix::from_row_slice(n, n, &t.u);
        let tr = (&u * &u * &u).trace() / (n * n * n) as f64;
        let v = truncated_monomial_moment(&t, &mono, &q).unwrap();
        assert!((v - tr).abs() < 1e-14);
    }

    #[test]
    fn order_and_degree_limits() {
        let (_, t, q) = setup(5, 2);
        let quartic = Monomial::new().times(key(&[1, 2], 0), 4);
        assert!(truncated_monomial_moment(&t, &quartic, &q).is_err());
        let quintic = Monomial::new().times(key(&[1, 2], 0), 5);
        assert!(matches!(
            truncated_monomial_moment(&t, &quintic, &q),
            Err(Error::UnsupportedDegree { degree: 5, max: 4 })
        ));
    }
}
