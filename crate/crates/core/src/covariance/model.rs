use serde::Serialize;

use super::key::OverlapKey;
use crate::error::{Error, Result};
use crate::moments::{coeff_table, q_table, CoeffTable, ModelParams, QTable, QuadratureRule, Variants};

/// Relative raw asymmetry above which a record is flagged.
pub const ASYMMETRY_FLAG: f64 = 1e-6;

/// Moment-table order needed for lookups with `p, p~ <= max_p` and
/// `|S| <= max_s`.
pub fn required_q_order(max_p: usize, max_s: usize) -> usize {
    2 * max_p + (2 * max_s).max(4)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `A_s(p, p~) = sum_l C(s, l) (-1)^l q_{p + p~ + 2l}` for `s >= 3`.
pub fn a_high(s: usize, p: usize, pt: usize, q: &QTable) -> Result<f64> {
    if s < 3 {
        return Err(Error::invalid(format!("a_high needs |S| >= 3, got {s}")));
    }
    let mut acc = 0.0;
    for l in 0..=s {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(s, l) * q.get(p + pt + 2 * l)?;
    }
    Ok(acc)
}

/// `A_2(p, p~) = rho_{p+p~} + b^2 rho_p rho_p~ + b^4 rho_p rho_p~ rho_0 / (1 - b^2 rho_0)`.
pub fn a_two(p: usize, pt: usize, coeffs: &CoeffTable, params: &ModelParams) -> Result<f64> {
    let b2 = params.beta2();
    let rho0 = coeffs.rho(0)?;
    let denom = 1.0 - b2 * rho0;
    if denom <= 0.0 {
        return Err(Error::ModelConstruction(format!(
            "1 - beta^2 rho_0 = {denom:e} is not positive"
        )));
    }
    let (rp, rpt) = (coeffs.rho(p)?, coeffs.rho(pt)?);
    Ok(coeffs.rho(p + pt)? + b2 * rp * rpt + b2 * b2 * rp * rpt * rho0 / denom)
}

/// Raw (pre-symmetrisation) discrepancy of a recursion-defined entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryRecord {
    pub s: usize,
    pub p: usize,
    pub pt: usize,
    pub forward: f64,
    pub backward: f64,
    pub abs_diff: f64,
    pub relative: f64,
    pub flagged: bool,
}

/// Limiting covariances of `sqrt(N) T_{S,p}`, stored free of any `1/N`.
///
/// Immutable after construction; the two linear solves (`A_1(1,1)` and
/// `A_0(2,2)`) are done once.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceModel {
    pub params: ModelParams,
    pub q: QTable,
    #[serde(skip)]
    pub coeffs: CoeffTable,
    pub variants: Variants,
    /// `A_1(1, 1)`
    pub a_one_seed: f64,
    /// `A_0(2, 2)`
    pub a_zero_seed: f64,
    pub asymmetry_log: Vec<AsymmetryRecord>,
    a_two_00: f64,
}

impl CovarianceModel {
    pub fn new(
        params: ModelParams,
        rule: &QuadratureRule,
        variants: Variants,
        q_order: usize,
    ) -> Result<Self> {
        let q = q_table(&params, rule, q_order.max(8))?;
        let coeffs = coeff_table(&q, variants)?;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: CoeffTable) -> Result<Self> {
        let q = coeffs.q.clone();
        let params = q.params;
        let b2 = params.beta2();
        let a_two_00 = a_two(0, 0, &coeffs, &params)?;

        let pi1 = coeffs.pi(1)?;
        let d1 = 1.0 - b2 * coeffs.phi(1)?;
        if d1 <= 0.0 {
            return Err(Error::ModelConstruction(format!(
                "1 - beta^2 phi_1 = {d1:e} is not positive"
            )));
        }
        let a_one_seed = (pi1 + b2 * pi1 * a_two_00) / d1;

        let d0 = 1.0 - b2 * coeffs.lambda(2)?;
        if d0 <= 0.0 {
            return Err(Error::ModelConstruction(format!(
                "1 - beta^2 lambda_2 = {d0:e} is not positive"
            )));
        }
        let q2 = q.q2;
        let a_zero_seed = ((q.get(4)? - q2 * q2)
            + b2 * coeffs.kappa(2, 2)? * a_one_seed
            + b2 * coeffs.omega(2, 2)? * a_two_00)
            / d0;
        if !(a_one_seed.is_finite() && a_zero_seed.is_finite()) {
            return Err(Error::ModelConstruction("non-finite recursion seed".into()));
        }

        let mut model = CovarianceModel {
            params,
            variants: coeffs.variants,
            q,
            coeffs,
            a_one_seed,
            a_zero_seed,
            asymmetry_log: Vec::new(),
            a_two_00,
        };
        model.asymmetry_log = model.build_asymmetry_log()?;
        Ok(model)
    }

    fn build_asymmetry_log(&self) -> Result<Vec<AsymmetryRecord>> {
        let lp = 4.min(self.q.p_max.saturating_sub(4) / 2);
        let mut log = Vec::new();
        for s in [1usize, 0] {
            for p in 0..=lp {
                for pt in (p + 1)..=lp {
                    let (forward, backward) = if s == 1 {
                        (self.a_one_raw(p, pt)?, self.a_one_raw(pt, p)?)
                    } else {
                        (self.a_zero_raw(p, pt)?, self.a_zero_raw(pt, p)?)
                    };
                    let abs_diff = (forward - backward).abs();
                    let scale = forward.abs().max(backward.abs());
                    let relative = if scale > 0.0 { abs_diff / scale } else { 0.0 };
                    log.push(AsymmetryRecord {
                        s,
                        p,
                        pt,
                        forward,
                        backward,
                        abs_diff,
                        relative,
                        flagged: relative > ASYMMETRY_FLAG,
                    });
                }
            }
        }
        Ok(log)
    }

    pub fn beta2(&self) -> f64 {
        self.params.beta2()
    }

    pub fn a_two(&self, p: usize, pt: usize) -> Result<f64> {
        if p == 0 && pt == 0 {
            return Ok(self.a_two_00);
        }
        a_two(p, pt, &self.coeffs, &self.params)
    }

    /// `A_1(x, 1)`, the second stage of the `|S| = 1` solve.
    fn a_one_col1(&self, x: usize) -> Result<f64> {
        if x == 1 {
            return Ok(self.a_one_seed);
        }
        let b2 = self.beta2();
        let c = &self.coeffs;
        let pi_x = c.pi(x as i64)?;
        Ok(pi_x + b2 * c.phi(x)? * self.a_one_seed + b2 * pi_x * self.a_two_00)
    }

    /// `A_1(p, p~)` straight from the recursion, before symmetrisation.
    pub fn a_one_raw(&self, p: usize, pt: usize) -> Result<f64> {
        let b2 = self.beta2();
        let c = &self.coeffs;
        let mut v = c.pi(p as i64 + pt as i64 - 1)?;
        let phi = c.phi(p)?;
        if phi != 0.0 {
            v += b2 * phi * self.a_one_col1(pt)?;
        }
        let pi_p = c.pi(p as i64)?;
        if pt > 0 && pi_p != 0.0 {
            v += b2 * pt as f64 * pi_p * self.a_two(pt - 1, 0)?;
        }
        Ok(v)
    }

    /// `A_0(x, 2)`, the second stage of the `|S| = 0` solve.
    fn a_zero_col2(&self, x: usize) -> Result<f64> {
        match x {
            0 => Ok(0.0),
            2 => Ok(self.a_zero_seed),
            _ => {
                let b2 = self.beta2();
                let c = &self.coeffs;
                let q2 = self.q.q2;
                Ok((self.q.get(x + 2)? - self.q.get(x)? * q2)
                    + b2 * c.lambda(x)? * self.a_zero_seed
                    + b2 * c.kappa(x, 2)? * self.a_one_seed
                    + b2 * c.omega(x, 2)? * self.a_two_00)
            }
        }
    }

    /// `A_0(p, p~)` straight from the recursion, before symmetrisation.
    pub fn a_zero_raw(&self, p: usize, pt: usize) -> Result<f64> {
        if p == 0 || pt == 0 {
            return Ok(0.0);
        }
        let b2 = self.beta2();
        let c = &self.coeffs;
        let mut v = self.q.get(p + pt)? - self.q.get(p)? * self.q.get(pt)?;
        let lambda = c.lambda(p)?;
        if lambda != 0.0 {
            v += b2 * lambda * self.a_zero_col2(pt)?;
        }
        let kappa = c.kappa(p, pt)?;
        if kappa != 0.0 {
            v += b2 * kappa * self.a_one_col1(pt - 1)?;
        }
        let omega = c.omega(p, pt)?;
        if pt >= 2 && omega != 0.0 {
            v += b2 * omega * self.a_two(pt - 2, 0)?;
        }
        Ok(v)
    }

    pub fn a_one(&self, p: usize, pt: usize) -> Result<f64> {
        if p == pt {
            return self.a_one_raw(p, p);
        }
        Ok(0.5 * (self.a_one_raw(p, pt)? + self.a_one_raw(pt, p)?))
    }

    pub fn a_zero(&self, p: usize, pt: usize) -> Result<f64> {
        if p == pt {
            return self.a_zero_raw(p, p);
        }
        Ok(0.5 * (self.a_zero_raw(p, pt)? + self.a_zero_raw(pt, p)?))
    }

    /// Symmetrised `A_s(p, p~)`.
    pub fn lookup(&self, s: usize, p: usize, pt: usize) -> Result<f64> {
        match s {
            0 => self.a_zero(p, pt),
            1 => self.a_one(p, pt),
            2 => self.a_two(p, pt),
            _ => a_high(s, p, pt, &self.q),
        }
    }

    /// Limiting covariance of `sqrt(N) T_{S,p}` and `sqrt(N) T_{S~,p~}`.
    pub fn limit_cov(&self, k1: &OverlapKey, k2: &OverlapKey) -> Result<f64> {
        if k1.set() != k2.set() {
            return Ok(0.0);
        }
        self.lookup(k1.size(), k1.p() as usize, k2.p() as usize)
    }

    /// Limiting covariance of `sqrt(N)(R_S - q_|S|)` and
    /// `sqrt(N)(R_S~ - q_|S~|)`, summed over common subsets of `S` and `S~`.
    pub fn multioverlap_cov(&self, s1: &[u32], s2: &[u32]) -> Result<f64> {
        let k1 = OverlapKey::new(s1.iter().copied(), 0)?;
        let k2 = OverlapKey::new(s2.iter().copied(), 0)?;
        if k1.size() == 0 || k2.size() == 0 {
            return Err(Error::invalid("multi-overlap subsets must be nonempty"));
        }
        let common: Vec<u32> = k1
            .set()
            .iter()
            .copied()
            .filter(|l| k2.set().contains(l))
            .collect();
        let mut total = 0.0;
        for mask in 0u32..(1 << common.len()) {
            let size = mask.count_ones() as usize;
            total += self.lookup(size, k1.size() - size, k2.size() - size)?;
        }
        Ok(total)
    }

    pub fn flagged_asymmetries(&self) -> impl Iterator<Item = &AsymmetryRecord> {
        self.asymmetry_log.iter().filter(|r| r.flagged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{hermite_rule, KappaVariant, PhiVariant, DEFAULT_QUADRATURE_ORDER};

    fn model(beta: f64, h: f64) -> CovarianceModel {
        let rule = hermite_rule(DEFAULT_QUADRATURE_ORDER).unwrap();
        CovarianceModel::new(
            ModelParams::new(beta, h).unwrap(),
            &rule,
            Variants::default(),
            required_q_order(6, 4),
        )
        .unwrap()
    }

    #[test]
    fn beta_zero_closed_forms() {
        let m = model(0.0, 0.3);
        let t = 0.3f64.tanh();
        let s = 1.0 - t * t;
        for p in 0..=4usize {
            for pt in 0..=4usize {
                let tp = t.powi((p + pt) as i32);
                assert!((m.lookup(2, p, pt).unwrap() - tp * s * s).abs() < 1e-12);
                assert!((m.lookup(1, p, pt).unwrap() - tp * s).abs() < 1e-12);
                assert!(m.lookup(0, p, pt).unwrap().abs() < 1e-12);
                assert!((m.lookup(3, p, pt).unwrap() - tp * s * s * s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn a_high_depends_on_sum() {
        let m = model(0.15, 0.3);
        assert_eq!(a_high(3, 0, 2, &m.q).unwrap(), a_high(3, 2, 0, &m.q).unwrap());
        assert!(a_high(2, 0, 0, &m.q).is_err());
        assert!(a_high(3, 20, 20, &m.q).is_err());
    }

    #[test]
    fn a_two_geometric_identity() {
        let m = model(0.15, 0.3);
        let b2 = m.beta2();
        let rho0 = m.coeffs.rho(0).unwrap();
        for p in 0..=4 {
            for pt in 0..=4 {
                let rp = m.coeffs.rho(p).unwrap();
                let rpt = m.coeffs.rho(pt).unwrap();
                let resummed = m.coeffs.rho(p + pt).unwrap() + b2 * rp * rpt / (1.0 - b2 * rho0);
                assert!((m.a_two(p, pt).unwrap() - resummed).abs() < 1e-12);
            }
        }
        assert!((m.a_two(0, 0).unwrap() - rho0 / (1.0 - b2 * rho0)).abs() < 1e-12);
    }

    #[test]
    fn seeds_solve_their_linear_equations() {
        let m = model(0.2, 0.4);
        assert!((m.a_one_raw(1, 1).unwrap() - m.a_one_seed).abs() < 1e-15);
        assert!((m.a_zero_raw(2, 2).unwrap() - m.a_zero_seed).abs() < 1e-14);
    }

    #[test]
    fn zero_index_entries_vanish() {
        let m = model(0.15, 0.3);
        for p in 0..=4 {
            assert_eq!(m.a_zero(0, p).unwrap(), 0.0);
            assert_eq!(m.a_zero(p, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn lookups_are_symmetric() {
        let m = model(0.2, 0.3);
        for s in 0..=4 {
            for p in 0..=5 {
                for pt in 0..=5 {
                    assert_eq!(m.lookup(s, p, pt).unwrap(), m.lookup(s, pt, p).unwrap());
                }
            }
        }
    }

    #[test]
    fn distinct_sets_are_uncorrelated() {
        let m = model(0.15, 0.3);
        let a = OverlapKey::new([1, 2], 0).unwrap();
        let b = OverlapKey::new([1, 3], 0).unwrap();
        assert_eq!(m.limit_cov(&a, &b).unwrap(), 0.0);
        let rho0 = m.coeffs.rho(0).unwrap();
        let want = rho0 / (1.0 - m.beta2() * rho0);
        assert!((m.limit_cov(&a, &a).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn multioverlap_cov_examples() {
        let m = model(0.15, 0.3);
        assert_eq!(m.multioverlap_cov(&[1, 2], &[3, 4]).unwrap(), m.a_zero(2, 2).unwrap());
        let want = m.a_two(0, 0).unwrap() + 2.0 * m.a_one(1, 1).unwrap() + m.a_zero(2, 2).unwrap();
        assert!((m.multioverlap_cov(&[1, 2], &[1, 2]).unwrap() - want).abs() < 1e-15);
        let m0 = model(0.0, 0.3);
        let t = 0.3f64.tanh();
        assert!((m0.multioverlap_cov(&[1], &[1]).unwrap() - (1.0 - t * t)).abs() < 1e-12);
        assert!(m.multioverlap_cov(&[], &[1]).is_err());
    }

    #[test]
    fn continuity_at_small_beta() {
        let m0 = model(0.0, 0.3);
        let m = model(1e-4, 0.3);
        for s in 0..=4 {
            for p in 0..=4 {
                for pt in 0..=4 {
                    let d = (m.lookup(s, p, pt).unwrap() - m0.lookup(s, p, pt).unwrap()).abs();
                    assert!(d < 1e-3, "s={s} p={p} pt={pt}: {d}");
                }
            }
        }
    }

    #[test]
    fn asymmetry_log_covers_recursive_cases() {
        let m = model(0.15, 0.3);
        assert_eq!(m.asymmetry_log.len(), 2 * 10);
        assert!(m.asymmetry_log.iter().all(|r| r.s <= 1 && r.p < r.pt));
    }

    #[test]
    fn variants_change_only_disputed_entries() {
        let rule = hermite_rule(DEFAULT_QUADRATURE_ORDER).unwrap();
        let params = ModelParams::new(0.2, 0.3).unwrap();
        let build = |kappa, phi| {
            CovarianceModel::new(params, &rule, Variants { kappa, phi }, 16).unwrap()
        };
        let a = build(KappaVariant::Proof, PhiVariant::Definition);
        let b = build(KappaVariant::Statement, PhiVariant::Definition);
        let c = build(KappaVariant::Proof, PhiVariant::Statement);
        assert_eq!(a.a_one(1, 1).unwrap(), b.a_one(1, 1).unwrap());
        assert_eq!(a.a_one(1, 1).unwrap(), c.a_one(1, 1).unwrap());
        assert_ne!(a.a_zero(2, 2).unwrap(), b.a_zero(2, 2).unwrap());
        assert_ne!(a.a_one(2, 1).unwrap(), c.a_one(2, 1).unwrap());
    }

    #[test]
    fn degenerate_denominator_fails() {
        let rule = hermite_rule(DEFAULT_QUADRATURE_ORDER).unwrap();
        // rho_0 = 1 at h = 0, so 1 - beta^2 rho_0 <= 0 once beta >= 1
        let params = ModelParams::new(1.0, 0.0).unwrap();
        let err = CovarianceModel::new(params, &rule, Variants::default(), 12).unwrap_err();
        assert!(matches!(err, Error::ModelConstruction(_)), "{err}");
    }
}
