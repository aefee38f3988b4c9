use serde::{Deserialize, Serialize};

use super::qtable::QTable;
use crate::error::{Error, Result};

/// Two transcriptions of the `kappa_{p,p~}` coefficient exist; they differ
/// only in the factor multiplying `p p~`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KappaVariant {
    /// `p p~ (q_p - q_{p+2})`
    Statement,
    /// `p p~ (q_p - q_p q_2)`, the form obtained by collecting terms.
    #[default]
    Proof,
}

/// Coefficient multiplying `A_1(p~, 1)` in the `|S| = 1` recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhiVariant {
    /// `phi_p = p pi_{p-2} - 3 pi_p`
    #[default]
    Definition,
    /// `p pi_{p-2} - (p + 2) pi_p`
    Statement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct Variants {
    pub kappa: KappaVariant,
    pub phi: PhiVariant,
}

impl KappaVariant {
    pub const ALL: [KappaVariant; 2] = [KappaVariant::Statement, KappaVariant::Proof];

    pub fn name(self) -> &'static str {
        match self {
            KappaVariant::Statement => "statement",
            KappaVariant::Proof => "proof",
        }
    }
}

impl PhiVariant {
    pub const ALL: [PhiVariant; 2] = [PhiVariant::Definition, PhiVariant::Statement];

    pub fn name(self) -> &'static str {
        match self {
            PhiVariant::Definition => "definition",
            PhiVariant::Statement => "statement",
        }
    }
}

/// Scalar coefficient families built from a [`QTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffTable {
    pub q: QTable,
    pub variants: Variants,
    /// `rho_p` for `p = 0..=p_max-4`.
    pub rho: Vec<f64>,
    /// `pi_p` for `p = -1..=p_max-3`, stored at index `p + 1`.
    pub pi: Vec<f64>,
    /// `phi_p` for `p = 0..=p_max-3` under `variants.phi`.
    pub phi: Vec<f64>,
}

fn choose2(n: usize) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Builds every coefficient array the table's `p_max` allows.
pub fn coeff_table(q: &QTable, variants: Variants) -> Result<CoeffTable> {
    let qp = &q.q;
    let p_max = q.p_max;
    let rho: Vec<f64> = (0..=p_max - 4)
        .map(|p| qp[p] - 2.0 * qp[p + 2] + qp[p + 4])
        .collect();
    // p = -1 uses q_0 = 1
    let pi: Vec<f64> = (0..=p_max - 2).map(|k| qp[k] - qp[k + 2]).collect();
    let pi_at = |p: i64| -> f64 {
        if p < -1 {
            0.0
        } else {
            pi[(p + 1) as usize]
        }
    };
    let phi: Vec<f64> = (0..=p_max - 3)
        .map(|p| {
            let lead = if p == 0 { 0.0 } else { p as f64 * pi_at(p as i64 - 2) };
            let tail = match variants.phi {
                PhiVariant::Definition => 3.0,
                PhiVariant::Statement => (p + 2) as f64,
            };
            lead - tail * pi_at(p as i64)
        })
        .collect();
    Ok(CoeffTable {
        q: q.clone(),
        variants,
        rho,
        pi,
        phi,
    })
}

impl CoeffTable {
    fn missing(&self, what: &str, p: i64, q_index: i64) -> Error {
        Error::invalid(format!(
            "{what} at p = {p} needs q_{q_index} but the moment table stops at p_max = {}",
            self.q.p_max
        ))
    }

    fn qv(&self, p: usize) -> Result<f64> {
        self.q.get(p)
    }

    pub fn rho(&self, p: usize) -> Result<f64> {
        self.rho
            .get(p)
            .copied()
            .ok_or_else(|| self.missing("rho", p as i64, p as i64 + 4))
    }

    /// `pi_p`, zero for `p < -1`.
    pub fn pi(&self, p: i64) -> Result<f64> {
        if p < -1 {
            return Ok(0.0);
        }
        self.pi
            .get((p + 1) as usize)
            .copied()
            .ok_or_else(|| self.missing("pi", p, p + 3))
    }

    pub fn phi(&self, p: usize) -> Result<f64> {
        self.phi
            .get(p)
            .copied()
            .ok_or_else(|| self.missing("phi", p as i64, p as i64 + 3))
    }

    pub fn lambda(&self, p: usize) -> Result<f64> {
        let q2 = self.q.q2;
        let qp = self.qv(p)?;
        let qp2 = self
            .qv(p + 2)
            .map_err(|_| self.missing("lambda", p as i64, p as i64 + 2))?;
        let mut v = choose2(p + 1) * (qp2 - qp * q2) - (p * p) as f64 * (qp - qp * q2);
        if p >= 2 {
            v += choose2(p) * (self.qv(p - 2)? - qp * q2);
        }
        Ok(v)
    }

    pub fn kappa(&self, p: usize, pt: usize) -> Result<f64> {
        let q2 = self.q.q2;
        let qp = self.qv(p)?;
        let qp2 = self
            .qv(p + 2)
            .map_err(|_| self.missing("kappa", p as i64, p as i64 + 2))?;
        let lead = match self.variants.kappa {
            KappaVariant::Statement => qp - qp2,
            KappaVariant::Proof => qp - qp * q2,
        };
        Ok((p * pt) as f64 * lead - (pt * (p + 1)) as f64 * (qp2 - qp * q2))
    }

    pub fn omega(&self, p: usize, pt: usize) -> Result<f64> {
        let q2 = self.q.q2;
        let qp = self.qv(p)?;
        let qp2 = self
            .qv(p + 2)
            .map_err(|_| self.missing("omega", p as i64, p as i64 + 2))?;
        Ok(choose2(pt) * (qp2 - qp * q2))
    }
}
