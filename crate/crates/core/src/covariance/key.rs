use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Index `(S, p)` of a truncated overlap `T_{S,p}`; `S` is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OverlapKey {
    set: Vec<u32>,
    p: u32,
}

impl OverlapKey {
    pub fn new(labels: impl IntoIterator<Item = u32>, p: u32) -> Result<Self> {
        let mut set: Vec<u32> = labels.into_iter().collect();
        if set.contains(&0) {
            return Err(Error::invalid("replica labels must be positive"));
        }
        set.sort_unstable();
        if set.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("replica labels must be distinct: {set:?}")));
        }
        Ok(OverlapKey { set, p })
    }

    pub fn empty(p: u32) -> Self {
        OverlapKey { set: Vec::new(), p }
    }

    pub fn set(&self) -> &[u32] {
        &self.set
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.set.len()
    }
}

impl fmt::Display for OverlapKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S={{")?;
        for (i, l) in self.set.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}},p={}", self.p)
    }
}

impl Serialize for OverlapKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Product `prod T_{S,p}^{k(S,p)}` with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    factors: BTreeMap<OverlapKey, u32>,
}

impl Monomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (OverlapKey, u32)>) -> Result<Self> {
        let mut m = Monomial::new();
        for (k, e) in factors {
            m = m.times(k, e);
        }
        if m.degree() == 0 {
            return Err(Error::invalid("monomial must have total degree >= 1"));
        }
        Ok(m)
    }

    /// Multiplies by `key^exponent`.
    pub fn times(mut self, key: OverlapKey, exponent: u32) -> Self {
        if exponent > 0 {
            *self.factors.entry(key).or_insert(0) += exponent;
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.factors.values().map(|&e| e as usize).sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&OverlapKey, u32)> {
        self.factors.iter().map(|(k, &e)| (k, e))
    }

    /// Factors repeated according to their exponents, in key order.
    pub fn expanded(&self) -> Vec<&OverlapKey> {
        self.factors
            .iter()
            .flat_map(|(k, &e)| std::iter::repeat_n(k, e as usize))
            .collect()
    }

    /// Groups the factors by replica set.
    pub fn groups(&self) -> BTreeMap<&[u32], Vec<(&OverlapKey, u32)>> {
        let mut g: BTreeMap<&[u32], Vec<(&OverlapKey, u32)>> = BTreeMap::new();
        for (k, &e) in &self.factors {
            g.entry(k.set()).or_default().push((k, e));
        }
        g
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "T[{k}]")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_ordering() {
        let a = OverlapKey::new([3, 1, 2], 1).unwrap();
        assert_eq!(a.set(), &[1, 2, 3]);
        assert_eq!(a.to_string(), "S={1,2,3},p=1");
        assert_eq!(OverlapKey::empty(2).to_string(), "S={},p=2");
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(OverlapKey::new([1, 1], 0).is_err());
        assert!(OverlapKey::new([0, 1], 0).is_err());
    }

    #[test]
    fn monomial_degree_and_groups() {
        let k12 = OverlapKey::new([1, 2], 0).unwrap();
        let k12p = OverlapKey::new([1, 2], 1).unwrap();
        let k13 = OverlapKey::new([1, 3], 0).unwrap();
        let m = Monomial::new().times(k12.clone(), 2).times(k13, 1).times(k12p, 1).times(k12, 1);
        assert_eq!(m.degree(), 5);
        assert_eq!(m.groups().len(), 2);
        assert_eq!(m.expanded().len(), 5);
        assert!(Monomial::from_factors([]).is_err());
    }
}
