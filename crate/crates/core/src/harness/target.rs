//! Experiment targets: polynomials in truncated overlaps, written as products
//! of factors such as `T{1,2}^2`, `T{1,2}:1*T{1,2}`, `T{}:2*T{}:3` or
//! `R{1,2}^2`. `T{S}:p` is `T_{S,p}` (p defaults to 0) and `R{S}` stands for
//! the centred multi-overlap `R_S - q_{|S|}`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::covariance::{joint_moment_prediction, CovarianceModel, Monomial, OverlapKey};
use crate::error::{Error, Result};
use crate::moments::QTable;
use crate::skexact::{
    required_order, truncated_monomial_moment, vanishes_identically, CentralTensors,
    MAX_MONOMIAL_DEGREE,
};

/// Linear combination of monomials of one common degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    label: String,
    terms: Vec<(f64, Monomial)>,
    degree: usize,
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

type Combination = BTreeMap<Monomial, f64>;

fn multiply(a: &Combination, b: &Combination) -> Combination {
    let mut out = Combination::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = mb.factors().fold(ma.clone(), |m, (k, e)| m.times(k.clone(), e));
            *out.entry(m).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn single(key: OverlapKey) -> Combination {
    let mut c = Combination::new();
    c.insert(Monomial::new().times(key, 1), 1.0);
    c
}

/// `R_S - q_{|S|}` expanded over truncated spins.
fn centred_multi_overlap(set: &[u32]) -> Result<Combination> {
    let s = set.len();
    let mut c = Combination::new();
    for mask in 1usize..(1 << s) {
        let sub: Vec<u32> = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| set[i]).collect();
        let p = (s - sub.len()) as u32;
        c.insert(Monomial::new().times(OverlapKey::new(sub, p)?, 1), 1.0);
    }
    c.insert(Monomial::new().times(OverlapKey::empty(s as u32), 1), 1.0);
    Ok(c)
}

fn parse_set(text: &str) -> Result<(Vec<u32>, &str)> {
    let body_end = text
        .find('}')
        .ok_or_else(|| Error::Config(format!("missing '}}' in target factor {text:?}")))?;
    if !text.starts_with('{') {
        return Err(Error::Config(format!("expected '{{' in target factor {text:?}")));
    }
    let body = &text[1..body_end];
    let labels = if body.is_empty() {
        Vec::new()
    } else {
        body.split(',')
            .map(|x| {
                x.parse::<u32>()
                    .map_err(|_| Error::Config(format!("bad replica label {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok((labels, &text[body_end + 1..]))
}

fn parse_u32(text: &str, what: &str) -> Result<u32> {
    text.parse::<u32>()
        .map_err(|_| Error::Config(format!("bad {what} {text:?}")))
}

fn parse_factor(text: &str) -> Result<Combination> {
    let (base, exponent) = match text.split_once('^') {
        Some((b, e)) => (b, parse_u32(e, "exponent")?),
        None => (text, 1),
    };
    if exponent == 0 {
        return Err(Error::Config(format!("zero exponent in {text:?}")));
    }
    let factor = if let Some(rest) = base.strip_prefix('T') {
        let (labels, tail) = parse_set(rest)?;
        let p = match tail.strip_prefix(':') {
            Some(p) => parse_u32(p, "power")?,
            None if tail.is_empty() => 0,
            None => return Err(Error::Config(format!("unexpected {tail:?} in {text:?}"))),
        };
        single(OverlapKey::new(labels, p).map_err(|e| Error::Config(e.to_string()))?)
    } else if let Some(rest) = base.strip_prefix('R') {
        let (labels, tail) = parse_set(rest)?;
        if !tail.is_empty() || labels.is_empty() {
            return Err(Error::Config(format!("bad multi-overlap factor {text:?}")));
        }
        OverlapKey::new(labels.clone(), 0).map_err(|e| Error::Config(e.to_string()))?;
        centred_multi_overlap(&labels)?
    } else {
        return Err(Error::Config(format!(
            "target factor {text:?} must start with 'T' or 'R'"
        )));
    };
    let mut out = factor.clone();
    for _ in 1..exponent {
        out = multiply(&out, &factor);
    }
    Ok(out)
}

impl Target {
    pub fn parse(text: &str) -> Result<Self> {
        let label: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if label.is_empty() {
            return Err(Error::Config("empty target".into()));
        }
        let mut acc: Option<Combination> = None;
        for factor in label.split('*') {
            let f = parse_factor(factor)?;
            acc = Some(match acc {
                None => f,
                Some(a) => multiply(&a, &f),
            });
        }
        let terms: Vec<(f64, Monomial)> = acc
            .unwrap_or_default()
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(m, c)| (c, m))
            .collect();
        let degree = terms.first().map(|(_, m)| m.degree()).unwrap_or(0);
        if degree > MAX_MONOMIAL_DEGREE {
            return Err(Error::UnsupportedDegree {
                degree,
                max: MAX_MONOMIAL_DEGREE,
            });
        }
        Ok(Target {
            label,
            terms,
            degree,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(f64, Monomial)] {
        &self.terms
    }

    /// Zero for every disorder sample and every N.
    pub fn exact_zero(&self) -> bool {
        self.terms.iter().all(|(_, m)| vanishes_identically(m))
    }

    pub fn required_order(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, m)| !vanishes_identically(m))
            .map(|(_, m)| required_order(m))
            .max()
            .unwrap_or(2)
    }

    pub fn max_power(&self) -> usize {
        self.keys().map(|k| k.p() as usize).max().unwrap_or(0)
    }

    pub fn max_set_size(&self) -> usize {
        self.keys().map(|k| k.size()).max().unwrap_or(0)
    }

    fn keys(&self) -> impl Iterator<Item = &OverlapKey> {
        self.terms.iter().flat_map(|(_, m)| m.factors().map(|(k, _)| k))
    }

    /// Gibbs expectation for one disorder sample.
    pub fn per_disorder(&self, t: &CentralTensors, q: &QTable) -> Result<f64> {
        let mut sum = 0.0;
        for (c, m) in &self.terms {
            sum += c * truncated_monomial_moment(t, m, q)?;
        }
        Ok(sum)
    }

    /// Limit of `N^{k/2}` times the disorder average.
    pub fn theory(&self, model: &CovarianceModel) -> Result<f64> {
        let mut sum = 0.0;
        for (c, m) in &self.terms {
            sum += c * joint_moment_prediction(m, model)?;
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_monomials() {
        let t = Target::parse("T{1,2}^2").unwrap();
        assert_eq!(t.degree(), 2);
        assert_eq!(t.terms().len(), 1);
        assert!(!t.exact_zero());
        let t = Target::parse(" T{1,2}:1 * T{1,2} ").unwrap();
        assert_eq!(t.label(), "T{1,2}:1*T{1,2}");
        assert_eq!(t.degree(), 2);
        let t = Target::parse("T{}:2*T{}:3").unwrap();
        assert_eq!(t.max_power(), 3);
        assert_eq!(t.max_set_size(), 0);
    }

    #[test]
    fn exact_zero_detection() {
        assert!(Target::parse("T{1,2}*T{1,3}").unwrap().exact_zero());
        assert!(!Target::parse("T{1,2}*T{1,3}*T{2,3}").unwrap().exact_zero());
        assert_eq!(Target::parse("T{1,2}^4").unwrap().required_order(), 4);
    }

    #[test]
    fn multi_overlap_expansion() {
        // (T12 + T1:1 + T2:1 + T{}:2)^2 has 4 squares and 6 cross terms
        let t = Target::parse("R{1,2}^2").unwrap();
        assert_eq!(t.degree(), 2);
        assert_eq!(t.terms().len(), 10);
        let squares = t.terms().iter().filter(|(c, _)| *c == 1.0).count();
        let cross = t.terms().iter().filter(|(c, _)| *c == 2.0).count();
        assert_eq!((squares, cross), (4, 6));
    }

    #[test]
    fn rejects_bad_syntax() {
        for bad in ["", "X{1}", "T{1,2", "T{0}", "T{1}:x", "T{1}^0", "T{1,1}", "R{}", "T{1,2}^5"] {
            assert!(Target::parse(bad).is_err(), "{bad}");
        }
    }
}
