use std::fmt::Write as _;

use serde::Serialize;

use super::key::OverlapKey;
use super::model::{AsymmetryRecord, CovarianceModel};
use crate::error::Result;
use crate::moments::ModelParams;

/// Covariance matrices over all `(S, p)` with `S` a subset of `[n]` and
/// `p <= p_max`, plus the multi-overlap matrix over nonempty subsets.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceExport {
    pub params: ModelParams,
    pub n: usize,
    pub p_max: usize,
    pub keys: Vec<OverlapKey>,
    pub matrix: Vec<Vec<f64>>,
    pub subsets: Vec<String>,
    pub multioverlap: Vec<Vec<f64>>,
    pub asymmetry_log: Vec<AsymmetryRecord>,
}

fn subsets_of(n: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = (0u32..(1 << n))
        .map(|mask| (1..=n as u32).filter(|l| mask & (1 << (l - 1)) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<u32>, b: &Vec<u32>| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

fn set_label(s: &[u32]) -> String {
    let inner: Vec<String> = s.iter().map(|l| l.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Multi-overlap covariance matrix over the nonempty subsets of `[n]`.
pub fn multioverlap_matrix(model: &CovarianceModel, n: usize) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let subsets: Vec<Vec<u32>> = subsets_of(n).into_iter().filter(|s| !s.is_empty()).collect();
    let mut matrix = Vec::with_capacity(subsets.len());
    for a in &subsets {
        let row = subsets
            .iter()
            .map(|b| model.multioverlap_cov(a, b))
            .collect::<Result<Vec<f64>>>()?;
        matrix.push(row);
    }
    Ok((subsets.iter().map(|s| set_label(s)).collect(), matrix))
}

impl CovarianceExport {
    pub fn build(model: &CovarianceModel, n: usize, p_max: usize) -> Result<Self> {
        let mut keys = Vec::new();
        for s in subsets_of(n) {
            for p in 0..=p_max as u32 {
                keys.push(OverlapKey::new(s.iter().copied(), p)?);
            }
        }
        let mut matrix = Vec::with_capacity(keys.len());
        for a in &keys {
            let row = keys
                .iter()
                .map(|b| model.limit_cov(a, b))
                .collect::<Result<Vec<f64>>>()?;
            matrix.push(row);
        }
        let (subsets, multioverlap) = multioverlap_matrix(model, n)?;
        Ok(CovarianceExport {
            params: model.params,
            n,
            p_max,
            keys,
            matrix,
            subsets,
            multioverlap,
            asymmetry_log: model.asymmetry_log.clone(),
        })
    }
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Plain CSV rendering: the key matrix, the multi-overlap matrix and the
/// asymmetry log as three sections separated by blank lines.
pub fn covariance_csv(e: &CovarianceExport) -> String {
    let mut out = String::new();
    out.push_str("key");
    for k in &e.keys {
        let _ = write!(out, ",{}", csv_field(&k.to_string()));
    }
    out.push('\n');
    for (k, row) in e.keys.iter().zip(&e.matrix) {
        out.push_str(&csv_field(&k.to_string()));
        for v in row {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out.push_str("\nsubset");
    for s in &e.subsets {
        let _ = write!(out, ",{}", csv_field(s));
    }
    out.push('\n');
    for (s, row) in e.subsets.iter().zip(&e.multioverlap) {
        out.push_str(&csv_field(s));
        for v in row {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out.push_str("\ns,p,pt,forward,backward,abs_diff,relative,flagged\n");
    for r in &e.asymmetry_log {
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.s, r.p, r.pt, r.forward, r.backward, r.abs_diff, r.relative, r.flagged
        );
    }
    out
}

pub fn covariance_json(e: &CovarianceExport) -> Result<String> {
    Ok(serde_json::to_string_pretty(e)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{hermite_rule, Variants};

    #[test]
    fn export_shapes_and_block_structure() {
        let rule = hermite_rule(61).unwrap();
        let m = CovarianceModel::new(ModelParams::new(0.15, 0.3).unwrap(), &rule, Variants::default(), 20).unwrap();
        let e = CovarianceExport::build(&m, 3, 2).unwrap();
        assert_eq!(e.keys.len(), 8 * 3);
        assert_eq!(e.subsets.len(), 7);
        for (i, a) in e.keys.iter().enumerate() {
            for (j, b) in e.keys.iter().enumerate() {
                if a.set() != b.set() {
                    assert_eq!(e.matrix[i][j], 0.0);
                }
            }
        }
        let csv = covariance_csv(&e);
        assert!(csv.starts_with("key,\"S={},p=0\""));
        let json = covariance_json(&e).unwrap();
        assert!(json.contains("\"S={1,2},p=0\""));
    }
}
