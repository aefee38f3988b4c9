//! Re-scores one set of estimates under every coefficient variant.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::{theory_model, z_score, TargetReport, Z_PASS};
use crate::error::Result;
use crate::moments::{KappaVariant, PhiVariant, Variants};

pub const Z_DISCRIMINATE: f64 = 5.0;

/// Targets whose limits depend on the disputed coefficients.
pub const KAPPA_PROBE: &str = "T{}:2*T{}:3";
pub const PHI_PROBE: &str = "T{1}:2*T{1}:1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantRow {
    pub label: String,
    pub theory: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantTable {
    pub kappa: &'static str,
    pub phi: &'static str,
    pub rows: Vec<VariantRow>,
    pub max_abs_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub coefficient: &'static str,
    /// Winning variant name or `"inconclusive"`.
    pub verdict: String,
    pub reason: String,
    pub probe_present: bool,
    /// Largest difference between the two variants' predictions.
    pub max_theory_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub tables: Vec<VariantTable>,
    pub verdicts: Vec<Verdict>,
}

fn table(cfg: &ExperimentConfig, targets: &[TargetReport], v: Variants) -> Result<VariantTable> {
    let model = theory_model(cfg, v)?;
    let mut rows = Vec::with_capacity(targets.len());
    for (tg, rep) in cfg.targets.iter().zip(targets) {
        let theory = tg.theory(&model)?;
        let z = if rep.exact_zero {
            0.0
        } else {
            z_score(rep.intercept, rep.intercept_stderr, theory)
        };
        rows.push(VariantRow {
            label: rep.label.clone(),
            theory,
            z,
        });
    }
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    Ok(VariantTable {
        kappa: v.kappa.name(),
        phi: v.phi.name(),
        rows,
        max_abs_z,
    })
}

fn decide(
    coefficient: &'static str,
    names: [&'static str; 2],
    tables: [&VariantTable; 2],
    probe_present: bool,
) -> Verdict {
    let max_theory_gap = tables[0]
        .rows
        .iter()
        .zip(&tables[1].rows)
        .map(|(a, b)| (a.theory - b.theory).abs())
        .fold(0.0, f64::max);
    let inconclusive = |reason: String| Verdict {
        coefficient,
        verdict: "inconclusive".into(),
        reason,
        probe_present,
        max_theory_gap,
    };
    if !probe_present {
        return inconclusive("discriminating target not in the target set".into());
    }
    if max_theory_gap == 0.0 {
        return inconclusive("variants give identical predictions".into());
    }
    for (win, lose) in [(0, 1), (1, 0)] {
        if tables[win].max_abs_z < Z_PASS && tables[lose].max_abs_z > Z_DISCRIMINATE {
            return Verdict {
                coefficient,
                verdict: names[win].into(),
                reason: format!(
                    "max |z| {:.3} vs {:.3}",
                    tables[win].max_abs_z, tables[lose].max_abs_z
                ),
                probe_present,
                max_theory_gap,
            };
        }
    }
    let (a, b) = tables[0]
        .rows
        .iter()
        .zip(&tables[1].rows)
        .max_by(|x, y| (x.0.z - x.1.z).abs().total_cmp(&(y.0.z - y.1.z).abs()))
        .expect("nonempty target set");
    inconclusive(format!(
        "max |z| {} = {:.3}, {} = {:.3}; widest split {}: z {:.3} vs {:.3} ({:.2} sigma apart)",
        names[0],
        tables[0].max_abs_z,
        names[1],
        tables[1].max_abs_z,
        a.label,
        a.z,
        b.z,
        (a.z - b.z).abs()
    ))
}

/// Computes z-tables under all four variant combinations from the intercepts
/// already in `targets`, and a verdict for each disputed coefficient with the
/// other held at the configured choice.
pub fn variant_oracle(cfg: &ExperimentConfig, targets: &[TargetReport]) -> Result<OracleReport> {
    let mut tables = Vec::new();
    for kappa in KappaVariant::ALL {
        for phi in PhiVariant::ALL {
            tables.push(table(cfg, targets, Variants { kappa, phi })?);
        }
    }
    let find = |k: KappaVariant, p: PhiVariant| {
        tables
            .iter()
            .find(|t| t.kappa == k.name() && t.phi == p.name())
            .expect("all combinations built")
    };
    let has = |label: &str| cfg.targets.iter().any(|t| t.label() == label);
    let [k0, k1] = KappaVariant::ALL;
    let [p0, p1] = PhiVariant::ALL;
    let kappa = decide(
        "kappa",
        [k0.name(), k1.name()],
        [find(k0, cfg.variants.phi), find(k1, cfg.variants.phi)],
        has(KAPPA_PROBE),
    );
    let phi = decide(
        "phi",
        [p0.name(), p1.name()],
        [find(cfg.variants.kappa, p0), find(cfg.variants.kappa, p1)],
        has(PHI_PROBE),
    );
    Ok(OracleReport {
        tables,
        verdicts: vec![kappa, phi],
    })
}
