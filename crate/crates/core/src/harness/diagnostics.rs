use serde::Serialize;

use super::config::ExperimentConfig;
use super::exec::map_indexed;
use super::experiment::{theory_params, TargetReport, Z_PASS};
use super::fit::fit_line;
use crate::error::Result;
use crate::moments::{hermite_rule, solve_q2, DEFAULT_QUADRATURE_ORDER, DEFAULT_SOLVER_TOL};
use crate::skexact::{
    gibbs_correlations, overlap_tail_statistic, sample_disorder, stream, GibbsOptions,
    StreamPurpose,
};

pub const SLOPE_WINDOW: f64 = 0.3;
pub const TAIL_FLAG_T: f64 = 0.1;
pub const TAIL_BLOWUP_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingOutcome {
    Slope {
        slope: f64,
        stderr: f64,
        expected: f64,
        pass: bool,
    },
    ZeroLimit {
        intercept: f64,
        stderr: f64,
        z: f64,
        pass: bool,
    },
    Indeterminate {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub label: String,
    pub degree: usize,
    pub outcome: ScalingOutcome,
}

/// Decay of `|mean|` with N for a nonzero limit, or the vanishing of the
/// scaled intercept for a zero limit.
pub fn scaling_check(t: &TargetReport) -> ScalingResult {
    let outcome = scaling_outcome(t);
    ScalingResult {
        label: t.label.clone(),
        degree: t.degree,
        outcome,
    }
}

fn scaling_outcome(t: &TargetReport) -> ScalingOutcome {
    if t.exact_zero {
        return ScalingOutcome::Indeterminate {
            reason: "identically zero for every disorder sample".into(),
        };
    }
    if t.theory == 0.0 {
        return ScalingOutcome::ZeroLimit {
            intercept: t.intercept,
            stderr: t.intercept_stderr,
            z: t.z,
            pass: t.z.abs() < Z_PASS,
        };
    }
    if let Some(p) = t.points.iter().find(|p| p.mean.abs() <= 3.0 * p.stderr) {
        return ScalingOutcome::Indeterminate {
            reason: format!("mean consistent with zero at N = {}", p.n_sites),
        };
    }
    let x: Vec<f64> = t.points.iter().map(|p| (p.n_sites as f64).ln()).collect();
    let y: Vec<f64> = t.points.iter().map(|p| p.mean.abs().ln()).collect();
    let s: Vec<f64> = t.points.iter().map(|p| p.stderr / p.mean.abs()).collect();
    match fit_line(&x, &y, &s) {
        Ok(f) => {
            let expected = -(t.degree as f64) / 2.0;
            ScalingOutcome::Slope {
                slope: f.c1,
                stderr: f.c1_stderr,
                expected,
                pass: (f.c1 - expected).abs() <= SLOPE_WINDOW,
            }
        }
        Err(e) => ScalingOutcome::Indeterminate {
            reason: e.to_string(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub n_sites: usize,
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub samples: usize,
    pub pairs: usize,
    pub q2: f64,
    pub rows: Vec<TailRow>,
    /// max/min over the grid of the value at `t = 0.1`, when that t is used.
    pub ratio: Option<f64>,
    pub blowup: bool,
}

/// Disorder-averaged `<exp(t N (R_12 - q2)^2)>` on the configured grid.
pub fn tail_check(cfg: &ExperimentConfig, workers: usize) -> Result<TailReport> {
    let tc = cfg.tails.clone().unwrap_or_default();
    let rule = hermite_rule(DEFAULT_QUADRATURE_ORDER)?;
    let q2 = solve_q2(&theory_params(cfg)?, &rule, DEFAULT_SOLVER_TOL, 10_000)?;
    let options = GibbsOptions {
        order: 2,
        keep_weights: true,
        field_mode: cfg.field_mode,
    };
    let mut rows = Vec::new();
    let mut flagged = Vec::new();
    for &n in &cfg.n_grid {
        let per_sample = map_indexed(tc.samples as u64, workers, |idx| {
            let d = sample_disorder(n, cfg.seed, idx)?;
            let s = gibbs_correlations(&d, cfg.params, options)?;
            let mut rng = stream(cfg.seed, n, idx, StreamPurpose::Tails);
            overlap_tail_statistic(&s, q2, &tc.t_values, tc.pairs, &mut rng)
        })?;
        for (k, &t) in tc.t_values.iter().enumerate() {
            let values: Vec<f64> = per_sample.iter().map(|v| v[k]).collect();
            let m = values.len() as f64;
            let mean = values.iter().sum::<f64>() / m;
            let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            if t == TAIL_FLAG_T {
                flagged.push(mean);
            }
            rows.push(TailRow {
                n_sites: n,
                t,
                mean,
                stderr: (var / m).sqrt(),
            });
        }
    }
    let ratio = (!flagged.is_empty()).then(|| {
        let max = flagged.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = flagged.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    });
    Ok(TailReport {
        samples: tc.samples,
        pairs: tc.pairs,
        q2,
        rows,
        ratio,
        blowup: ratio.is_some_and(|r| r.is_nan() || r > TAIL_BLOWUP_RATIO),
    })
}
