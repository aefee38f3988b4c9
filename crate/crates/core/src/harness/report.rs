use std::fmt::Write as _;

use super::diagnostics::ScalingOutcome;
use super::experiment::ExperimentReport;
use crate::error::Result;

pub fn report_json(r: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

const CSV_HEADER: &str = "kind,target,n_sites,m_used,mean,stderr,scaled_mean,scaled_stderr,\
intercept,intercept_stderr,theory,z,chi2,dof,pass";

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

/// One `point` row per target and size, one `fit` row per target, then
/// `tail` rows.
pub fn report_csv(r: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for t in &r.targets {
        for p in &t.points {
            let _ = writeln!(
                s,
                "point,\"{}\",{},{},{},{},{},{},,,,,,,",
                t.label,
                p.n_sites,
                p.m_used,
                e(p.mean),
                e(p.stderr),
                e(p.scaled_mean),
                e(p.scaled_stderr)
            );
        }
    }
    for t in &r.targets {
        let (chi2, dof) = t
            .fit
            .as_ref()
            .map_or((String::new(), String::new()), |f| (e(f.chi2), f.dof.to_string()));
        let _ = writeln!(
            s,
            "fit,\"{}\",,,,,,,{},{},{},{},{},{},{}",
            t.label,
            e(t.intercept),
            e(t.intercept_stderr),
            e(t.theory),
            e(t.z),
            chi2,
            dof,
            t.pass
        );
    }
    if let Some(tails) = &r.tails {
        for row in &tails.rows {
            let _ = writeln!(
                s,
                "tail,\"t={}\",{},{},{},{},,,,,,,,,{}",
                row.t,
                row.n_sites,
                tails.samples,
                e(row.mean),
                e(row.stderr),
                !tails.blowup
            );
        }
    }
    s
}

/// Human-readable summary with six significant digits.
pub fn summary_table(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "beta = {}, h = {}, q2 = {:.6}, samples = {}, grid = {:?}",
        r.config.params.beta, r.config.params.h, r.q2, r.config.samples, r.config.n_grid
    );
    let _ = writeln!(
        s,
        "{:<24} {:>13} {:>13} {:>13} {:>9} {:>9}  ok",
        "target", "intercept", "stderr", "theory", "z", "z(sqrt)"
    );
    for t in &r.targets {
        let _ = writeln!(
            s,
            "{:<24} {:>13.5e} {:>13.5e} {:>13.5e} {:>9.3} {:>9.3} {}",
            t.label,
            t.intercept,
            t.intercept_stderr,
            t.theory,
            t.z,
            t.reference_z,
            if t.pass { "yes" } else { "NO" }
        );
    }
    for sc in &r.scaling {
        let line = match &sc.outcome {
            ScalingOutcome::Slope {
                slope,
                stderr,
                expected,
                pass,
            } => format!("slope {slope:.4} +- {stderr:.4} (expected {expected}) pass={pass}"),
            ScalingOutcome::ZeroLimit { intercept, z, pass, .. } => {
                format!("zero limit: intercept {intercept:.5e}, z {z:.3} pass={pass}")
            }
            ScalingOutcome::Indeterminate { reason } => format!("indeterminate: {reason}"),
        };
        let _ = writeln!(s, "scaling {}: {line}", sc.label);
    }
    if let Some(o) = &r.oracle {
        for v in &o.verdicts {
            let _ = writeln!(s, "oracle {}: {} ({})", v.coefficient, v.verdict, v.reason);
        }
    }
    if let Some(t) = &r.tails {
        let ratio = t.ratio.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        let _ = writeln!(s, "tails: ratio at t=0.1 {ratio}, blowup={}", t.blowup);
    }
    let _ = writeln!(s, "passed: {}", r.passed);
    s
}

/// Writes the JSON and CSV reports to the paths named in the config.
pub fn write_reports(r: &ExperimentReport) -> Result<()> {
    if let Some(p) = &r.config.out_json {
        std::fs::write(p, report_json(r)?)?;
    }
    if let Some(p) = &r.config.out_csv {
        std::fs::write(p, report_csv(r))?;
    }
    Ok(())
}
