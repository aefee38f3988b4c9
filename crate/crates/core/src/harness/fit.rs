use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Disorder average of a target at one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatePoint {
    pub n_sites: usize,
    pub m_used: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `N^{k/2} * mean`
    pub scaled_mean: f64,
    pub scaled_stderr: f64,
}

impl EstimatePoint {
    /// Mean and standard error of `values`, summed in order.
    pub fn from_values(n_sites: usize, degree: usize, values: &[f64]) -> Self {
        let m = values.len();
        let mean = values.iter().sum::<f64>() / m as f64;
        let var = if m > 1 {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        let stderr = (var / m as f64).sqrt();
        let scale = (n_sites as f64).powf(degree as f64 / 2.0);
        EstimatePoint {
            n_sites,
            m_used: m,
            mean,
            stderr,
            scaled_mean: scale * mean,
            scaled_stderr: scale * stderr,
        }
    }
}

/// Straight-line fit `y = c0 + c1 x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub c0: f64,
    pub c0_stderr: f64,
    pub c1: f64,
    pub c1_stderr: f64,
    pub chi2: f64,
    pub dof: usize,
    /// False when every input had zero uncertainty and an unweighted fit was used.
    pub weighted: bool,
}

/// Weighted least squares with weights `1/sigma^2`. If all `sigma` are zero
/// the fit is unweighted and reports zero parameter uncertainty.
pub fn fit_line(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || sigma.len() != n {
        return Err(Error::Fit(format!("need >= 2 matching points, got {n}")));
    }
    let zero = sigma.iter().filter(|&&s| s == 0.0).count();
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) || (zero > 0 && zero < n) {
        return Err(Error::Fit(
            "standard errors must be all positive or all zero".into(),
        ));
    }
    let weighted = zero == 0;
    let w: Vec<f64> = sigma
        .iter()
        .map(|s| if weighted { 1.0 / (s * s) } else { 1.0 })
        .collect();
    let s: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let delta = s * sxx - sx * sx;
    if delta.is_nan() || delta <= 1e-12 * s * sxx {
        return Err(Error::Fit("singular design (x values coincide)".into()));
    }
    let c0 = (sxx * sy - sx * sxy) / delta;
    let c1 = (s * sxy - sx * sy) / delta;
    let chi2 = w
        .iter()
        .zip(x)
        .zip(y)
        .map(|((w, x), y)| w * (y - c0 - c1 * x).powi(2))
        .sum();
    let (c0_stderr, c1_stderr) = if weighted {
        ((sxx / delta).sqrt(), (s / delta).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit {
        c0,
        c0_stderr,
        c1,
        c1_stderr,
        chi2,
        dof: n - 2,
        weighted,
    })
}

/// Correction terms used when extrapolating `N^{k/2} * mean` to `N = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// `c0 + c1 N^{-1/2}` for every degree.
    Sqrt,
    /// `c0 + c1 N^{-1}` for even degree, `c0 + c1 N^{-1/2} + c2 N^{-3/2}` for odd.
    #[default]
    Parity,
}

impl Extrapolation {
    pub fn name(self) -> &'static str {
        match self {
            Extrapolation::Sqrt => "sqrt",
            Extrapolation::Parity => "parity",
        }
    }

    /// Exponents `e` of the basis functions `N^{-e}`.
    pub fn exponents(self, degree: usize) -> &'static [f64] {
        match (self, degree % 2) {
            (Extrapolation::Sqrt, _) => &[0.0, 0.5],
            (Extrapolation::Parity, 0) => &[0.0, 1.0],
            (Extrapolation::Parity, _) => &[0.0, 0.5, 1.5],
        }
    }
}

/// Weighted least-squares fit of `scaled_mean` on the basis `N^{-e}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponents: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub weighted: bool,
}

impl PowerFit {
    /// Coefficient of `N^0`.
    pub fn intercept(&self) -> (f64, f64) {
        (self.coeffs[0], self.stderrs[0])
    }
}

/// Same weighting rules as [`fit_line`], for any number of basis functions.
pub fn fit_powers(points: &[EstimatePoint], exponents: &[f64]) -> Result<PowerFit> {
    let n = points.len();
    let k = exponents.len();
    if k == 0 || n < k {
        return Err(Error::Fit(format!(
            "{k} parameters need at least {k} sizes, got {n}"
        )));
    }
    let sigma: Vec<f64> = points.iter().map(|p| p.scaled_stderr).collect();
    let zero = sigma.iter().filter(|&&s| s == 0.0).count();
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) || (zero > 0 && zero < n) {
        return Err(Error::Fit(
            "standard errors must be all positive or all zero".into(),
        ));
    }
    let weighted = zero == 0;
    let x = DMatrix::from_fn(n, k, |i, j| (points[i].n_sites as f64).powf(-exponents[j]));
    let w = DVector::from_iterator(n, sigma.iter().map(|s| if weighted { 1.0 / (s * s) } else { 1.0 }));
    let y = DVector::from_iterator(n, points.iter().map(|p| p.scaled_mean));
    let xtw = DMatrix::from_fn(k, n, |j, i| x[(i, j)] * w[i]);
    let normal = &xtw * &x;
    let cov = normal
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Fit("singular design (sizes too few or coincide)".into()))?;
    let coeffs = &cov * (&xtw * &y);
    let resid = &y - &x * &coeffs;
    let chi2 = resid.iter().zip(w.iter()).map(|(r, w)| w * r * r).sum();
    let stderrs = (0..k)
        .map(|j| if weighted { cov[(j, j)].max(0.0).sqrt() } else { 0.0 })
        .collect();
    Ok(PowerFit {
        exponents: exponents.to_vec(),
        coeffs: coeffs.iter().copied().collect(),
        stderrs,
        chi2,
        dof: n - k,
        weighted,
    })
}

/// Fits `scaled_mean = c0 + c1 N^{-1/2}`; returns the full fit.
pub fn fit_intercept(points: &[EstimatePoint]) -> Result<LineFit> {
    let x: Vec<f64> = points.iter().map(|p| (p.n_sites as f64).powf(-0.5)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.scaled_mean).collect();
    let s: Vec<f64> = points.iter().map(|p| p.scaled_stderr).collect();
    fit_line(&x, &y, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skexact::{stream, StreamPurpose};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn point(n: usize, y: f64, s: f64) -> EstimatePoint {
        EstimatePoint {
            n_sites: n,
            m_used: 100,
            mean: y,
            stderr: s,
            scaled_mean: y,
            scaled_stderr: s,
        }
    }

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<_> = [8, 12, 16, 20]
            .iter()
            .map(|&n| point(n, 0.7 - 1.3 / (n as f64).sqrt(), 0.01 * n as f64))
            .collect();
        let f = fit_intercept(&pts).unwrap();
        assert!((f.c0 - 0.7).abs() < 1e-12);
        assert!((f.c1 + 1.3).abs() < 1e-12);
        assert!(f.chi2 < 1e-20);
        assert_eq!(f.dof, 2);
    }

    #[test]
    fn two_points_saturate() {
        let f = fit_intercept(&[point(8, 1.0, 0.1), point(20, 2.0, 0.3)]).unwrap();
        assert!(f.chi2 < 1e-24);
        assert_eq!(f.dof, 0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_intercept(&[point(8, 1.0, 0.1)]).is_err());
        assert!(fit_intercept(&[point(8, 1.0, 0.1), point(8, 2.0, 0.1)]).is_err());
        assert!(fit_intercept(&[point(8, 1.0, 0.0), point(12, 2.0, 0.1)]).is_err());
        let f = fit_intercept(&[point(8, 1.0, 0.0), point(12, 1.0, 0.0)]).unwrap();
        assert!(!f.weighted);
        assert_eq!(f.c0_stderr, 0.0);
    }

    #[test]
    fn power_fit_agrees_with_line_fit() {
        let pts: Vec<_> = [8, 12, 16, 20]
            .iter()
            .map(|&n| point(n, 1.0 + 0.1 * (n % 3) as f64, 0.02 + 0.001 * n as f64))
            .collect();
        let a = fit_intercept(&pts).unwrap();
        let b = fit_powers(&pts, &[0.0, 0.5]).unwrap();
        assert!((a.c0 - b.coeffs[0]).abs() < 1e-10);
        assert!((a.c0_stderr - b.stderrs[0]).abs() < 1e-10);
        assert!((a.chi2 - b.chi2).abs() < 1e-9);
    }

    #[test]
    fn power_fit_recovers_exact_model() {
        let pts: Vec<_> = [8, 12, 16, 20, 24]
            .iter()
            .map(|&n| {
                let n_f = n as f64;
                point(n, 0.3 + 2.0 * n_f.powf(-0.5) - 1.5 * n_f.powf(-1.5), 0.01)
            })
            .collect();
        let f = fit_powers(&pts, Extrapolation::Parity.exponents(3)).unwrap();
        assert!((f.coeffs[0] - 0.3).abs() < 1e-10);
        assert!((f.coeffs[2] + 1.5).abs() < 1e-8);
        assert_eq!(f.dof, 2);
        assert!(fit_powers(&pts[..2], &[0.0, 0.5, 1.5]).is_err());
    }

    #[test]
    fn estimate_point_scaling() {
        let p = EstimatePoint::from_values(16, 3, &[1.0, 2.0, 3.0]);
        assert_eq!(p.mean, 2.0);
        assert!((p.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(p.scaled_mean, 128.0);
    }

    #[test]
    fn interval_coverage() {
        // 10^4 synthetic grids with known Gaussian noise
        let grid = [8usize, 12, 16, 20];
        let sig = [0.05, 0.04, 0.06, 0.08];
        let (c0, c1) = (0.4, -0.9);
        let reps = 10_000;
        let mut covered = 0;
        for r in 0..reps {
            let mut rng = stream(99, 0, r, StreamPurpose::Tails);
            let mut pts = Vec::new();
            for (i, &n) in grid.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                let y = c0 + c1 / (n as f64).sqrt() + sig[i] * z;
                pts.push(point(n, y, sig[i]));
            }
            let f = fit_intercept(&pts).unwrap();
            if (f.c0 - c0).abs() <= f.c0_stderr {
                covered += 1;
            }
        }
        let frac = covered as f64 / reps as f64;
        assert!((frac - 0.6827).abs() < 0.02, "coverage {frac}");
    }
}
