use crate::error::{Error, Result};

pub const DEFAULT_QUADRATURE_ORDER: usize = 61;

/// Gauss–Hermite nodes and weights normalised for expectations against a
/// standard Gaussian: `E[f(Y)] ~ sum_k weights[k] * f(nodes[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// Builds the `order`-point rule, exact for polynomials of degree up to
/// `2 * order - 1`.
///
/// Roots of the physicists' Hermite polynomial are found by Newton iteration on
/// the orthonormal three-term recurrence, then rescaled to the unit-variance
/// Gaussian weight.
pub fn hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::invalid("quadrature order must be >= 1"));
    }
    let n = order;
    let nf = n as f64;
    let half = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let (p1, p2) = orthonormal_hermite(n, z);
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "Hermite root {i} of order {order} did not converge"
            )));
        }
        // one more evaluation at the converged root for the weight
        let (_, p2) = orthonormal_hermite(n, z);
        pp = if p2 != 0.0 { (2.0 * nf).sqrt() * p2 } else { pp };
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[half - 1] = 0.0;
    }
    let scale = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| (xi * std::f64::consts::SQRT_2, wi / scale))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Returns the orthonormal Hermite values `(H~_n(z), H~_{n-1}(z))`.
fn orthonormal_hermite(n: usize, z: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_is_the_mean() {
        let r = hermite_rule(1).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!(r.nodes[0].abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(matches!(hermite_rule(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn low_order_moments() {
        let r2 = hermite_rule(2).unwrap();
        assert!((r2.expect(|y| y * y) - 1.0).abs() < 1e-15);
        let r3 = hermite_rule(3).unwrap();
        assert!((r3.expect(|y| y.powi(4)) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn default_rule_is_normalised_and_symmetric() {
        for order in [2, 5, 20, 61, 122] {
            let r = hermite_rule(order).unwrap();
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14, "order {order}: sum {sum}");
            let n = r.order();
            for k in 0..n {
                assert!((r.nodes[k] + r.nodes[n - 1 - k]).abs() < 1e-14);
                assert!((r.weights[k] - r.weights[n - 1 - k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        // E[Y^{2m}] = (2m-1)!!
        let r = hermite_rule(8).unwrap();
        let mut dfact = 1.0;
        for m in 1..8 {
            dfact *= (2 * m - 1) as f64;
            let got = r.expect(|y| y.powi(2 * m));
            assert!((got / dfact - 1.0).abs() < 1e-12, "m = {m}: {got} vs {dfact}");
        }
    }
}
