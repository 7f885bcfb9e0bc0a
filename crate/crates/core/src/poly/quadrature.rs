//! Gauss–Hermite quadrature against the standard Gaussian density.
//!
//! Nodes and weights come from the Golub–Welsch eigen-decomposition of the
//! Jacobi matrix of the probabilists' Hermite recurrence (off-diagonal `sqrt(k)`).
//! An `n`-node rule integrates polynomials of degree `2n - 1` exactly.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct GaussHermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one node");
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = (k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E_{y ~ N(0,1)}[f(y)]`
    pub fn expect_1d(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E_{y ~ N(0, I_dim)}[f(y)]` on the tensor-product grid.
    pub fn expect(&self, dim: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
        let n = self.nodes.len();
        let mut idx = vec![0usize; dim];
        let mut point = vec![0.0; dim];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                point[d] = self.nodes[i];
                w *= self.weights[i];
            }
            total += w * f(&point);
            let mut d = 0;
            loop {
                if d == dim {
                    return total;
                }
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let rule = GaussHermiteRule::new(10);
        let moments: Vec<f64> = (0..8).map(|k| rule.expect_1d(|y| y.powi(k))).collect();
        let exact = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0];
        for (m, e) in moments.iter().zip(exact) {
            assert!((m - e).abs() < 1e-12, "{moments:?}");
        }
    }

    #[test]
    fn two_dimensional_product() {
        let rule = GaussHermiteRule::new(6);
        let v = rule.expect(2, |y| y[0] * y[0] * y[1] * y[1] + y[0]);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
