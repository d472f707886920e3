use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Chebyshev–Gauss–Lobatto nodes on `sigma in [0, 1]` (increasing, bottom at
/// `sigma = 0`, surface at `sigma = 1`) with Clenshaw–Curtis weights and the
/// collocation differentiation matrices.
#[derive(Clone, Debug)]
pub struct VerticalGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff: DMatrix<f64>,
    diff2: DMatrix<f64>,
}

impl VerticalGrid {
    pub const DEFAULT_POINTS: usize = 24;

    /// `points` nodes, i.e. polynomial degree `points - 1`.
    pub fn new(points: usize) -> Result<Self> {
        if points < 4 {
            return Err(Error::InvalidGrid(format!(
                "vertical grid needs at least 4 points, got {points}"
            )));
        }
        let deg = points - 1;
        let pi = std::f64::consts::PI;
        let nodes: Vec<f64> = (0..points)
            .map(|i| 0.5 * (1.0 - (pi * i as f64 / deg as f64).cos()))
            .collect();
        let weights = clenshaw_curtis(deg).into_iter().map(|w| 0.5 * w).collect();
        let diff = differentiation_matrix(&nodes);
        let diff2 = &diff * &diff;
        Ok(Self {
            nodes,
            weights,
            diff,
            diff2,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn diff(&self) -> &DMatrix<f64> {
        &self.diff
    }

    pub fn diff2(&self) -> &DMatrix<f64> {
        &self.diff2
    }

    pub fn surface(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Quadrature of nodal values over `[0, 1]`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Clenshaw–Curtis weights on `[-1, 1]` for the nodes `cos(pi i / deg)`;
/// symmetric, so the ordering of the nodes does not matter.
fn clenshaw_curtis(deg: usize) -> Vec<f64> {
    let n = deg as f64;
    let pi = std::f64::consts::PI;
    let mut w = vec![0.0; deg + 1];
    let edge = if deg % 2 == 0 {
        1.0 / (n * n - 1.0)
    } else {
        1.0 / (n * n)
    };
    w[0] = edge;
    w[deg] = edge;
    for (i, wi) in w.iter_mut().enumerate().take(deg).skip(1) {
        let theta = pi * i as f64 / n;
        let mut v = 1.0;
        if deg % 2 == 0 {
            for k in 1..deg / 2 {
                let k = k as f64;
                v -= 2.0 * (2.0 * k * theta).cos() / (4.0 * k * k - 1.0);
            }
            v -= (n * theta).cos() / (n * n - 1.0);
        } else {
            for k in 1..=(deg - 1) / 2 {
                let k = k as f64;
                v -= 2.0 * (2.0 * k * theta).cos() / (4.0 * k * k - 1.0);
            }
        }
        *wi = 2.0 * v / n;
    }
    w
}

/// Barycentric differentiation matrix for Chebyshev–Lobatto nodes, with the
/// diagonal set by the negative-sum rule.
fn differentiation_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_ordering() {
        for n in [4, 5, 12, 24, 25] {
            let vg = VerticalGrid::new(n).unwrap();
            let total: f64 = vg.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!(vg.nodes().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(vg.nodes()[0], 0.0);
            assert!((vg.nodes()[n - 1] - 1.0).abs() < 1e-15);
        }
        assert!(VerticalGrid::new(3).is_err());
    }

    #[test]
    fn quadrature_is_exact_for_polynomials() {
        let vg = VerticalGrid::new(12).unwrap();
        for p in 0..11 {
            let vals: Vec<f64> = vg.nodes().iter().map(|s| s.powi(p)).collect();
            assert!((vg.integrate(&vals) - 1.0 / (p as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn differentiates_smooth_functions() {
        let vg = VerticalGrid::new(24).unwrap();
        let f: Vec<f64> = vg.nodes().iter().map(|s| (1.3 * s).cosh()).collect();
        let df = vg.diff() * nalgebra::DVector::from_vec(f);
        let d2f = vg.diff2() * nalgebra::DVector::from_vec(
            vg.nodes().iter().map(|s| (1.3 * s).cosh()).collect(),
        );
        for (i, s) in vg.nodes().iter().enumerate() {
            assert!((df[i] - 1.3 * (1.3 * s).sinh()).abs() < 1e-12);
            assert!((d2f[i] - 1.69 * (1.3 * s).cosh()).abs() < 1e-9);
        }
    }
}
