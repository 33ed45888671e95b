//! Energy grids `0 = x_0 < x_1 < ... < x_M`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Strictly increasing energy nodes starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
}

/// Geometric spacing up to `transition`, then uniform spacing up to `x_max`.
///
/// The uniform spacing continues the last geometric step, `transition * (ratio - 1)`,
/// and the geometric part takes whatever nodes are left over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of positive nodes `M`.
    pub nodes: usize,
    pub ratio: f64,
    pub transition: f64,
    pub x_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nodes: 64, ratio: 1.15, transition: 1.0, x_max: 4.0 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        let GridSpec { nodes, ratio, transition, x_max } = *self;
        if nodes < 2 {
            return Err(Error::config("grid needs at least two positive nodes"));
        }
        if !(ratio > 1.0) || !(transition > 0.0) || !(x_max > 0.0) {
            return Err(Error::config("grid ratio must exceed 1 and transition, x_max must be positive"));
        }
        if x_max <= transition {
            // purely geometric grid ending at x_max
            let mut pts: Vec<f64> = (0..nodes)
                .map(|k| x_max * ratio.powi(-((nodes - 1 - k) as i32)))
                .collect();
            pts.insert(0, 0.0);
            return Grid::new(pts);
        }
        let spacing = transition * (ratio - 1.0);
        let n_uniform = ((x_max - transition) / spacing).ceil() as usize;
        if n_uniform >= nodes {
            return Err(Error::config(format!(
                "grid with ratio {ratio} and x_max {x_max} needs {n_uniform} uniform nodes but only {nodes} are available"
            )));
        }
        let spacing = (x_max - transition) / n_uniform as f64;
        let n_geo = nodes - n_uniform;
        let mut pts = Vec::with_capacity(nodes + 1);
        pts.push(0.0);
        for k in 0..n_geo {
            pts.push(transition * ratio.powi(-((n_geo - 1 - k) as i32)));
        }
        for k in 1..=n_uniform {
            pts.push(transition + spacing * k as f64);
        }
        Grid::new(pts)
    }
}

impl Grid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::config("grid needs x_0 = 0 and at least one positive node"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::config("grid must start at x_0 = 0"));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("grid nodes must be finite"));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::config(format!(
                "grid is not strictly increasing at index {}: {} <= {}",
                i + 1,
                nodes[i + 1],
                nodes[i]
            )));
        }
        Ok(Self { nodes })
    }

    /// Uniform grid with `m` positive nodes up to `x_max`.
    pub fn uniform(m: usize, x_max: f64) -> Result<Self> {
        Self::new((0..=m).map(|i| x_max * i as f64 / m as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes including `x_0`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Smallest positive node.
    pub fn x_min_positive(&self) -> f64 {
        self.nodes[1]
    }

    /// Largest ratio between consecutive positive nodes.
    pub fn max_ratio(&self) -> f64 {
        self.nodes[1..].windows(2).map(|w| w[1] / w[0]).fold(1.0, f64::max)
    }

    /// Value of the `l`-th nodal hat function at `x`. The last hat is
    /// extended by the constant 1 beyond `x_M`, so the hats form a partition
    /// of unity on `[0, inf)`.
    pub fn hat(&self, l: usize, x: f64) -> f64 {
        let n = &self.nodes;
        let m = n.len() - 1;
        if l == m && x >= n[m] {
            return 1.0;
        }
        if l > 0 && x >= n[l - 1] && x <= n[l] {
            return (x - n[l - 1]) / (n[l] - n[l - 1]);
        }
        if l < m && x >= n[l] && x <= n[l + 1] {
            return (n[l + 1] - x) / (n[l + 1] - n[l]);
        }
        0.0
    }

    /// Linear interpolation weights of `x` onto the hat basis:
    /// `(m, theta)` with `hat_m(x) = 1 - theta`, `hat_{m+1}(x) = theta`.
    /// For `x >= x_M` returns `(M, 0)`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = &self.nodes;
        let m = n.len() - 1;
        if x >= n[m] {
            return (m, 0.0);
        }
        if x <= 0.0 {
            return (0, 0.0);
        }
        // index of the last node <= x
        let i = n.partition_point(|&v| v <= x) - 1;
        (i, (x - n[i]) / (n[i + 1] - n[i]))
    }

    /// Stable hex digest of the node values.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for x in &self.nodes {
            h.update(x.to_le_bytes());
        }
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_builds_64_nodes() {
        let g = GridSpec::default().build().unwrap();
        assert_eq!(g.len(), 65);
        assert_eq!(g.nodes()[0], 0.0);
        assert!((g.x_max() - 4.0).abs() < 1e-12);
        assert!(g.nodes().contains(&1.0));
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(Grid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.1, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn hats_form_partition_of_unity_and_reproduce_x() {
        let g = GridSpec { nodes: 20, ratio: 1.3, transition: 1.0, x_max: 3.0 }.build().unwrap();
        for k in 0..500 {
            let x = 4.0 * k as f64 / 499.0;
            let s: f64 = (0..g.len()).map(|l| g.hat(l, x)).sum();
            assert!((s - 1.0).abs() < 1e-14, "x={x} sum={s}");
            if x <= g.x_max() {
                let e: f64 = (0..g.len()).map(|l| g.nodes()[l] * g.hat(l, x)).sum();
                assert!((e - x).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn locate_matches_hat() {
        let g = Grid::new(vec![0.0, 0.5, 1.0, 2.0]).unwrap();
        let (m, th) = g.locate(1.5);
        assert_eq!(m, 2);
        assert!((th - 0.5).abs() < 1e-15);
        assert_eq!(g.locate(5.0), (3, 0.0));
        assert_eq!(g.locate(0.0), (0, 0.0));
    }
}
