//! Fixed-order Gauss–Legendre rules and the endpoint-regularising maps used
//! by the kernel and projection integrals.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess for the i-th root on [-1, 1].
            let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, t);
                dp = d;
                let dt = p / d;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, t);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            // map [-1,1] -> [0,1]
            nodes[i] = 0.5 * (1.0 - t);
            nodes[n - 1 - i] = 0.5 * (1.0 + t);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        let mut pairs: Vec<(f64, f64)> = nodes.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self { nodes, weights }
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

    /// Plain Gauss–Legendre integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(a + h * u))
            .sum::<f64>()
            * h
    }

    /// Nodes and weights of the cosine-mapped rule on `[a, b]`:
    /// `x = a + (b - a)(1 - cos(pi u))/2`. Square-root endpoint behaviour at
    /// either end becomes smooth in `u`, so the rule stays spectrally accurate.
    pub fn cosine_mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&u, &w)| {
            let (s, c) = (PI * u).sin_cos();
            (a + half * (1.0 - c), w * half * PI * s)
        })
    }
}

/// Legendre polynomial `P_n(t)` and its derivative.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64] {
            let q = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let got = q.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert_relative_eq!(got, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let q = GaussLegendre::new(37);
        assert_relative_eq!(q.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cosine_map_handles_sqrt_endpoints() {
        let q = GaussLegendre::new(24);
        let got: f64 = q
            .cosine_mapped(0.0, 1.0)
            .map(|(x, w)| w * (x * (1.0 - x)).sqrt())
            .sum();
        assert_relative_eq!(got, PI / 8.0, max_relative = 1e-13);
    }
}
