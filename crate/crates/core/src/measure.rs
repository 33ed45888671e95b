//! Atomic measures on an energy grid, their moments, and small-energy functionals.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::GaussLegendre;

/// A nonnegative measure `Σ wᵢ δ(x − xᵢ)` on a grid; `w₀` is the condensate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    grid: Grid,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    /// `Σ |wᵢ − vᵢ|`
    pub d0: f64,
    /// `Σ (1 + xᵢ) |wᵢ − vᵢ|`
    pub d1: f64,
    /// `Σ xᵢ |wᵢ − vᵢ|`
    pub d1_circ: f64,
}

/// Parameters of the small-energy functionals `N_{α,p}` and `A_{β,p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFunctionalParams {
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl LocalFunctionalParams {
    /// The exponents tied to a kernel with exponent `η`: `p = 3/2 + α`, `β = (1 − η − α)/2`.
    pub fn for_kernel(alpha: f64, eta: f64, epsilon: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha < 1.0 - eta) {
            return Err(Error::config(format!("need 0 <= alpha < 1 - eta, got alpha = {alpha}, eta = {eta}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::config(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { alpha, p: 1.5 + alpha, beta: 0.5 * (1.0 - eta - alpha), epsilon })
    }
}

/// Result of the probe-set infimum defining `N̲_{α,p}(F, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Underline {
    pub value: f64,
    /// The probe `δ` attaining the minimum. `0` marks the limit `δ ↓ 0`.
    pub delta: f64,
    /// The infimum vanishes, so bounds divided by it are vacuous.
    pub infimum_is_zero: bool,
}

impl DiscreteMeasure {
    pub fn new(grid: Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::config(format!(
                "measure has {} weights for a grid of {} nodes",
                weights.len(),
                grid.len()
            )));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Domain(format!("weight {i} is {w}; weights must be finite and nonnegative")));
        }
        Ok(Self { grid, weights })
    }

    /// Builds a measure from signed weights without the positivity check.
    /// Used by the integrator for intermediate stages.
    pub(crate) fn from_raw(grid: Grid, weights: Vec<f64>) -> Self {
        Self { grid, weights }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, weights: vec![0.0; n] }
    }

    /// `m δ₀`.
    pub fn condensate(grid: Grid, m: f64) -> Result<Self> {
        let mut w = vec![0.0; grid.len()];
        w[0] = m;
        Self::new(grid, w)
    }

    /// Atoms `(x, w)` placed on the grid `{0} ∪ {x}`.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nodes = vec![0.0];
        let mut weights = vec![0.0];
        for (x, w) in atoms {
            if x == *nodes.last().unwrap() {
                *weights.last_mut().unwrap() += w;
            } else {
                nodes.push(x);
                weights.push(w);
            }
        }
        Self::new(Grid::new(nodes)?, weights)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// `F({0})`.
    pub fn w0(&self) -> f64 {
        self.weights[0]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), weights: self.weights.iter().map(|w| s * w).collect() }
    }

    /// `(N, E) = (Σ wᵢ, Σ xᵢ wᵢ)`.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.weights.iter().sum();
        let e = self.grid.nodes().iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        (n, e)
    }

    pub fn mass(&self) -> f64 {
        self.moments().0
    }

    pub fn energy(&self) -> f64 {
        self.moments().1
    }

    /// `∫ φ dF`.
    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.grid.nodes().iter().zip(&self.weights).map(|(&x, &w)| w * phi(x)).sum()
    }

    /// `F([0, ε])`.
    pub fn mass_below(&self, eps: f64) -> f64 {
        self.grid.nodes().iter().zip(&self.weights).filter(|(x, _)| **x <= eps).map(|(_, w)| w).sum()
    }

    pub fn norms(&self, other: &DiscreteMeasure) -> Result<Norms> {
        if self.grid.nodes() != other.grid.nodes() {
            return Err(Error::config("measures live on different grids"));
        }
        let mut n = Norms { d0: 0.0, d1: 0.0, d1_circ: 0.0 };
        for ((x, a), b) in self.grid.nodes().iter().zip(&self.weights).zip(&other.weights) {
            let d = (a - b).abs();
            n.d0 += d;
            n.d1 += (1.0 + x) * d;
            n.d1_circ += x * d;
        }
        Ok(n)
    }

    /// `N_{0,p}(F, ε) = Σ_{xᵢ ≤ ε} (1 − xᵢ/ε)^p wᵢ`.
    pub fn n0(&self, p: f64, eps: f64) -> f64 {
        let mut acc = 0.0;
        for (&x, &w) in self.grid.nodes().iter().zip(&self.weights) {
            if x > eps {
                break;
            }
            acc += (1.0 - x / eps).powf(p) * w;
        }
        acc
    }

    /// `N_{α,p}(F, ε) = ε^{−α} N_{0,p}(F, ε)`.
    pub fn n_functional(&self, params: &LocalFunctionalParams) -> f64 {
        params.epsilon.powf(-params.alpha) * self.n0(params.p, params.epsilon)
    }

    /// `A_{0,p}(F, ε) = Σ_{0 < xᵢ ≤ ε} (xᵢ/ε)^p wᵢ`.
    pub fn a0(&self, p: f64, eps: f64) -> f64 {
        let mut acc = 0.0;
        for (&x, &w) in self.grid.nodes().iter().zip(&self.weights).skip(1) {
            if x > eps {
                break;
            }
            acc += (x / eps).powf(p) * w;
        }
        acc
    }

    /// `A_{β,p}(F, ε) = ε^{−β} A_{0,p}(F, ε)`.
    pub fn a_functional(&self, params: &LocalFunctionalParams) -> f64 {
        params.epsilon.powf(-params.beta) * self.a0(params.p, params.epsilon)
    }

    /// `inf_{0<δ≤ε} N_{α,p}(F, δ)` over a probe set: `ε`, nodes and midpoints
    /// in `(0, ε]`, `ε 2^{−k}` down to the first positive node, and the exact
    /// limits on `(0, x₁)` where only the condensate is seen.
    pub fn n_underline(&self, params: &LocalFunctionalParams) -> Underline {
        let (alpha, p, eps) = (params.alpha, params.p, params.epsilon);
        let x = self.grid.nodes();
        let w0 = self.weights[0];
        let x1 = x[1];
        let eval = |d: f64| d.powf(-alpha) * self.n0(p, d);

        let mut best = Underline { value: f64::INFINITY, delta: eps, infimum_is_zero: false };
        let mut consider = |d: f64, v: f64| {
            if v < best.value {
                best.value = v;
                best.delta = d;
            }
        };
        consider(eps, eval(eps));
        // On (0, min(x₁, ε)] only the condensate contributes: w₀ δ^{−α}.
        let edge = x1.min(eps);
        if alpha == 0.0 || w0 == 0.0 {
            consider(0.0, w0);
        } else {
            consider(edge, w0 * edge.powf(-alpha));
        }
        for i in 1..x.len() {
            if x[i] > eps {
                break;
            }
            consider(x[i], eval(x[i]));
            let mid = 0.5 * (x[i - 1] + x[i]);
            if mid > 0.0 {
                consider(mid, eval(mid));
            }
        }
        let mut d = eps;
        while d >= x1 {
            consider(d, eval(d));
            d *= 0.5;
        }
        best.infimum_is_zero = best.value == 0.0;
        best
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["x", "w"])?;
        for (x, w) in self.grid.nodes().iter().zip(&self.weights) {
            wtr.write_record([format!("{x:.16e}"), format!("{w:.16e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "w"] {
            return Err(Error::config(format!("measure CSV must have header `x,w`, found `{}`", headers.as_slice())));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::config_at(line + 2, format!("bad number `{s}`: {e}")))
            };
            nodes.push(parse(&rec[0])?);
            weights.push(parse(&rec[1])?);
        }
        Self::new(Grid::new(nodes)?, weights)
    }
}

const CELL_NODES: usize = 24;

/// Projects `dG = x^{α−1} h(x) dx` onto the grid by hat moments,
/// `wₗ = ∫ hatₗ dG`. Because the hats reproduce `1` and `x` on `[0, x_M]`,
/// mass and energy below `x_M` are preserved; mass beyond `x_M` lands on the
/// top node. The tail is integrated out to `x_M + tail_len`.
pub fn project_density(grid: &Grid, alpha: f64, h: &dyn Fn(f64) -> f64, tail_len: f64) -> Result<DiscreteMeasure> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("density exponent must satisfy alpha > 0, got {alpha}")));
    }
    let x = grid.nodes();
    let m = x.len() - 1;
    let gl = GaussLegendre::new(CELL_NODES);
    let mut w = vec![0.0; x.len()];
    // First cell: x = x₁ t^{1/α}, so x^{α−1} dx = (x₁^α / α) dt.
    let x1 = x[1];
    for (t, wt) in gl.cosine_mapped(0.0, 1.0) {
        let xx = x1 * t.powf(1.0 / alpha);
        let g = h(xx) * wt * x1.powf(alpha) / alpha;
        let theta = xx / x1;
        w[0] += (1.0 - theta) * g;
        w[1] += theta * g;
    }
    for c in 1..m {
        let (a, b) = (x[c], x[c + 1]);
        for (xx, wt) in gl.cosine_mapped(a, b) {
            let g = xx.powf(alpha - 1.0) * h(xx) * wt;
            let theta = (xx - a) / (b - a);
            w[c] += (1.0 - theta) * g;
            w[c + 1] += theta * g;
        }
    }
    if tail_len > 0.0 {
        let xm = x[m];
        let pieces = 32;
        let step = tail_len / pieces as f64;
        for k in 0..pieces {
            let a = xm + k as f64 * step;
            w[m] += gl.integrate(a, a + step, |xx| xx.powf(alpha - 1.0) * h(xx));
        }
    }
    for v in &mut w {
        if *v < 0.0 && *v > -1e-300 {
            *v = 0.0;
        }
    }
    DiscreteMeasure::new(grid.clone(), w)
}

/// Projects a regular density `f(x) √x dx`, moving the share that lands on
/// the condensate node to the first positive node so that `w₀ = 0`.
pub fn project_regular(grid: &Grid, f: &dyn Fn(f64) -> f64, tail_len: f64) -> Result<DiscreteMeasure> {
    let mut m = project_density(grid, 1.5, f, tail_len)?;
    let w0 = m.weights[0];
    m.weights[0] = 0.0;
    m.weights[1] += w0;
    Ok(m)
}

/// Decreasing positive profiles `g` for the generated initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `g(u) = e^{−u}`
    Exponential,
    /// `g(u) = e^{−u²}`
    Gaussian,
}

impl Profile {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Profile::Exponential => (-u).exp(),
            Profile::Gaussian => (-u * u).exp(),
        }
    }

    /// `∫₀^∞ u^a g(u) du`.
    pub fn moment(&self, a: f64) -> f64 {
        use statrs::function::gamma::gamma;
        match self {
            Profile::Exponential => gamma(a + 1.0),
            Profile::Gaussian => 0.5 * gamma(0.5 * (a + 1.0)),
        }
    }

    /// Support length in `u` beyond which `g` is below roundoff.
    fn cutoff(&self) -> f64 {
        match self {
            Profile::Exponential => 40.0,
            Profile::Gaussian => 7.0,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(Profile::Exponential),
            "gaussian" => Ok(Profile::Gaussian),
            other => Err(Error::config(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleOptions {
    /// Target `E/N` as a fraction of the admissible maximum `1/(4p)`.
    pub energy_fraction: f64,
    /// Extra factor on `λ` on top of the grid-resolution allowance.
    pub safety: f64,
}

impl Default for ExampleOptions {
    fn default() -> Self {
        Self { energy_fraction: 0.5, safety: 1.05 }
    }
}

/// The generated datum and the constants that went into it.
#[derive(Debug, Clone)]
pub struct ExampleInitial {
    pub measure: DiscreteMeasure,
    pub r: f64,
    pub c0: f64,
    pub lambda: f64,
    /// The threshold `C₀` of the local condition.
    pub c0_threshold: f64,
}

/// The threshold `C₀ = 2^{9.5+α}(4p)^{2β} / (log2 · b₀) · (p/β)^{2p} · (E/N)^{1/2+2β}`.
pub fn local_threshold(alpha: f64, eta: f64, b0: f64, e_over_n: f64) -> f64 {
    let p = 1.5 + alpha;
    let beta = 0.5 * (1.0 - eta - alpha);
    2f64.powf(9.5 + alpha) * (4.0 * p).powf(2.0 * beta) / (std::f64::consts::LN_2 * b0)
        * (p / beta).powf(2.0 * p)
        * e_over_n.powf(0.5 + 2.0 * beta)
}

/// The cold, concentrated initial datum `F₀ = λ x^{α−1} g(Rx) dx`.
///
/// `R` is chosen so that `E/N` is `energy_fraction / (4p)`; `λ` so that
/// `λ c₀/α ≥ C₀` with `c₀ = g(R/2)`, inflated by `max_ratio^α` to absorb
/// the grid's resolution of the small-energy mass. The caller should still
/// confirm the result with the verifier's local-condition check.
pub fn generate_example_initial(
    alpha: f64,
    eta: f64,
    b0: f64,
    profile: Profile,
    grid: &Grid,
    opts: ExampleOptions,
) -> Result<ExampleInitial> {
    if !(alpha > 0.0 && alpha < 1.0 - eta) {
        return Err(Error::config(format!("need 0 < alpha < 1 - eta, got alpha = {alpha}, eta = {eta}")));
    }
    if !(b0 > 0.0 && b0 < 1.0) {
        return Err(Error::config(format!("b0 must lie in (0, 1), got {b0}")));
    }
    if !(opts.energy_fraction > 0.0 && opts.energy_fraction < 1.0) || !(opts.safety >= 1.0) {
        return Err(Error::config("energy_fraction must lie in (0, 1) and safety must be >= 1"));
    }
    let p = 1.5 + alpha;
    let target = opts.energy_fraction / (4.0 * p);
    let r = profile.moment(alpha) / profile.moment(alpha - 1.0) / target;
    let tail = (profile.cutoff() / r - grid.x_max()).max(0.0);
    let g0 = project_density(grid, alpha, &|x| profile.eval(r * x), tail)?;
    let (n, e) = g0.moments();
    if !(n > 0.0) || e / n >= 1.0 / (4.0 * p) {
        return Err(Error::Generation(format!(
            "projected datum has E/N = {} against the bound 1/(4p) = {}",
            e / n,
            1.0 / (4.0 * p)
        )));
    }
    let c0 = profile.eval(0.5 * r);
    let threshold = local_threshold(alpha, eta, b0, e / n);
    let lambda = opts.safety * grid.max_ratio().powf(alpha) * threshold * alpha / c0;
    Ok(ExampleInitial { measure: g0.scaled(lambda), r, c0, lambda, c0_threshold: threshold })
}

/// Both margins of the local condition `E/N ≤ 1/(4p)` and
/// `inf_{0<ε≤1/2} F([0,ε])/ε^α ≥ C₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCondition {
    pub alpha: f64,
    pub p: f64,
    #[serde(with = "crate::float_serde")]
    pub e_over_n: f64,
    pub energy_bound: f64,
    #[serde(with = "crate::float_serde")]
    pub infimum: f64,
    /// The `ε` (or left limit) where the infimum is attained.
    pub infimum_at: f64,
    #[serde(with = "crate::float_serde")]
    pub c0_threshold: f64,
    pub energy_ok: bool,
    pub mass_ok: bool,
}

impl LocalCondition {
    pub fn passes(&self) -> bool {
        self.energy_ok && self.mass_ok
    }

    /// `1/(4p) − E/N`.
    pub fn energy_margin(&self) -> f64 {
        self.energy_bound - self.e_over_n
    }

    /// `inf/C₀ − 1`.
    pub fn mass_margin(&self) -> f64 {
        self.infimum / self.c0_threshold - 1.0
    }
}

/// Evaluates the local condition exactly on the atomic measure.
///
/// `ε ↦ F([0,ε])` is a right-continuous step function, so the infimum of
/// `F([0,ε])/ε^α` over `(0, 1/2]` is the smallest of the left limits at the
/// nodes in `(0, 1/2]` and the value at `1/2`.
pub fn local_condition(f: &DiscreteMeasure, alpha: f64, eta: f64, b0: f64) -> Result<LocalCondition> {
    if !(alpha >= 0.0 && alpha < 1.0 - eta) {
        return Err(Error::Precondition(format!("need 0 <= alpha < 1 - eta, got alpha = {alpha}, eta = {eta}")));
    }
    let p = 1.5 + alpha;
    let (n, e) = f.moments();
    let e_over_n = if n > 0.0 { e / n } else { f64::INFINITY };
    let x = f.grid().nodes();
    let w = f.weights();
    let mut cum = 0.0;
    let mut best = (f64::INFINITY, 0.5);
    for i in 0..x.len() {
        let next = if i + 1 < x.len() { x[i + 1].min(0.5) } else { 0.5 };
        if x[i] > 0.5 {
            break;
        }
        cum += w[i];
        // left limit at `next`, or the value at 1/2
        let v = cum / next.powf(alpha);
        if v < best.0 {
            best = (v, next);
        }
        if next >= 0.5 {
            break;
        }
    }
    let threshold = local_threshold(alpha, eta, b0, e_over_n);
    let energy_bound = 1.0 / (4.0 * p);
    Ok(LocalCondition {
        alpha,
        p,
        e_over_n,
        energy_bound,
        infimum: best.0,
        infimum_at: best.1,
        c0_threshold: threshold,
        energy_ok: e_over_n <= energy_bound,
        mass_ok: best.0 >= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(alpha: f64, p: f64, eps: f64) -> LocalFunctionalParams {
        LocalFunctionalParams { alpha, p, beta: 0.0, epsilon: eps }
    }

    #[test]
    fn moment_examples() {
        let g = Grid::uniform(4, 1.0).unwrap();
        assert_eq!(DiscreteMeasure::condensate(g.clone(), 2.0).unwrap().moments(), (2.0, 0.0));
        let f = DiscreteMeasure::from_atoms(&[(1.0, 1.0), (3.0, 2.0)]).unwrap();
        assert_eq!(f.moments(), (3.0, 7.0));
        assert_eq!(DiscreteMeasure::zeros(g).moments(), (0.0, 0.0));
    }

    #[test]
    fn norms_examples() {
        let grid = Grid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let f = DiscreteMeasure::new(grid.clone(), vec![1.0, 1.0, 1.5]).unwrap();
        let g = DiscreteMeasure::new(grid.clone(), vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.norms(&f).unwrap(), Norms { d0: 0.0, d1: 0.0, d1_circ: 0.0 });
        assert_eq!(f.norms(&g).unwrap(), Norms { d0: 0.5, d1: 1.5, d1_circ: 1.0 });
        let other = DiscreteMeasure::zeros(Grid::uniform(2, 3.0).unwrap());
        assert!(f.norms(&other).is_err());
    }

    #[test]
    fn n_and_a_functional_examples() {
        let eps = 0.4;
        let d = DiscreteMeasure::condensate(Grid::uniform(4, 1.0).unwrap(), 3.0).unwrap();
        assert_eq!(d.n0(2.0, eps), 3.0);
        assert_eq!(d.a0(1.5, eps), 0.0);
        let at_eps = DiscreteMeasure::from_atoms(&[(eps, 1.0)]).unwrap();
        assert_eq!(at_eps.n0(2.0, eps), 0.0);
        assert_eq!(at_eps.a0(2.0, eps), 1.0);
        let half = DiscreteMeasure::from_atoms(&[(eps / 2.0, 1.0)]).unwrap();
        assert_relative_eq!(half.n0(2.0, eps), 0.25);
        let two = DiscreteMeasure::from_atoms(&[(eps / 2.0, 2.0)]).unwrap();
        assert_relative_eq!(two.a0(1.5, eps), 2.0 * 2f64.powf(-1.5));
        assert_relative_eq!(half.n_functional(&params(0.5, 2.0, eps)), 0.25 / eps.sqrt());
    }

    #[test]
    fn n_underline_cases() {
        let grid = Grid::new(vec![0.0, 0.1, 0.2, 0.5, 1.0]).unwrap();
        // only the condensate in [0, ε]
        let f = DiscreteMeasure::new(grid.clone(), vec![0.7, 0.0, 0.0, 1.0, 2.0]).unwrap();
        let u = f.n_underline(&params(0.0, 2.0, 0.3));
        assert_eq!(u.value, 0.7);
        assert!(!u.infimum_is_zero);
        let empty = DiscreteMeasure::new(grid.clone(), vec![0.0, 0.0, 0.0, 1.0, 2.0]).unwrap();
        let u = empty.n_underline(&params(0.3, 2.0, 0.3));
        assert_eq!(u.value, 0.0);
        assert!(u.infimum_is_zero);
        // w₀ = 0 with mass in (0, ε]: small δ sees nothing
        let g = DiscreteMeasure::new(grid, vec![0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(g.n_underline(&params(0.2, 2.0, 0.5)).infimum_is_zero);
        let p = params(0.2, 2.0, 0.5);
        assert!(f.n_underline(&p).value <= f.n_functional(&p));
    }

    #[test]
    fn projection_preserves_moments_of_polynomial_density() {
        let grid = crate::grid::GridSpec::default().build().unwrap();
        // dG = x^{-1/2} (1 + x)·1{x ≤ x_M} dx, exact moments by hand
        let xm = grid.x_max();
        let h = |x: f64| if x <= xm { 1.0 + x } else { 0.0 };
        let g = project_density(&grid, 0.5, &h, 0.0).unwrap();
        let (n, e) = g.moments();
        let n_exact = 2.0 * xm.sqrt() + 2.0 / 3.0 * xm.powf(1.5);
        let e_exact = 2.0 / 3.0 * xm.powf(1.5) + 0.4 * xm.powf(2.5);
        assert_relative_eq!(n, n_exact, max_relative = 1e-10);
        assert_relative_eq!(e, e_exact, max_relative = 1e-10);
    }

    #[test]
    fn regular_projection_has_no_condensate() {
        let grid = crate::grid::GridSpec::default().build().unwrap();
        let f = project_regular(&grid, &|x| (-x).exp(), 40.0).unwrap();
        assert_eq!(f.w0(), 0.0);
        // ∫ e^{−x} √x dx = Γ(3/2)
        assert_relative_eq!(f.mass(), std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn example_initial_energy_ratio_and_scaling() {
        let grid = crate::grid::GridSpec::default().build().unwrap();
        let ex = generate_example_initial(0.5, 0.0, 0.9, Profile::Exponential, &grid, ExampleOptions::default()).unwrap();
        let (n, e) = ex.measure.moments();
        assert!(e / n < 1.0 / 8.0);
        assert!(n > 0.0 && e > 0.0);
        let doubled = ex.measure.scaled(2.0);
        let (n2, e2) = doubled.moments();
        assert_relative_eq!(e2 / n2, e / n, max_relative = 1e-14);
        assert!(generate_example_initial(0.6, 0.5, 0.06, Profile::Exponential, &grid, ExampleOptions::default()).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let f = DiscreteMeasure::from_atoms(&[(0.1, 1.0 / 3.0), (2.5, 1e-17), (3.0, 7.0)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        f.write_csv(&p).unwrap();
        assert_eq!(DiscreteMeasure::read_csv(&p).unwrap(), f);
    }
}
