//! Hat-collocation right-hand side and the explicit integrator.
//!
//! Testing the weak equation against every nodal hat gives
//! `wₗ' = Q(hatₗ; F)`. Both the quadratic and cubic parts are precomputed as
//! sparse coefficient lists, so one evaluation costs one pass over them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{build_table, w_hard_closed, w_quadrature, KernelFamily, KernelModel, KernelTable, QuadConfig, WRule};
use crate::collision::j_breakpoints;
use crate::measure::DiscreteMeasure;

/// One row of the quadratic operator for the pair `(j, k)`.
#[derive(Debug, Clone)]
struct PairRow {
    j: u32,
    k: u32,
    /// Coefficients for hats `0..coeffs.len()`, multiplicity included.
    coeffs: Vec<f64>,
    /// Energy lost beyond the last node, per unit `wⱼ w_k`.
    flux: f64,
}

/// The collocation operator on a fixed grid.
#[derive(Debug, Clone)]
pub struct CollocationOperator {
    grid: Grid,
    table: KernelTable,
    // cubic part, structure of arrays; multiplicity folded into `cw`
    ci: Vec<u32>,
    cj: Vec<u32>,
    ck: Vec<u32>,
    cm: Vec<u32>,
    cw: Vec<f64>,
    ctheta: Vec<f64>,
    cflux: Vec<f64>,
    pairs: Vec<PairRow>,
}

/// `dw/dt` together with the energy-flux rate through the top node.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub dw: Vec<f64>,
    pub flux: f64,
}

fn kernel_value(model: &KernelModel, x: f64, y: f64, z: f64, rule: &WRule) -> Result<f64> {
    if model.family() == KernelFamily::HardSphere {
        Ok(w_hard_closed(x, y, z))
    } else {
        w_quadrature(model, x, y, z, rule)
    }
}

impl CollocationOperator {
    pub fn new(model: &KernelModel, grid: &Grid, quad: QuadConfig) -> Result<Self> {
        let table = build_table(model, grid, quad)?;
        Self::with_table(table)
    }

    pub fn with_table(table: KernelTable) -> Result<Self> {
        let grid = table.grid().clone();
        let model = table.model().clone();
        let quad = table.quad();
        let rule = WRule::new(quad)?;
        let x = grid.nodes();
        let n = x.len();
        let xm = grid.x_max();

        let mut op = CollocationOperator {
            grid: grid.clone(),
            table,
            ci: Vec::new(),
            cj: Vec::new(),
            ck: Vec::new(),
            cm: Vec::new(),
            cw: Vec::new(),
            ctheta: Vec::new(),
            cflux: Vec::new(),
            pairs: Vec::new(),
        };
        for i in 0..n {
            for k in 0..n {
                for j in 0..=k {
                    let w = op.table.get(i, j, k);
                    if w == 0.0 {
                        continue;
                    }
                    let mult = if j == k { 1.0 } else { 2.0 };
                    let xs = x[j] + x[k] - x[i];
                    let (m, theta) = grid.locate(xs);
                    op.ci.push(i as u32);
                    op.cj.push(j as u32);
                    op.ck.push(k as u32);
                    op.cm.push(m as u32);
                    op.cw.push(mult * w);
                    op.ctheta.push(theta);
                    op.cflux.push(-(xs - xm).max(0.0));
                }
            }
        }

        let pair_list: Vec<(usize, usize)> = (0..n).flat_map(|k| (0..=k).map(move |j| (j, k))).collect();
        let rows: Vec<Result<Option<PairRow>>> = pair_list
            .par_iter()
            .map(|&(j, k)| pair_row(&model, &grid, &rule, j, k))
            .collect();
        for r in rows {
            if let Some(row) = r? {
                op.pairs.push(row);
            }
        }
        Ok(op)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn model(&self) -> &KernelModel {
        self.table.model()
    }

    pub fn cubic_terms(&self) -> usize {
        self.cw.len()
    }

    /// Evaluates `wₗ' = Q(hatₗ; F)` for every `l`.
    pub fn rhs(&self, w: &[f64]) -> Rhs {
        let mut dw = vec![0.0; w.len()];
        let mut flux = 0.0;
        for p in &self.pairs {
            let c = w[p.j as usize] * w[p.k as usize];
            if c == 0.0 {
                continue;
            }
            for (d, a) in dw.iter_mut().zip(&p.coeffs) {
                *d += c * a;
            }
            flux += c * p.flux;
        }
        let top = w.len() - 1;
        for t in 0..self.cw.len() {
            let (i, j, k) = (self.ci[t] as usize, self.cj[t] as usize, self.ck[t] as usize);
            let c = self.cw[t] * w[i] * w[j] * w[k];
            if c == 0.0 {
                continue;
            }
            dw[i] += c;
            dw[j] -= c;
            dw[k] -= c;
            let m = self.cm[t] as usize;
            let th = self.ctheta[t];
            dw[m] += (1.0 - th) * c;
            if m < top {
                dw[m + 1] += th * c;
            }
            flux += self.cflux[t] * c;
        }
        Rhs { dw, flux }
    }

    /// `maxᵢ |∂wᵢ'/∂wᵢ|`, summed term by term in absolute value. This bounds
    /// the diagonal of the Jacobian and serves as a stiffness estimate for
    /// choosing a stable explicit step.
    pub fn stiffness(&self, w: &[f64]) -> f64 {
        let mut diag = vec![0.0; w.len()];
        for p in &self.pairs {
            let (j, k) = (p.j as usize, p.k as usize);
            if j == k {
                if let Some(a) = p.coeffs.get(j) {
                    diag[j] += 2.0 * (w[j] * a).abs();
                }
            } else {
                if let Some(a) = p.coeffs.get(j) {
                    diag[j] += (w[k] * a).abs();
                }
                if let Some(a) = p.coeffs.get(k) {
                    diag[k] += (w[j] * a).abs();
                }
            }
        }
        for t in 0..self.cw.len() {
            let (i, j, k) = (self.ci[t] as usize, self.cj[t] as usize, self.ck[t] as usize);
            let cw = self.cw[t];
            diag[i] += (cw * w[j] * w[k]).abs();
            let loss = (cw * w[i]).abs();
            if j == k {
                diag[j] += 4.0 * loss * w[j].abs();
            } else {
                diag[j] += loss * w[k].abs();
                diag[k] += loss * w[j].abs();
            }
        }
        diag.into_iter().fold(0.0, f64::max)
    }
}

/// Quadratic coefficients `J[hatₗ](xⱼ, x_k)` for all `l`, by outer
/// quadrature over `x ∈ [0, xⱼ + x_k]`.
fn pair_row(model: &KernelModel, grid: &Grid, rule: &WRule, j: usize, k: usize) -> Result<Option<PairRow>> {
    let x = grid.nodes();
    let (y, z) = (x[j], x[k]);
    let s = y + z;
    if s == 0.0 {
        return Ok(None);
    }
    let xm = grid.x_max();
    let n = x.len();
    let pts = j_breakpoints(y, z, x);
    let mut coeffs = vec![0.0; n];
    let mut total = 0.0;
    let mut flux = 0.0;
    for seg in pts.windows(2) {
        for (xx, wx) in rule.x_rule().cosine_mapped(seg[0], seg[1]) {
            let w = kernel_value(model, xx, y, z, rule)?;
            if w == 0.0 {
                continue;
            }
            let v = 0.5 * wx * w * xx.sqrt();
            for q in [xx, s - xx] {
                let (m, th) = grid.locate(q);
                coeffs[m] += (1.0 - th) * v;
                if m + 1 < n {
                    coeffs[m + 1] += th * v;
                }
            }
            total += v;
            flux -= v * ((xx - xm).max(0.0) + (s - xx - xm).max(0.0));
        }
    }
    if total == 0.0 {
        return Ok(None);
    }
    coeffs[j] -= total;
    coeffs[k] -= total;
    let mult = if j == k { 1.0 } else { 2.0 };
    let last = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |p| p + 1);
    coeffs.truncate(last);
    for c in &mut coeffs {
        *c *= mult;
    }
    Ok(Some(PairRow { j: j as u32, k: k as u32, coeffs, flux: mult * flux }))
}

/// What to do when an RK4 step produces negative weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityPolicy {
    /// Clip to zero and shrink the positive increments to restore `N`.
    ClipAndLog,
    /// Halve `dt` and retry.
    RejectStep,
}

/// Outcome of one accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub weights: Vec<f64>,
    pub dt: f64,
    pub flux: f64,
    pub clipped: f64,
    pub retries: usize,
}

fn check_finite(v: &[f64], t: f64) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Step { t, msg: "non-finite collision derivative".into() });
    }
    Ok(())
}

/// One classical RK4 step of the weight system; returns the new weights and
/// the integrated energy flux.
pub fn rk4(op: &CollocationOperator, w: &[f64], dt: f64, t: f64, k1: Option<&Rhs>) -> Result<(Vec<f64>, f64)> {
    let n = w.len();
    let owned;
    let k1 = match k1 {
        Some(k) => k,
        None => {
            owned = op.rhs(w);
            &owned
        }
    };
    check_finite(&k1.dw, t)?;
    let stage = |k: &Rhs, h: f64| -> Vec<f64> { (0..n).map(|i| w[i] + h * k.dw[i]).collect() };
    let k2 = op.rhs(&stage(k1, 0.5 * dt));
    check_finite(&k2.dw, t)?;
    let k3 = op.rhs(&stage(&k2, 0.5 * dt));
    check_finite(&k3.dw, t)?;
    let k4 = op.rhs(&stage(&k3, dt));
    check_finite(&k4.dw, t)?;
    let out = (0..n)
        .map(|i| w[i] + dt / 6.0 * (k1.dw[i] + 2.0 * k2.dw[i] + 2.0 * k3.dw[i] + k4.dw[i]))
        .collect();
    let flux = dt / 6.0 * (k1.flux + 2.0 * k2.flux + 2.0 * k3.flux + k4.flux);
    Ok((out, flux))
}

/// Clips negative weights and scales the positive increments so the total
/// mass is unchanged. Returns the clipped mass.
pub fn clip_preserving_mass(old: &[f64], new: &mut [f64]) -> f64 {
    let clipped: f64 = new.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    if clipped == 0.0 {
        return 0.0;
    }
    for v in new.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let pos: f64 = new.iter().zip(old).map(|(n, o)| (n - o).max(0.0)).sum();
    if pos > 0.0 {
        let scale = ((pos - clipped) / pos).max(0.0);
        for (n, o) in new.iter_mut().zip(old) {
            let d = *n - *o;
            if d > 0.0 {
                *n = *o + d * scale;
            }
        }
    }
    clipped
}

/// Advances `state` by `dt` with RK4 and the chosen positivity policy.
pub fn step_with(
    op: &CollocationOperator,
    state: &DiscreteMeasure,
    dt: f64,
    t: f64,
    policy: PositivityPolicy,
    max_retries: usize,
) -> Result<StepOutcome> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be positive, got {dt}")));
    }
    if state.grid().nodes() != op.grid().nodes() {
        return Err(Error::config("state and operator use different grids"));
    }
    let w = state.weights();
    let k1 = op.rhs(w);
    let mut h = dt;
    for retry in 0..=max_retries {
        let (mut out, flux) = rk4(op, w, h, t, Some(&k1))?;
        let negative = out.iter().any(|v| *v < 0.0);
        match policy {
            PositivityPolicy::ClipAndLog => {
                let clipped = clip_preserving_mass(w, &mut out);
                return Ok(StepOutcome { weights: out, dt: h, flux, clipped, retries: retry });
            }
            PositivityPolicy::RejectStep if !negative => {
                return Ok(StepOutcome { weights: out, dt: h, flux, clipped: 0.0, retries: retry });
            }
            PositivityPolicy::RejectStep => h *= 0.5,
        }
    }
    Err(Error::Step { t, msg: format!("negative weights persisted after {max_retries} step halvings") })
}

/// Advances `state` by one RK4 step of size `dt`, clipping negatives.
pub fn step(op: &CollocationOperator, state: &DiscreteMeasure, dt: f64) -> Result<DiscreteMeasure> {
    let out = step_with(op, state, dt, 0.0, PositivityPolicy::ClipAndLog, 0)?;
    DiscreteMeasure::new(state.grid().clone(), out.weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid {
        Grid::new(vec![0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0]).unwrap()
    }

    #[test]
    fn rhs_conserves_mass_and_energy_inside() {
        let grid = small_grid();
        let q = QuadConfig { s_nodes: 16, theta_nodes: 16, x_nodes: 4 };
        for model in [KernelModel::hard_sphere(), KernelModel::yukawa(), KernelModel::power(0.5, 0.0625).unwrap()] {
            let op = CollocationOperator::new(&model, &grid, q).unwrap();
            let w: Vec<f64> = (0..grid.len()).map(|i| if i < 5 { 1.0 + 0.1 * i as f64 } else { 0.0 }).collect();
            let r = op.rhs(&w);
            let dn: f64 = r.dw.iter().sum();
            let de: f64 = r.dw.iter().zip(grid.nodes()).map(|(d, x)| d * x).sum();
            let scale: f64 = r.dw.iter().map(|d| d.abs()).sum();
            assert!(dn.abs() <= 1e-13 * scale, "{:?}: dN = {dn}", model.family());
            assert!((de - r.flux).abs() <= 1e-12 * scale, "{:?}: dE = {de}, flux {}", model.family(), r.flux);
        }
    }

    #[test]
    fn pure_condensate_is_stationary() {
        let grid = small_grid();
        let op = CollocationOperator::new(&KernelModel::hard_sphere(), &grid, QuadConfig::default()).unwrap();
        let f = DiscreteMeasure::condensate(grid, 3.0).unwrap();
        let g = step(&op, &f, 0.1).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn clipping_preserves_mass() {
        let old = vec![1.0, 0.1, 0.5];
        let mut new = vec![1.3, -0.1, 0.4];
        let c = clip_preserving_mass(&old, &mut new);
        assert!((c - 0.1).abs() < 1e-15);
        assert!(new.iter().all(|v| *v >= 0.0));
        let before: f64 = [1.3, -0.1, 0.4].iter().sum();
        assert!((new.iter().sum::<f64>() - before).abs() < 1e-15);
    }
}
