//! Weak-form collision operators for atomic measures.
//!
//! For a test function `φ` the weak right-hand side is
//! `Q(φ; F) = ∬ J[φ] d²F + ∭ K[φ] d³F` with `K[φ] = W Δφ` and
//! `J[φ](y, z) = ½ ∫₀^{y+z} K[φ](x, y, z) √x dx`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{w_quadrature, KernelFamily, KernelModel, KernelTable, WRule};
use crate::measure::{DiscreteMeasure, LocalFunctionalParams};

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A bounded test function together with the points where it fails to be smooth.
#[derive(Clone)]
pub enum TestFunction {
    /// The `l`-th nodal hat of a grid, constant beyond the last node.
    Hat { grid: Grid, l: usize },
    /// `φ_ε(x) = [(1 − x/ε)₊]²`.
    PhiEps { eps: f64 },
    /// `Σ cₖ xᵏ`.
    Polynomial { coeffs: Vec<f64> },
    Custom { tag: String, f: Func, convex: bool, kinks: Vec<f64> },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl TestFunction {
    pub fn phi_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("phi_eps needs eps > 0, got {eps}")));
        }
        Ok(TestFunction::PhiEps { eps })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        TestFunction::Polynomial { coeffs }
    }

    pub fn hat(grid: Grid, l: usize) -> Result<Self> {
        if l >= grid.len() {
            return Err(Error::Domain(format!("hat index {l} out of range for {} nodes", grid.len())));
        }
        Ok(TestFunction::Hat { grid, l })
    }

    pub fn custom(tag: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static, convex: bool) -> Self {
        TestFunction::Custom { tag: tag.into(), f: Arc::new(f), convex, kinks: Vec::new() }
    }

    pub fn tag(&self) -> String {
        match self {
            TestFunction::Hat { l, .. } => format!("hat_{l}"),
            TestFunction::PhiEps { eps } => format!("phi_eps({eps})"),
            TestFunction::Polynomial { coeffs } => format!("polynomial{coeffs:?}"),
            TestFunction::Custom { tag, .. } => tag.clone(),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Hat { grid, l } => grid.hat(*l, x),
            TestFunction::PhiEps { eps } => {
                let t = (1.0 - x / eps).max(0.0);
                t * t
            }
            TestFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            TestFunction::Custom { f, .. } => f(x),
        }
    }

    /// Whether the function is convex on `[0, ∞)`.
    pub fn is_convex(&self) -> bool {
        match self {
            TestFunction::Hat { .. } => false,
            TestFunction::PhiEps { .. } => true,
            TestFunction::Polynomial { coeffs } => {
                coeffs.len() <= 2 || (coeffs.len() == 3 && coeffs[2] >= 0.0)
            }
            TestFunction::Custom { convex, .. } => *convex,
        }
    }

    /// Points where the function or its derivative may jump.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            TestFunction::Hat { grid, .. } => grid.nodes().to_vec(),
            TestFunction::PhiEps { eps } => vec![*eps],
            TestFunction::Polynomial { .. } => Vec::new(),
            TestFunction::Custom { kinks, .. } => kinks.clone(),
        }
    }
}

/// `Δφ(x, y, z) = φ(x) + φ(x*) − φ(y) − φ(z)` with `x* = (y + z − x)₊`.
#[inline]
pub fn delta_phi(phi: &TestFunction, x: f64, y: f64, z: f64) -> f64 {
    if let TestFunction::PhiEps { eps } = phi {
        // on the quadratic piece the affine parts cancel exactly
        if x <= y + z && x.max(y).max(z).max(y + z - x) <= *eps {
            return 2.0 * (x - y) * (x - z) / (eps * eps);
        }
    }
    let xs = (y + z - x).max(0.0);
    phi.eval(x) + phi.eval(xs) - phi.eval(y) - phi.eval(z)
}

/// `Δ_sym φ(x, y, z) = φ(z + y − x) + φ(z + x − y) − 2φ(z)` for `0 ≤ x, y ≤ z`.
pub fn delta_sym(phi: &TestFunction, x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && x <= z && y <= z) {
        return Err(Error::Domain(format!("delta_sym needs 0 <= x, y <= z, got ({x}, {y}, {z})")));
    }
    if let TestFunction::PhiEps { eps } = phi {
        if z + (x - y).abs() <= *eps {
            return Ok(2.0 * (x - y) * (x - y) / (eps * eps));
        }
    }
    Ok(phi.eval(z + y - x) + phi.eval(z + x - y) - 2.0 * phi.eval(z))
}

/// `K[φ](xᵢ, xⱼ, x_k) = W Δφ` on grid indices.
pub fn k_op(table: &KernelTable, phi: &TestFunction, i: usize, j: usize, k: usize) -> f64 {
    let w = table.get(i, j, k);
    if w == 0.0 {
        return 0.0;
    }
    let x = table.grid().nodes();
    w * delta_phi(phi, x[i], x[j], x[k])
}

/// Breakpoints of `x ↦ W(x, y, z) Δφ(x, y, z)` on `[0, y + z]`.
pub fn j_breakpoints(y: f64, z: f64, kinks: &[f64]) -> Vec<f64> {
    let s = y + z;
    let mut pts = vec![0.0, s, y, z, 0.5 * s];
    for &k in kinks {
        pts.push(k);
        pts.push(s - k);
    }
    pts.retain(|p| *p >= 0.0 && *p <= s);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * s.max(1e-300));
    pts
}

/// `J[φ](y, z) = ½ ∫₀^{y+z} W(x, y, z) Δφ(x, y, z) √x dx`.
///
/// The outer integral is split at every breakpoint of the integrand and each
/// piece uses the cosine-mapped Gauss rule, which absorbs the `√x` and `√x*`
/// endpoint behaviour.
pub fn j_op(model: &KernelModel, phi: &TestFunction, y: f64, z: f64, rule: &WRule) -> Result<f64> {
    if !(y >= 0.0 && z >= 0.0) {
        return Err(Error::Domain(format!("j_op needs y, z >= 0, got ({y}, {z})")));
    }
    let s = y + z;
    if s == 0.0 {
        return Ok(0.0);
    }
    if matches!(phi, TestFunction::Polynomial { coeffs } if coeffs.len() <= 2) {
        return Ok(0.0);
    }
    let pts = j_breakpoints(y, z, &phi.kinks());
    let mut acc = 0.0;
    for w in pts.windows(2) {
        for (x, wx) in rule.x_rule().cosine_mapped(w[0], w[1]) {
            let d = delta_phi(phi, x, y, z);
            if d == 0.0 {
                continue;
            }
            acc += wx * w_quadrature(model, x, y, z, rule)? * d * x.sqrt();
        }
    }
    Ok(0.5 * acc)
}

/// `∭ K[φ] d³F` by the plain triple sum.
pub fn cubic_sum(table: &KernelTable, phi: &TestFunction, f: &DiscreteMeasure) -> f64 {
    let w = f.weights();
    let n = w.len();
    let mut acc = 0.0;
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if w[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                if w[k] == 0.0 {
                    continue;
                }
                acc += w[i] * w[j] * w[k] * k_op(table, phi, i, j, k);
            }
        }
    }
    acc
}

/// `∬ J[φ] d²F`, using the symmetry of `J` in `(y, z)`.
pub fn quadratic_sum(table: &KernelTable, phi: &TestFunction, f: &DiscreteMeasure, rule: &WRule) -> Result<f64> {
    let w = f.weights();
    let x = f.grid().nodes();
    let mut acc = 0.0;
    for k in 0..w.len() {
        if w[k] == 0.0 {
            continue;
        }
        for j in 0..=k {
            if w[j] == 0.0 {
                continue;
            }
            let mult = if j == k { 1.0 } else { 2.0 };
            acc += mult * w[j] * w[k] * j_op(table.model(), phi, x[j], x[k], rule)?;
        }
    }
    Ok(acc)
}

/// `Q(φ; F) = ∬ J[φ] d²F + ∭ K[φ] d³F`.
pub fn weak_rhs(table: &KernelTable, phi: &TestFunction, f: &DiscreteMeasure, rule: &WRule) -> Result<f64> {
    if f.grid().nodes() != table.grid().nodes() {
        return Err(Error::config("measure and kernel table use different grids"));
    }
    Ok(quadratic_sum(table, phi, f, rule)? + cubic_sum(table, phi, f))
}

/// The five sums of the symmetrized cubic decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicDecomposition {
    /// `∫_{0<x<y≤z} χ W Δ_sym φ`.
    pub ordered_sym: f64,
    /// `2∫_{0<x<y<z} (W(y,x,z) − W(x,y,z)) Δφ(y,x,z)`.
    pub w_difference: f64,
    /// `∫_{0<y,z<x<y+z} W Δφ`.
    pub middle: f64,
    /// `F({0}) ∫_{0<y≤z} χ W(0,y,z) Δ_sym φ(0,y,z)`.
    pub condensate_sym: f64,
    /// `2F({0}) ∫_{0<y<z} (W(y,0,z) − W(0,y,z)) Δφ(y,0,z)`.
    pub condensate_difference: f64,
    /// The `K₁` part: `ordered_sym + condensate_sym`.
    pub k1: f64,
    pub total: f64,
    /// The plain triple sum, for comparison.
    pub plain: f64,
}

/// Evaluates the symmetrized decomposition over the atoms of `f`.
/// Nodes are strictly increasing, so index order is energy order.
pub fn cubic_symmetrized(table: &KernelTable, phi: &TestFunction, f: &DiscreteMeasure) -> Result<CubicDecomposition> {
    let w = f.weights();
    let x = f.grid().nodes();
    let n = w.len();
    let (mut i1, mut i2, mut i3, mut i4, mut i5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for c in 1..n {
        for b in 1..=c {
            if w[b] == 0.0 || w[c] == 0.0 {
                continue;
            }
            let chi = if b < c { 2.0 } else { 1.0 };
            let wbc = w[b] * w[c];
            for a in 1..b {
                let wabc = w[a] * wbc;
                if wabc == 0.0 {
                    continue;
                }
                i1 += chi * wabc * table.get(a, b, c) * delta_sym(phi, x[a], x[b], x[c])?;
                if b < c {
                    i2 += 2.0 * wabc * (table.get(b, a, c) - table.get(a, b, c)) * delta_phi(phi, x[b], x[a], x[c]);
                }
            }
            if w[0] > 0.0 {
                i4 += w[0] * chi * wbc * table.get(0, b, c) * delta_sym(phi, 0.0, x[b], x[c])?;
                if b < c {
                    i5 += 2.0 * w[0] * wbc * (table.get(b, 0, c) - table.get(0, b, c)) * delta_phi(phi, x[b], 0.0, x[c]);
                }
            }
        }
    }
    for i in 1..n {
        if w[i] == 0.0 {
            continue;
        }
        for j in 1..i {
            for k in 1..i {
                if x[i] < x[j] + x[k] {
                    i3 += w[i] * w[j] * w[k] * k_op(table, phi, i, j, k);
                }
            }
        }
    }
    let total = i1 + i2 + i3 + i4 + i5;
    Ok(CubicDecomposition {
        ordered_sym: i1,
        w_difference: i2,
        middle: i3,
        condensate_sym: i4,
        condensate_difference: i5,
        k1: i1 + i4,
        total,
        plain: cubic_sum(table, phi, f),
    })
}

/// Both sides of the lower bound
/// `∭ K[φ_ε] d³F ≥ (b₀/2) N̲_{α,2}(F, ε) A_{β,p}(F, ε)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KkBound {
    pub lhs: f64,
    pub rhs: f64,
    pub n_underline: f64,
    pub a_functional: f64,
    pub infimum_is_zero: bool,
}

pub fn kk_lower_bound(table: &KernelTable, f: &DiscreteMeasure, alpha: f64, eta: f64, epsilon: f64) -> Result<KkBound> {
    let model = table.model();
    if model.family() != KernelFamily::Power && model.family() != KernelFamily::HardSphere {
        return Err(Error::Unsupported("the lower bound needs a kernel bounded below (power or hard sphere)".into()));
    }
    let params = LocalFunctionalParams::for_kernel(alpha, eta, epsilon)?;
    let phi = TestFunction::phi_eps(epsilon)?;
    let lhs = cubic_sum(table, &phi, f);
    let nu = f.n_underline(&LocalFunctionalParams { p: 2.0, ..params });
    let a = f.a_functional(&params);
    let b0 = model.b0();
    Ok(KkBound {
        lhs,
        rhs: 0.5 * b0 * nu.value * a * a,
        n_underline: nu.value,
        a_functional: a,
        infimum_is_zero: nu.infimum_is_zero,
    })
}
