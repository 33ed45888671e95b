//! Cross sections `Φ` and the reduced collision kernel `W(x, y, z)`.
//!
//! `W` is obtained from `Φ` by integrating over the relative speed `s` and the
//! azimuth `θ`. The `s` integral uses a cosine-mapped Gauss–Legendre rule (the
//! integrand has square-root behaviour at both ends of the `s` interval) and
//! the `θ` integral a periodic trapezoid rule, which is spectrally accurate
//! because the integrand depends on `θ` only through `cos θ`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::GaussLegendre;

/// `y + z - x` below this fraction of `y + z` counts as `x* = 0`.
pub const TIE_REL: f64 = 1e-12;
/// Energies below this are treated as exactly zero when picking the kernel branch.
pub const DEGENERATE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    HardSphere,
    Power,
    Yukawa,
    Tabulated,
}

impl KernelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelFamily::HardSphere => "hard_sphere",
            KernelFamily::Power => "power",
            KernelFamily::Yukawa => "yukawa",
            KernelFamily::Tabulated => "tabulated",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard_sphere" | "hard-sphere" | "hs" => Ok(KernelFamily::HardSphere),
            "power" => Ok(KernelFamily::Power),
            "yukawa" => Ok(KernelFamily::Yukawa),
            "tabulated" => Ok(KernelFamily::Tabulated),
            other => Err(Error::config(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Sampled transform `φ̂(r)` with linear interpolation between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiHatTable {
    r: Vec<f64>,
    values: Vec<f64>,
}

impl PhiHatTable {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() || r.len() < 2 {
            return Err(Error::config("phi-hat table needs at least two (r, value) pairs of equal length"));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("phi-hat table radii must be nonnegative and strictly increasing"));
        }
        if values.iter().any(|v| !(0.0..=0.5).contains(v)) {
            return Err(Error::config("phi-hat table values must lie in [0, 1/2]"));
        }
        Ok(Self { r, values })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(r >= lo && r <= hi) {
            return Err(Error::Range(format!("phi-hat table covers [{lo}, {hi}], got r = {r}")));
        }
        let i = self.r.partition_point(|&v| v <= r).min(self.r.len() - 1).max(1);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let t = (r - r0) / (r1 - r0);
        Ok(self.values[i - 1] * (1.0 - t) + self.values[i] * t)
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A scattering cross section `Φ(r, ρ) = (φ̂(r) + φ̂(ρ))²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    family: KernelFamily,
    eta: f64,
    b0: f64,
    phi_hat_table: Option<PhiHatTable>,
}

impl KernelModel {
    pub fn hard_sphere() -> Self {
        Self { family: KernelFamily::HardSphere, eta: 0.0, b0: 1.0, phi_hat_table: None }
    }

    /// `φ̂(r) = ½ r^η / (1 + r^η)` with `0 < η < 1`. The lower-bound constant
    /// `b0` is checked by sampling against `Φ ≥ b0 min{1, (r² + ρ²)^η}`.
    pub fn power(eta: f64, b0: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::config(format!("power family requires 0 < eta < 1, got {eta}")));
        }
        if !(b0 > 0.0 && b0 < 1.0) {
            return Err(Error::config(format!("b0 must lie in (0, 1), got {b0}")));
        }
        let model = Self { family: KernelFamily::Power, eta, b0, phi_hat_table: None };
        let sampled = model.sampled_lower_bound_ratio()?;
        if b0 > sampled * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "b0 = {b0} violates the sampled lower bound: min Φ/min{{1,(r²+ρ²)^η}} = {sampled}"
            )));
        }
        Ok(model)
    }

    /// `φ̂(r) = ½ r² / (1 + r²)`, `η = 2`.
    pub fn yukawa() -> Self {
        Self { family: KernelFamily::Yukawa, eta: 2.0, b0: 0.0, phi_hat_table: None }
    }

    pub fn tabulated(table: PhiHatTable, eta: f64) -> Self {
        Self { family: KernelFamily::Tabulated, eta, b0: 0.0, phi_hat_table: Some(table) }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn phi_hat_table(&self) -> Option<&PhiHatTable> {
        self.phi_hat_table.as_ref()
    }

    pub fn phi_hat(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("phi_hat needs r >= 0, got {r}")));
        }
        Ok(match self.family {
            KernelFamily::HardSphere => 0.5,
            KernelFamily::Power => {
                let p = r.powf(self.eta);
                0.5 * p / (1.0 + p)
            }
            KernelFamily::Yukawa => {
                let p = r * r;
                0.5 * p / (1.0 + p)
            }
            KernelFamily::Tabulated => self.phi_hat_table.as_ref().expect("tabulated model carries a table").eval(r)?,
        })
    }

    /// `φ̂` evaluated from `r²`, avoiding a square root where the family allows.
    #[inline]
    fn phi_hat_sq(&self, r2: f64) -> Result<f64> {
        Ok(match self.family {
            KernelFamily::HardSphere => 0.5,
            KernelFamily::Power => {
                let p = r2.powf(0.5 * self.eta);
                0.5 * p / (1.0 + p)
            }
            KernelFamily::Yukawa => 0.5 * r2 / (1.0 + r2),
            KernelFamily::Tabulated => self.phi_hat_table.as_ref().unwrap().eval(r2.sqrt())?,
        })
    }

    pub fn phi(&self, r: f64, rho: f64) -> Result<f64> {
        let s = self.phi_hat(r)? + self.phi_hat(rho)?;
        Ok(s * s)
    }

    /// Minimum of `Φ(r,ρ) / min{1, (r²+ρ²)^η}` over a logarithmic sample of
    /// `(r, ρ)` including the axes.
    pub fn sampled_lower_bound_ratio(&self) -> Result<f64> {
        let mut pts = vec![0.0];
        pts.extend((-60..=60).map(|k| 10f64.powf(k as f64 / 20.0)));
        let mut best = f64::INFINITY;
        for &r in &pts {
            for &rho in &pts {
                let m = (r * r + rho * rho).powf(self.eta).min(1.0);
                if m > 0.0 {
                    best = best.min(self.phi(r, rho)? / m);
                }
            }
        }
        Ok(best)
    }
}

/// Resolution of the kernel quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Gauss–Legendre nodes in `s`.
    pub s_nodes: usize,
    /// Trapezoid nodes over `[0, 2π)`; rounded up to an even count.
    pub theta_nodes: usize,
    /// Gauss–Legendre nodes per panel of the outer energy integral.
    pub x_nodes: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { s_nodes: 64, theta_nodes: 64, x_nodes: 8 }
    }
}

impl QuadConfig {
    pub fn doubled(&self) -> Self {
        Self { s_nodes: 2 * self.s_nodes, theta_nodes: 2 * self.theta_nodes, x_nodes: 2 * self.x_nodes }
    }

    pub fn label(&self) -> String {
        format!("{}x{}x{}", self.s_nodes, self.theta_nodes, self.x_nodes)
    }
}

/// Precomputed nodes for a [`QuadConfig`].
#[derive(Debug, Clone)]
pub struct WRule {
    config: QuadConfig,
    s_rule: GaussLegendre,
    x_rule: GaussLegendre,
    cos_theta: Vec<f64>,
    theta_weight: Vec<f64>,
    /// Gauss–Legendre in `v` with `θ = π(1 − v²)`, for cross sections whose
    /// transform has a cusp at 0 (reached at `θ = π` when `a = b`).
    graded_cos: Vec<f64>,
    graded_weight: Vec<f64>,
}

impl WRule {
    pub fn new(config: QuadConfig) -> Result<Self> {
        if config.s_nodes == 0 || config.theta_nodes == 0 || config.x_nodes == 0 {
            return Err(Error::config("quadrature resolutions must be positive"));
        }
        let n = config.theta_nodes.max(2).div_ceil(2) * 2;
        let h = 2.0 * PI / n as f64;
        // θ_k and θ_{n-k} share cos θ; fold them together.
        let half = n / 2;
        let mut cos_theta = Vec::with_capacity(half + 1);
        let mut theta_weight = Vec::with_capacity(half + 1);
        for k in 0..=half {
            cos_theta.push((h * k as f64).cos());
            theta_weight.push(if k == 0 || k == half { h } else { 2.0 * h });
        }
        let gl = GaussLegendre::new(half + 1);
        let (graded_cos, graded_weight) = gl
            .cosine_mapped(0.0, 1.0)
            .map(|(v, w)| ((PI * (1.0 - v * v)).cos(), 2.0 * w * 2.0 * PI * v))
            .unzip();
        Ok(Self {
            config,
            s_rule: GaussLegendre::new(config.s_nodes),
            x_rule: GaussLegendre::new(config.x_nodes),
            cos_theta,
            theta_weight,
            graded_cos,
            graded_weight,
        })
    }

    pub fn config(&self) -> QuadConfig {
        self.config
    }

    pub fn x_rule(&self) -> &GaussLegendre {
        &self.x_rule
    }
}

/// `Y*(x,y,z,s,θ)`, the magnitude of the second post-collision relative velocity.
pub fn y_star(x: f64, y: f64, z: f64, s: f64, theta: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let q = {
        let t = x - y + s * s;
        t * t / (4.0 * s * s)
    };
    let a = (z - q).max(0.0).sqrt();
    let b = (x - q).max(0.0).sqrt();
    let (sn, cs) = theta.sin_cos();
    ((a + cs * b).powi(2) + (sn * b).powi(2)).sqrt()
}

/// The integration limits in `s` for an interior triple: `(lo, hi)`.
pub fn s_limits(x: f64, y: f64, z: f64) -> (f64, f64) {
    let xs = (y + z - x).max(0.0);
    let (sx, sy, sz, sxs) = (x.sqrt(), y.sqrt(), z.sqrt(), xs.sqrt());
    ((sx - sy).abs().max((sxs - sz).abs()), (sx + sy).min(sxs + sz))
}

fn check_energies(x: f64, y: f64, z: f64) -> Result<()> {
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) || !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::Domain(format!("kernel needs finite x, y, z >= 0, got ({x}, {y}, {z})")));
    }
    Ok(())
}

/// Where a triple falls among the kernel's defining cases.
enum Branch {
    Zero,
    /// Closed boundary value: `Φ(r, ρ) / scale`.
    Boundary { r2: f64, rho2: f64, sqrt_scale: f64 },
    Interior { x: f64, y: f64, z: f64, xs: f64 },
}

fn classify(x: f64, y: f64, z: f64) -> Branch {
    let sum = y + z;
    let xs = sum - x;
    if sum <= 0.0 || xs <= TIE_REL * sum {
        return Branch::Zero;
    }
    let x = if x < DEGENERATE { 0.0 } else { x };
    let y = if y < DEGENERATE { 0.0 } else { y };
    let z = if z < DEGENERATE { 0.0 } else { z };
    if x == 0.0 {
        if y > 0.0 && z > 0.0 {
            return Branch::Boundary { r2: 2.0 * y, rho2: 2.0 * z, sqrt_scale: (y * z).sqrt() };
        }
        return Branch::Zero;
    }
    if y == 0.0 {
        if z > x {
            return Branch::Boundary { r2: 2.0 * x, rho2: 2.0 * (z - x), sqrt_scale: (x * z).sqrt() };
        }
        return Branch::Zero;
    }
    if z == 0.0 {
        if y > x {
            return Branch::Boundary { r2: 2.0 * (y - x), rho2: 2.0 * x, sqrt_scale: (x * y).sqrt() };
        }
        return Branch::Zero;
    }
    Branch::Interior { x, y, z, xs }
}

/// `W(x, y, z)` by quadrature of the `(s, θ)` integral, with the closed
/// boundary values when one energy vanishes and zero when `x ≥ y + z`.
pub fn w_quadrature(model: &KernelModel, x: f64, y: f64, z: f64, rule: &WRule) -> Result<f64> {
    check_energies(x, y, z)?;
    match classify(x, y, z) {
        Branch::Zero => Ok(0.0),
        Branch::Boundary { r2, rho2, sqrt_scale } => {
            let s = model.phi_hat_sq(r2)? + model.phi_hat_sq(rho2)?;
            Ok(s * s / sqrt_scale)
        }
        Branch::Interior { x, y, z, xs } => w_interior(model, x, y, z, xs, rule),
    }
}

fn w_interior(model: &KernelModel, x: f64, y: f64, z: f64, xs: f64, rule: &WRule) -> Result<f64> {
    let (sx, sy, sz, sxs) = (x.sqrt(), y.sqrt(), z.sqrt(), xs.sqrt());
    let lo = (sx - sy).abs().max((sxs - sz).abs());
    let hi = (sx + sy).min(sxs + sz);
    if hi <= lo {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (s, ws) in rule.s_rule.cosine_mapped(lo, hi) {
        if s <= 0.0 {
            continue;
        }
        let q = {
            let t = x - y + s * s;
            t * t / (4.0 * s * s)
        };
        let a2 = (z - q).max(0.0);
        let b2 = (x - q).max(0.0);
        let sum2 = a2 + b2;
        let ab2 = 2.0 * (a2 * b2).sqrt();
        let theta_int = match model.family {
            KernelFamily::HardSphere => 2.0 * PI,
            _ => {
                let ph_s = model.phi_hat_sq(2.0 * s * s)?;
                let (cs, ws) = match model.family {
                    KernelFamily::Power | KernelFamily::Tabulated => (&rule.graded_cos, &rule.graded_weight),
                    _ => (&rule.cos_theta, &rule.theta_weight),
                };
                let mut acc = 0.0;
                for (&c, &w) in cs.iter().zip(ws) {
                    // r² = 2 Y*² with Y*² = a² + b² + 2ab cos θ
                    let r2 = 2.0 * (sum2 + ab2 * c).max(0.0);
                    let v = ph_s + model.phi_hat_sq(r2)?;
                    acc += w * v * v;
                }
                acc
            }
        };
        total += ws * theta_int;
    }
    Ok(total / (4.0 * PI * (x * y * z).sqrt()))
}

/// Hard-sphere kernel in closed form.
pub fn w_hard_closed(x: f64, y: f64, z: f64) -> f64 {
    match classify(x.max(0.0), y.max(0.0), z.max(0.0)) {
        Branch::Zero => 0.0,
        Branch::Boundary { sqrt_scale, .. } => 1.0 / sqrt_scale,
        Branch::Interior { x, y, z, xs } => {
            let m = x.sqrt().min(y.sqrt()).min(z.sqrt()).min(xs.sqrt());
            m / (x * y * z).sqrt()
        }
    }
}

/// Finite-difference estimate of
/// `C_Φ = max{ sup |∂²Φ/∂ρ²|, sup |∂²Φ/∂r∂ρ| }` at two sample resolutions.
/// This is an estimate over a finite logarithmic window, not a certified supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CPhiEstimate {
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
}

impl CPhiEstimate {
    /// Relative change between the two resolutions.
    pub fn refinement_change(&self) -> f64 {
        if self.fine == 0.0 {
            return (self.coarse - self.fine).abs();
        }
        (self.coarse - self.fine).abs() / self.fine.abs()
    }
}

pub fn c_phi_estimate(model: &KernelModel) -> Result<CPhiEstimate> {
    let (lo, hi) = match model.family {
        KernelFamily::HardSphere => return Ok(CPhiEstimate { value: 0.0, coarse: 0.0, fine: 0.0 }),
        KernelFamily::Power => {
            return Err(Error::Unsupported(
                "C_Φ is not estimated for the power family: Φ need not be C² at the origin".into(),
            ))
        }
        KernelFamily::Yukawa => (1e-3, 1e3),
        KernelFamily::Tabulated => {
            let (a, b) = model.phi_hat_table.as_ref().unwrap().range();
            (a.max(b * 1e-3), b)
        }
    };
    let coarse = c_phi_at(model, lo, hi, 10)?;
    let fine = c_phi_at(model, lo, hi, 20)?;
    Ok(CPhiEstimate { value: coarse.max(fine), coarse, fine })
}

fn c_phi_at(model: &KernelModel, lo: f64, hi: f64, per_decade: usize) -> Result<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).ceil() as usize;
    let pts: Vec<f64> = (0..=n).map(|k| lo * (hi / lo).powf(k as f64 / n as f64)).collect();
    let (tlo, thi) = match model.phi_hat_table.as_ref() {
        Some(t) => t.range(),
        None => (0.0, f64::INFINITY),
    };
    let f = |r: f64, rho: f64| model.phi(r, rho);
    let mut best: f64 = 0.0;
    for &r in &pts {
        for &rho in &pts {
            let h = (1e-3 * rho.min(r)).max(1e-5);
            if rho - h < tlo || r - h < tlo || rho + h > thi || r + h > thi {
                continue;
            }
            let d_rr = (f(r, rho + h)? - 2.0 * f(r, rho)? + f(r, rho - h)?) / (h * h);
            let d_r_rho = (f(r + h, rho + h)? - f(r + h, rho - h)? - f(r - h, rho + h)? + f(r - h, rho - h)?)
                / (4.0 * h * h);
            best = best.max(d_rr.abs()).max(d_r_rho.abs());
        }
    }
    Ok(best)
}

/// `W` on all grid triples `(i, j, k)`, stored once per unordered `(j, k)`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: Grid,
    model: KernelModel,
    quad: QuadConfig,
    values: Vec<f64>,
}

#[inline]
fn pair_index(j: usize, k: usize) -> usize {
    let (a, b) = if j <= k { (j, k) } else { (k, j) };
    b * (b + 1) / 2 + a
}

impl KernelTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn model(&self) -> &KernelModel {
        &self.model
    }

    pub fn quad(&self) -> QuadConfig {
        self.quad
    }

    fn n_pairs(&self) -> usize {
        let n = self.grid.len();
        n * (n + 1) / 2
    }

    /// `W(x_i, x_j, x_k)`; symmetric in `j, k` by construction.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[i * self.n_pairs() + pair_index(j, k)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cache_key(&self) -> String {
        cache_key(&self.model, &self.grid, self.quad)
    }

    /// Writes the table as a flat little-endian binary blob behind a key line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "BCKT2 {}", self.cache_key())?;
        f.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            f.write_all(&v.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    /// Loads a cached table; returns `Ok(None)` if the key does not match.
    pub fn load(path: &Path, model: &KernelModel, grid: &Grid, quad: QuadConfig) -> Result<Option<Self>> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let Some(nl) = bytes.iter().position(|&b| b == b'\n') else {
            return Ok(None);
        };
        let header = String::from_utf8_lossy(&bytes[..nl]);
        let want = format!("BCKT2 {}", cache_key(model, grid, quad));
        if header != want {
            return Ok(None);
        }
        let rest = &bytes[nl + 1..];
        if rest.len() < 8 {
            return Ok(None);
        }
        let count = u64::from_le_bytes(rest[..8].try_into().unwrap()) as usize;
        let body = &rest[8..];
        let n = grid.len();
        if count != n * n * (n + 1) / 2 || body.len() != 8 * count {
            return Ok(None);
        }
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Some(Self { grid: grid.clone(), model: model.clone(), quad, values }))
    }
}

pub fn cache_key(model: &KernelModel, grid: &Grid, quad: QuadConfig) -> String {
    let mut key = format!("{}:{:e}:{:e}:{}:{}", model.family.as_str(), model.eta, model.b0, grid.hash(), quad.label());
    if let Some(t) = &model.phi_hat_table {
        let mut h = Sha256::new();
        for v in t.r.iter().chain(&t.values) {
            h.update(v.to_le_bytes());
        }
        let d = h.finalize();
        key.push(':');
        key.extend(d.iter().take(8).map(|b| format!("{b:02x}")));
    }
    key
}

/// Tabulates `W` on every grid triple. Entries are independent, so the
/// parallel build is deterministic.
pub fn build_table(model: &KernelModel, grid: &Grid, quad: QuadConfig) -> Result<KernelTable> {
    let rule = WRule::new(quad)?;
    let xs = grid.nodes();
    let n = xs.len();
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n * (n + 1) / 2];
            for k in 0..n {
                for j in 0..=k {
                    row[pair_index(j, k)] = w_quadrature(model, xs[i], xs[j], xs[k], &rule)?;
                }
            }
            Ok(row)
        })
        .collect();
    let mut values = Vec::with_capacity(n * n * (n + 1) / 2);
    for row in rows {
        values.extend(row?);
    }
    Ok(KernelTable { grid: grid.clone(), model: model.clone(), quad, values })
}
