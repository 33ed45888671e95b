//! The two sides of the condensation dichotomy as runnable experiments.

use serde::{Deserialize, Serialize};

use super::{run_with, CollocationOperator, InitialData, MonotoneProbe, RunConstants, RunSummary, SimulationConfig, TimeSeries};
use crate::equilibrium::{entropy, solve_equilibrium, EquilibriumState};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::KernelFamily;
use crate::measure::{local_condition, LocalCondition};

/// Slack on the threshold time: `w₀ ≥ N/8` must happen by `REACH_SLACK · h`.
pub const REACH_SLACK: f64 = 5.0;
/// Relative band around `F_be({0})` the final condensate must land in.
pub const EQUILIBRIUM_BAND: f64 = 0.1;
/// Largest admissible noise floor, relative to `N`.
pub const NOISE_FLOOR_MAX: f64 = 1e-4;
/// Required persistent gap, relative to `F_be({0})`.
pub const GAP_FRACTION: f64 = 0.9;

/// Distance-to-equilibrium diagnostics at one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub t: f64,
    pub w0: f64,
    /// `F_be({0}) − w₀`, a lower bound for `‖F_t − F_be‖₁`.
    pub condensate_deficit: f64,
    /// `‖F_t − P F_be‖₁` against the projected equilibrium.
    pub d1: f64,
    pub d1_circ: f64,
    /// `S(P F_be) − S(F_t)`.
    pub entropy_gap: f64,
}

fn distances(series: &TimeSeries, eq: &EquilibriumState) -> Result<Vec<DistanceRecord>> {
    let be = eq.project(&series.grid)?;
    let s_be = entropy(&be);
    let mut out = Vec::with_capacity(series.rows.len());
    for (k, row) in series.rows.iter().enumerate() {
        let f = series.measure_at(k)?;
        let norms = f.norms(&be)?;
        out.push(DistanceRecord {
            t: row[0],
            w0: f.w0(),
            condensate_deficit: eq.condensate - f.w0(),
            d1: norms.d1,
            d1_circ: norms.d1_circ,
            entropy_gap: s_be - entropy(&f),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensationReport {
    pub local: LocalCondition,
    pub constants: RunConstants,
    pub equilibrium: EquilibriumState,
    pub initial_w0: f64,
    /// First record time with `w₀ ≥ N/8`.
    pub t_reach_eighth: Option<f64>,
    pub reached_in_time: bool,
    pub final_w0: f64,
    /// `(F_be({0}) − w₀(t_end)) / F_be({0})`.
    pub final_relative_deficit: f64,
    pub near_equilibrium: bool,
    pub monotone_w0: MonotoneProbe,
    /// Least-squares slope of `log(F_be({0}) − w₀)` against `log t` over the
    /// second half of the records; qualitative only.
    pub fitted_slope: Option<f64>,
    pub distances: Vec<DistanceRecord>,
    pub summary: RunSummary,
}

impl CondensationReport {
    pub fn passes(&self) -> bool {
        self.reached_in_time && self.near_equilibrium && !self.summary.invalid
    }
}

fn fitted_slope(series: &TimeSeries, target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = series.rows[series.rows.len() / 2..]
        .iter()
        .filter(|r| target - r[4] > 0.0 && r[0] > 0.0)
        .map(|r| (r[0].ln(), (target - r[4]).ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs a power-kernel configuration whose initial data satisfies the local
/// condition and reports the growth of the condensate.
///
/// `alpha` is the exponent the local condition is checked with; it defaults to
/// the generator's when the initial data is of the example kind.
pub fn condensation_experiment(config: &SimulationConfig, alpha: Option<f64>) -> Result<(TimeSeries, CondensationReport)> {
    if config.kernel.family() != KernelFamily::Power || !(config.kernel.eta() < 1.0) {
        return Err(Error::Precondition("condensation experiment needs a power kernel with eta < 1".into()));
    }
    let alpha = match (alpha, &config.initial) {
        (Some(a), _) => a,
        (None, InitialData::Example { alpha, .. }) => *alpha,
        _ => return Err(Error::Precondition("local condition exponent alpha is not known for this initial data".into())),
    };
    let grid = config.grid.build()?;
    let initial = config.initial.build(&grid, &config.kernel)?;
    let local = local_condition(&initial, alpha, config.kernel.eta(), config.kernel.b0())?;
    if !local.passes() {
        return Err(Error::Precondition(format!(
            "initial data fails the local condition: E/N = {:e} (bound {:e}), infimum {:e} at {:e} (threshold {:e})",
            local.e_over_n, local.energy_bound, local.infimum, local.infimum_at, local.c0_threshold
        )));
    }
    let op = CollocationOperator::new(&config.kernel, &grid, config.quad)?;
    let initial_w0 = initial.w0();
    let series = run_with(config, &op, initial)?;
    let c = series.summary.constants;
    let eq = solve_equilibrium(c.n0, c.e0, 1e-12)?;
    let t_reach_eighth = series.rows.iter().find(|r| r[4] >= c.n0 / 8.0).map(|r| r[0]);
    let final_w0 = *series.rows.last().map(|r| &r[4]).unwrap_or(&0.0);
    let final_relative_deficit = (eq.condensate - final_w0) / eq.condensate;
    let report = CondensationReport {
        local,
        constants: c,
        initial_w0,
        t_reach_eighth,
        reached_in_time: t_reach_eighth.map(|t| t <= REACH_SLACK * c.h).unwrap_or(false),
        final_w0,
        final_relative_deficit,
        near_equilibrium: final_relative_deficit.abs() <= EQUILIBRIUM_BAND,
        monotone_w0: series.summary.monotone_w0.clone(),
        fitted_slope: fitted_slope(&series, eq.condensate),
        distances: distances(&series, &eq)?,
        summary: series.summary.clone(),
        equilibrium: eq,
    };
    Ok((series, report))
}

/// The companion grid for the two-resolution noise floor: half the nodes,
/// squared ratio, same transition and range.
pub fn coarse_companion(spec: &GridSpec) -> GridSpec {
    GridSpec { nodes: spec.nodes / 2, ratio: spec.ratio * spec.ratio, ..*spec }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoCondensationReport {
    pub constants: RunConstants,
    pub equilibrium: EquilibriumState,
    /// `a = 48√2 N²`.
    pub gronwall_rate: f64,
    pub max_w0: f64,
    pub max_w0_coarse: f64,
    pub coarse_nodes: usize,
    /// Larger of the two resolutions' `max_t w₀`.
    pub noise_floor: f64,
    pub noise_floor_ok: bool,
    /// `min_t (F_be({0}) − w₀(t)) / F_be({0})`, a lower bound for `‖F_t − F_be‖₁ / F_be({0})`.
    pub min_relative_gap: f64,
    pub gap_ok: bool,
    pub distances: Vec<DistanceRecord>,
    pub summary: RunSummary,
    pub summary_coarse: RunSummary,
}

impl NoCondensationReport {
    pub fn passes(&self) -> bool {
        self.noise_floor_ok && self.gap_ok && !self.summary.invalid && !self.summary_coarse.invalid
    }
}

/// `a = 48√2 N²`.
pub fn gronwall_rate(n: f64) -> f64 {
    48.0 * std::f64::consts::SQRT_2 * n * n
}

/// Runs a Yukawa configuration from data without a condensate at two
/// resolutions; the larger `max_t w₀` is the scheme's noise floor.
pub fn no_condensation_experiment(config: &SimulationConfig) -> Result<(TimeSeries, NoCondensationReport)> {
    if config.kernel.family() != KernelFamily::Yukawa {
        return Err(Error::Precondition("no-condensation experiment needs the Yukawa kernel".into()));
    }
    let grid = config.grid.build()?;
    let initial = config.initial.build(&grid, &config.kernel)?;
    if initial.w0() != 0.0 {
        return Err(Error::Precondition(format!("initial condensate must be 0, got {:e}", initial.w0())));
    }
    let (n, e) = initial.moments();
    let eq = solve_equilibrium(n, e, 1e-12)?;
    if !(eq.t_ratio < 1.0) {
        return Err(Error::Precondition(format!(
            "temperature ratio {} is not below 1, so the equilibrium has no condensate",
            eq.t_ratio
        )));
    }
    let op = CollocationOperator::new(&config.kernel, &grid, config.quad)?;
    let series = run_with(config, &op, initial)?;

    let coarse_spec = coarse_companion(&config.grid);
    let coarse = (|| -> Result<TimeSeries> {
        let g = coarse_spec.build()?;
        let f = config.initial.build(&g, &config.kernel)?;
        let mut cfg = config.clone();
        cfg.grid = coarse_spec;
        let op = CollocationOperator::new(&config.kernel, &g, config.quad)?;
        run_with(&cfg, &op, f)
    })()?;

    let max_w0 = series.summary.max_w0;
    let max_w0_coarse = coarse.summary.max_w0;
    let noise_floor = max_w0.max(max_w0_coarse);
    let distances = distances(&series, &eq)?;
    let min_relative_gap = distances
        .iter()
        .map(|d| d.condensate_deficit / eq.condensate)
        .fold(f64::INFINITY, f64::min);
    let report = NoCondensationReport {
        constants: series.summary.constants,
        gronwall_rate: gronwall_rate(n),
        max_w0,
        max_w0_coarse,
        coarse_nodes: coarse_spec.nodes,
        noise_floor,
        noise_floor_ok: noise_floor <= NOISE_FLOOR_MAX * n,
        min_relative_gap,
        gap_ok: min_relative_gap >= GAP_FRACTION,
        distances,
        summary: series.summary.clone(),
        summary_coarse: coarse.summary,
        equilibrium: eq,
    };
    Ok((series, report))
}
