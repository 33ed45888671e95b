//! Time evolution of atomic measures under the weak collision equation.

pub mod engine;
pub mod experiments;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{cell_measures, entropy_with_cells, solve_equilibrium};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::kernel::{KernelModel, QuadConfig};
use crate::measure::{generate_example_initial, project_regular, DiscreteMeasure, ExampleOptions, Profile};

pub use engine::{step, step_with, CollocationOperator, PositivityPolicy};

/// Where the initial measure comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// The cold concentrated datum `λ x^{α−1} g(Rx) dx` built for the local condition.
    Example { alpha: f64, profile: Profile, energy_fraction: f64, safety: f64 },
    /// Classical `f ∝ e^{−x/κ}` with the given mass and energy.
    Maxwellian { n: f64, e: f64 },
    /// `f ∝ exp(−(x − center)²/(2 width²))` with the given mass.
    Bump { n: f64, center: f64, width: f64 },
    /// The projected Bose–Einstein equilibrium.
    Equilibrium { n: f64, e: f64 },
    Condensate { mass: f64 },
    Zero,
    /// A measure CSV with columns `x, w` on the configured grid.
    File { path: PathBuf },
}

impl InitialData {
    pub fn build(&self, grid: &Grid, kernel: &KernelModel) -> Result<DiscreteMeasure> {
        match self {
            InitialData::Example { alpha, profile, energy_fraction, safety } => {
                let opts = ExampleOptions { energy_fraction: *energy_fraction, safety: *safety };
                Ok(generate_example_initial(*alpha, kernel.eta(), kernel.b0(), *profile, grid, opts)?.measure)
            }
            InitialData::Maxwellian { n, e } => {
                if !(*n > 0.0 && *e > 0.0) {
                    return Err(Error::config("maxwellian needs n > 0 and e > 0"));
                }
                let kappa = e / n / 1.5;
                let shape = project_regular(grid, &|x| (-x / kappa).exp(), 50.0 * kappa)?;
                Ok(shape.scaled(n / shape.mass()))
            }
            InitialData::Bump { n, center, width } => {
                if !(*n > 0.0 && *width > 0.0 && *center >= 0.0) {
                    return Err(Error::config("bump needs n > 0, width > 0, center >= 0"));
                }
                let (c, s) = (*center, *width);
                let shape = project_regular(grid, &|x| (-(x - c).powi(2) / (2.0 * s * s)).exp(), 0.0)?;
                Ok(shape.scaled(n / shape.mass()))
            }
            InitialData::Equilibrium { n, e } => solve_equilibrium(*n, *e, 1e-12)?.project(grid),
            InitialData::Condensate { mass } => DiscreteMeasure::condensate(grid.clone(), *mass),
            InitialData::Zero => Ok(DiscreteMeasure::zeros(grid.clone())),
            InitialData::File { path } => {
                let m = DiscreteMeasure::read_csv(path)?;
                if m.grid().nodes() != grid.nodes() {
                    return Err(Error::config(format!("{} is not on the configured grid", path.display())));
                }
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// `dt = min(target N / max|w'|, stability / stiffness, dt_max)`.
    Adaptive { target: f64, stability: f64, dt_max: Option<f64> },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Adaptive { target: 1e-3, stability: 1.0, dt_max: None }
    }
}

/// Run horizon, absolute or relative to `h = log2 / (2√(NE))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    Absolute { t: f64 },
    InUnitsOfH { factor: f64 },
}

/// Which report a configuration asks for on top of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    None,
    Condensation,
    NoCondensation,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::None => "none",
            Experiment::Condensation => "condensation",
            Experiment::NoCondensation => "no_condensation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub kernel: KernelModel,
    pub grid: GridSpec,
    pub quad: QuadConfig,
    pub initial: InitialData,
    pub horizon: Horizon,
    pub dt: DtPolicy,
    pub positivity: PositivityPolicy,
    pub max_retries: usize,
    /// `ε` values for the probes `N_{0,2}(F_t, ε)` and `e^{ct} N_{0,2}(F_t, ε)`.
    pub probe_eps: Vec<f64>,
    /// Record every this many steps (the last step is always recorded).
    pub output_every: usize,
    pub max_steps: usize,
    pub experiment: Experiment,
}

impl SimulationConfig {
    pub fn new(kernel: KernelModel, initial: InitialData, horizon: Horizon) -> Self {
        Self {
            kernel,
            grid: GridSpec::default(),
            quad: QuadConfig { s_nodes: 24, theta_nodes: 24, x_nodes: 4 },
            initial,
            horizon,
            dt: DtPolicy::default(),
            positivity: PositivityPolicy::ClipAndLog,
            max_retries: 20,
            probe_eps: vec![0.05, 0.2],
            output_every: 1,
            max_steps: 1_000_000,
            experiment: Experiment::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.horizon {
            Horizon::Absolute { t } if !(t > 0.0) => return Err(Error::config("t_end must be positive")),
            Horizon::InUnitsOfH { factor } if !(factor > 0.0) => {
                return Err(Error::config("t_end_over_h must be positive"))
            }
            _ => {}
        }
        match self.dt {
            DtPolicy::Fixed { dt } if !(dt > 0.0) => return Err(Error::config("dt must be positive")),
            DtPolicy::Adaptive { target, stability, dt_max }
                if !(target > 0.0 && stability > 0.0 && dt_max.map_or(true, |m| m > 0.0)) =>
            {
                return Err(Error::config("adaptive dt parameters must be positive"))
            }
            _ => {}
        }
        if self.output_every == 0 {
            return Err(Error::config("output_every must be at least 1"));
        }
        if self.probe_eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::config("probe epsilons must be positive"));
        }
        self.grid.build()?;
        Ok(())
    }
}

/// Per-run derived constants: `c = √(NE)` and `h = log2/(2c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConstants {
    pub n0: f64,
    pub e0: f64,
    #[serde(with = "crate::float_serde")]
    pub c: f64,
    #[serde(with = "crate::float_serde")]
    pub h: f64,
    #[serde(with = "crate::float_serde")]
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneProbe {
    pub eps: f64,
    /// Largest one-step decrease of `e^{ct} N_{0,2}(F_t, ε)`, relative to `N`.
    #[serde(with = "crate::float_serde")]
    pub worst_decrease: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub constants: RunConstants,
    pub steps: usize,
    pub final_t: f64,
    pub clip_total: f64,
    /// Clipped mass exceeded `1e-6 N`; the run is not trustworthy.
    pub invalid: bool,
    pub monotone: Vec<MonotoneProbe>,
    /// Exponentially weighted condensate `e^{ct} w₀`.
    pub monotone_w0: MonotoneProbe,
    pub entropy_decreases: usize,
    pub worst_entropy_drop: f64,
    pub max_abs_drift_n: f64,
    pub ledger_e: f64,
    /// `max |E(t) − E(0) − ledger(t)|` over the run.
    pub max_unexplained_drift_e: f64,
    pub max_w0: f64,
    pub terminated_early: Option<String>,
}

pub const MONOTONE_TOL: f64 = 1e-8;
pub const CLIP_FLAG: f64 = 1e-6;

/// Recorded observables plus the weights at every record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub snapshots: Vec<Vec<f64>>,
    pub grid: Grid,
    pub summary: RunSummary,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn final_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.grid.clone(), self.snapshots.last().cloned().unwrap_or_default())
    }

    pub fn measure_at(&self, idx: usize) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.grid.clone(), self.snapshots[idx].clone())
    }
}

pub fn base_columns() -> Vec<String> {
    ["t", "N", "E", "S", "w0", "drift_N", "drift_E", "clip_total"].iter().map(|s| s.to_string()).collect()
}

pub fn probe_columns(eps: &[f64]) -> Vec<String> {
    let mut out = Vec::new();
    for e in eps {
        out.push(format!("n02_eps_{e}"));
        out.push(format!("exp_n02_eps_{e}"));
    }
    out.push("exp_w0".into());
    out.push("ledger_E".into());
    out
}

/// Builds the grid, operator and initial measure and runs the configuration.
pub fn run(config: &SimulationConfig) -> Result<TimeSeries> {
    config.validate()?;
    let grid = config.grid.build()?;
    let op = CollocationOperator::new(&config.kernel, &grid, config.quad)?;
    let initial = config.initial.build(&grid, &config.kernel)?;
    run_with(config, &op, initial)
}

/// Runs from an explicit initial measure with a prebuilt operator.
pub fn run_with(config: &SimulationConfig, op: &CollocationOperator, initial: DiscreteMeasure) -> Result<TimeSeries> {
    config.validate()?;
    if initial.grid().nodes() != op.grid().nodes() {
        return Err(Error::config("initial measure is not on the operator's grid"));
    }
    let grid = op.grid().clone();
    let x = grid.nodes().to_vec();
    let cells = cell_measures(&grid);
    let (n0, e0) = initial.moments();
    let c = (n0 * e0).sqrt();
    let h = if c > 0.0 { std::f64::consts::LN_2 / (2.0 * c) } else { f64::INFINITY };
    let t_end = match config.horizon {
        Horizon::Absolute { t } => t,
        Horizon::InUnitsOfH { factor } => factor * h,
    };
    if !t_end.is_finite() {
        return Err(Error::config("horizon in units of h needs N E > 0"));
    }
    let constants = RunConstants { n0, e0, c, h, t_end };

    let mut columns = base_columns();
    columns.extend(probe_columns(&config.probe_eps));

    let mut w = initial.weights().to_vec();
    let mut t = 0.0;
    let mut ledger = 0.0;
    let mut clip_total = 0.0;
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();

    let probe = |w: &[f64], eps: f64| -> f64 {
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            if *xi > eps {
                break;
            }
            let q = 1.0 - xi / eps;
            acc += q * q * wi;
        }
        acc
    };
    let weighted = |w: &[f64], t: f64| -> Vec<f64> {
        let g = (c * t).exp();
        config.probe_eps.iter().map(|&e| g * probe(w, e)).collect()
    };

    let mut summary = RunSummary {
        constants,
        steps: 0,
        final_t: 0.0,
        clip_total: 0.0,
        invalid: false,
        monotone: config
            .probe_eps
            .iter()
            .map(|&eps| MonotoneProbe { eps, worst_decrease: 0.0, violations: 0 })
            .collect(),
        monotone_w0: MonotoneProbe { eps: 0.0, worst_decrease: 0.0, violations: 0 },
        entropy_decreases: 0,
        worst_entropy_drop: 0.0,
        max_abs_drift_n: 0.0,
        ledger_e: 0.0,
        max_unexplained_drift_e: 0.0,
        max_w0: w[0],
        terminated_early: None,
    };

    let record = |w: &[f64], t: f64, ledger: f64, clip: f64, rows: &mut Vec<Vec<f64>>, snaps: &mut Vec<Vec<f64>>| {
        let n: f64 = w.iter().sum();
        let e: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        let s = entropy_with_cells(w, &cells);
        let mut row = vec![t, n, e, s, w[0], n - n0, e - e0, clip];
        let g = (c * t).exp();
        for &eps in &config.probe_eps {
            let p = probe(w, eps);
            row.push(p);
            row.push(g * p);
        }
        row.push(g * w[0]);
        row.push(ledger);
        rows.push(row);
        snaps.push(w.to_vec());
    };
    record(&w, t, ledger, clip_total, &mut rows, &mut snapshots);

    let mut prev_probe = weighted(&w, 0.0);
    let mut prev_w0 = w[0];
    let mut prev_s = entropy_with_cells(&w, &cells);
    let mut steps = 0usize;
    let scale_n = n0.max(f64::MIN_POSITIVE);
    while t < t_end * (1.0 - 1e-15) && steps < config.max_steps {
        let k1 = op.rhs(&w);
        let remaining = t_end - t;
        let dt = match config.dt {
            DtPolicy::Fixed { dt } => dt.min(remaining),
            DtPolicy::Adaptive { target, stability, dt_max } => {
                let rate = k1.dw.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                if rate == 0.0 {
                    remaining
                } else {
                    let stiff = op.stiffness(&w);
                    let mut dt = (target * n0 / rate).min(dt_max.unwrap_or(f64::INFINITY)).min(remaining);
                    if stiff > 0.0 {
                        dt = dt.min(stability / stiff);
                    }
                    dt
                }
            }
        };
        let outcome = match config.positivity {
            PositivityPolicy::ClipAndLog => {
                engine::rk4(op, &w, dt, t, Some(&k1)).map(|(mut out, flux)| {
                    let clipped = engine::clip_preserving_mass(&w, &mut out);
                    (out, flux, clipped, dt)
                })
            }
            PositivityPolicy::RejectStep => {
                let state = DiscreteMeasure::from_raw(grid.clone(), w.clone());
                step_with(op, &state, dt, t, config.positivity, config.max_retries)
                    .map(|o| (o.weights, o.flux, o.clipped, o.dt))
            }
        };
        let (new_w, flux, clipped, used_dt) = match outcome {
            Ok(v) => v,
            Err(e) => {
                summary.terminated_early = Some(e.to_string());
                break;
            }
        };
        w = new_w;
        t += used_dt;
        ledger += flux;
        clip_total += clipped;
        steps += 1;

        let cur = weighted(&w, t);
        for (k, (p, q)) in prev_probe.iter().zip(&cur).enumerate() {
            let dec = (p - q) / scale_n;
            let m = &mut summary.monotone[k];
            if dec > m.worst_decrease {
                m.worst_decrease = dec;
            }
            if dec > MONOTONE_TOL {
                m.violations += 1;
            }
        }
        prev_probe = cur;
        let g_prev = (c * (t - used_dt)).exp() * prev_w0;
        let g_cur = (c * t).exp() * w[0];
        let dec = (g_prev - g_cur) / scale_n;
        if dec > summary.monotone_w0.worst_decrease {
            summary.monotone_w0.worst_decrease = dec;
        }
        if dec > MONOTONE_TOL {
            summary.monotone_w0.violations += 1;
        }
        prev_w0 = w[0];
        let s = entropy_with_cells(&w, &cells);
        let drop = prev_s - s;
        if drop > 1e-12 * s.abs().max(1.0) {
            summary.entropy_decreases += 1;
            summary.worst_entropy_drop = summary.worst_entropy_drop.max(drop);
        }
        prev_s = s;

        let n: f64 = w.iter().sum();
        let e: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        summary.max_abs_drift_n = summary.max_abs_drift_n.max((n - n0).abs());
        summary.max_unexplained_drift_e = summary.max_unexplained_drift_e.max((e - e0 - ledger).abs());
        summary.max_w0 = summary.max_w0.max(w[0]);

        let last = t >= t_end * (1.0 - 1e-15) || steps == config.max_steps;
        if steps % config.output_every == 0 || last {
            record(&w, t, ledger, clip_total, &mut rows, &mut snapshots);
        }
    }
    if summary.terminated_early.is_some() && snapshots.last().map(|s| s != &w).unwrap_or(true) {
        record(&w, t, ledger, clip_total, &mut rows, &mut snapshots);
    }
    if t < t_end * (1.0 - 1e-15) && summary.terminated_early.is_none() {
        summary.terminated_early = Some(format!("step cap {} reached at t = {t:e}", config.max_steps));
    }
    summary.steps = steps;
    summary.final_t = t;
    summary.clip_total = clip_total;
    summary.invalid = clip_total > CLIP_FLAG * n0;
    summary.ledger_e = ledger;
    Ok(TimeSeries { columns, rows, snapshots, grid, summary })
}
