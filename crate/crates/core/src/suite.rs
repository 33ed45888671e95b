//! Named bundles of checks, as run by `verify --suite`.

use serde::{Deserialize, Serialize};

use crate::config::{condensation_demo, no_condensation_demo};
use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::simulator::experiments::{
    coarse_companion, condensation_experiment, no_condensation_experiment, CondensationReport, NoCondensationReport,
    EQUILIBRIUM_BAND, GAP_FRACTION, NOISE_FLOOR_MAX, REACH_SLACK,
};
use crate::simulator::{run, Horizon, InitialData, SimulationConfig, TimeSeries};
use crate::verifier::{
    check_collision_suite, check_gronwall_bound, check_growth_inequalities, check_kernel_suite, check_local_condition,
    check_monotonicity, CheckResult, KernelSuiteSizes, VerificationReport, ANCHOR_CONDENSATION, ANCHOR_NO_CONDENSATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kernel,
    Collision,
    Condensation,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Self::Kernel),
            "collision" => Ok(Self::Collision),
            "condensation" => Ok(Self::Condensation),
            "all" => Ok(Self::All),
            other => Err(Error::config(format!("unknown suite `{other}`; known: kernel, collision, condensation, all"))),
        }
    }
}

/// The three families the suites sweep: hard spheres, power `η = ½` with
/// `b₀ = 1/16`, Yukawa.
pub fn suite_models() -> Vec<KernelModel> {
    vec![KernelModel::hard_sphere(), KernelModel::power(0.5, 1.0 / 16.0).expect("valid power kernel"), KernelModel::yukawa()]
}

fn prefixed(report: VerificationReport, prefix: &str) -> VerificationReport {
    let checks = report
        .checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{}, {prefix}", c.name);
            c
        })
        .collect();
    VerificationReport::new(report.seed, checks)
}

/// Kernel suites for all three families; `samples` is the triple count.
pub fn kernel_suite(seed: u64, samples: usize) -> Result<VerificationReport> {
    let mut out = VerificationReport::new(seed, vec![]);
    for m in suite_models() {
        let r = check_kernel_suite(&m, seed, KernelSuiteSizes::from_triples(samples))?;
        out = out.merge(prefixed(r, m.family().as_str()));
    }
    Ok(out)
}

/// Collision suites for all three families on `samples` random measures, plus
/// the growth audits along a short power-kernel trajectory.
pub fn collision_suite(seed: u64, samples: usize) -> Result<VerificationReport> {
    let mut out = VerificationReport::new(seed, vec![]);
    for m in suite_models() {
        let r = check_collision_suite(&m, seed, samples)?;
        out = out.merge(prefixed(r, m.family().as_str()));
    }
    let mut short = condensation_demo();
    short.grid.nodes = 32;
    short.grid.ratio = 1.25f64.powi(2);
    short.horizon = Horizon::InUnitsOfH { factor: 1e-11 };
    let (series, _) = condensation_experiment(&short, None)?;
    let audits = growth_audit(&short, &series)?;
    Ok(out.merge(prefixed(VerificationReport::new(seed, audits), "short trajectory")))
}

fn interp(t: &[f64], v: &[f64], at: f64) -> f64 {
    match t.iter().position(|&s| s >= at) {
        Some(0) => v[0],
        Some(k) => {
            let w = (at - t[k - 1]) / (t[k] - t[k - 1]);
            v[k - 1] + w * (v[k] - v[k - 1])
        }
        None => *v.last().unwrap_or(&0.0),
    }
}

/// Largest `|w₀|` discrepancy between a run and its coarse companion, taken at
/// the run's record times.
pub fn two_resolution_consistency(config: &SimulationConfig, series: &TimeSeries) -> Result<f64> {
    let mut coarse_cfg = config.clone();
    coarse_cfg.grid = coarse_companion(&config.grid);
    let coarse = run(&coarse_cfg)?;
    let (tc, wc) = (coarse.times(), coarse.column("w0").unwrap_or_default());
    let (tf, wf) = (series.times(), series.column("w0").unwrap_or_default());
    Ok(tf.iter().zip(&wf).map(|(t, w)| (w - interp(&tc, &wc, *t)).abs()).fold(0.0, f64::max))
}

fn generator_alpha(config: &SimulationConfig) -> Result<f64> {
    match config.initial {
        InitialData::Example { alpha, .. } => Ok(alpha),
        _ => Err(Error::Precondition("growth audits need generated initial data".into())),
    }
}

/// Both growth bounds along `series`, toleranced by the two-resolution error.
pub fn growth_audit(config: &SimulationConfig, series: &TimeSeries) -> Result<Vec<CheckResult>> {
    let consistency = two_resolution_consistency(config, series)?;
    check_growth_inequalities(series, &config.kernel, generator_alpha(config)?, &config.probe_eps, consistency)
}

fn verdict(name: &str, margin: f64, passed: bool, samples: usize, witness: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        anchor: name.into(),
        samples,
        worst_margin: margin,
        tolerance: 0.0,
        passed,
        advisory: false,
        witness: Some(witness),
        note: None,
    }
}

pub fn condensation_check(r: &CondensationReport) -> CheckResult {
    let limit = REACH_SLACK * r.constants.h;
    let reach = r.t_reach_eighth.map(|t| (limit - t) / limit).unwrap_or(-1.0);
    let band = (EQUILIBRIUM_BAND - r.final_relative_deficit.abs()) / EQUILIBRIUM_BAND;
    let witness = format!(
        "w0 >= N/8 at t = {}, limit {limit:e} (h = {:e}); final w0 {:e} against F_be(0) {:e}",
        r.t_reach_eighth.map(|t| format!("{t:e}")).unwrap_or_else(|| "never".into()),
        r.constants.h,
        r.final_w0,
        r.equilibrium.condensate
    );
    verdict(ANCHOR_CONDENSATION, reach.min(band), r.passes(), r.summary.steps, witness)
}

pub fn no_condensation_check(r: &NoCondensationReport) -> CheckResult {
    let n = r.constants.n0;
    let floor = (NOISE_FLOOR_MAX * n - r.noise_floor) / (NOISE_FLOOR_MAX * n);
    let gap = (r.min_relative_gap - GAP_FRACTION) / GAP_FRACTION;
    let witness = format!(
        "noise floor {:e} (fine {:e}, coarse {:e}) for N = {n:e}; minimum relative gap {}",
        r.noise_floor, r.max_w0, r.max_w0_coarse, r.min_relative_gap
    );
    verdict(ANCHOR_NO_CONDENSATION, floor.min(gap), r.passes(), r.summary.steps, witness)
}

/// Everything the condensation suite produced, kept for emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensationSuiteOutput {
    pub condensation: CondensationReport,
    pub no_condensation: NoCondensationReport,
}

/// Both dichotomy demos with their local-condition, monotonicity, growth and
/// Gronwall checks.
pub fn condensation_suite(seed: u64) -> Result<(VerificationReport, CondensationSuiteOutput)> {
    let cfg = condensation_demo();
    let (series, cond) = condensation_experiment(&cfg, None)?;
    let grid = cfg.grid.build()?;
    let initial = cfg.initial.build(&grid, &cfg.kernel)?;
    let mut report = check_local_condition(&initial, generator_alpha(&cfg)?, cfg.kernel.eta(), cfg.kernel.b0())?;
    report.seed = seed;
    let mut checks = vec![condensation_check(&cond), check_monotonicity(&series, "condensation demo")];
    checks.extend(growth_audit(&cfg, &series)?);

    let ncfg = no_condensation_demo();
    let (nseries, nocond) = no_condensation_experiment(&ncfg)?;
    checks.push(no_condensation_check(&nocond));
    checks.push(check_monotonicity(&nseries, "no-condensation demo"));
    checks.push(check_gronwall_bound(&nseries, nocond.constants.n0, nocond.noise_floor));
    let report = report.merge(VerificationReport::new(seed, checks));
    Ok((report, CondensationSuiteOutput { condensation: cond, no_condensation: nocond }))
}

pub const DEFAULT_TRIPLES: usize = 10_000;
pub const DEFAULT_MEASURES: usize = 1_000;

/// Runs one suite. `samples` sizes the kernel triples and collision measures;
/// `None` uses [`DEFAULT_TRIPLES`] and [`DEFAULT_MEASURES`].
pub fn run_suite(suite: Suite, seed: u64, samples: Option<usize>) -> Result<VerificationReport> {
    let triples = samples.unwrap_or(DEFAULT_TRIPLES);
    let measures = samples.unwrap_or(DEFAULT_MEASURES);
    match suite {
        Suite::Kernel => kernel_suite(seed, triples),
        Suite::Collision => collision_suite(seed, measures),
        Suite::Condensation => Ok(condensation_suite(seed)?.0),
        Suite::All => Ok(kernel_suite(seed, triples)?
            .merge(collision_suite(seed, measures)?)
            .merge(condensation_suite(seed)?.0)),
    }
}
