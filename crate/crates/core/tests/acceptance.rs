//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use bosecond::equilibrium::{condensate_rounded_formula, solve_equilibrium, zeta};
use bosecond::output::{to_json_string, write_csv_to, RunManifest};
use bosecond::simulator::{run, DtPolicy, Horizon, InitialData, SimulationConfig, TimeSeries};
use bosecond::suite::{collision_suite, condensation_suite};
use bosecond::verifier::{
    check_kernel_suite, check_monotonicity, CheckResult, KernelSuiteSizes, VerificationReport, ANCHOR_CONDENSATION,
    ANCHOR_CONVEX, ANCHOR_CROSS_SECTION_LOWER, ANCHOR_CUBIC_LOWER, ANCHOR_DECOMPOSITION, ANCHOR_GROWTH,
    ANCHOR_GROWTH_ZERO, ANCHOR_HARD_SPHERE, ANCHOR_INTERVAL_IDENTITY, ANCHOR_MONOTONE, ANCHOR_NO_CONDENSATION,
    ANCHOR_POST_COLLISION, ANCHOR_POWER_LOWER, ANCHOR_YUKAWA_DIFFERENCE, ANCHOR_YUKAWA_UPPER,
};
use bosecond::{GridSpec, KernelModel};

const SEED: u64 = 20_240_601;

struct Line {
    ok: bool,
    text: String,
}

fn line(n: usize, title: &str, ok: bool, detail: String) -> Line {
    Line { ok, text: format!("criterion {n} [{}] {title}: {detail}", if ok { "PASS" } else { "FAIL" }) }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

/// The named checks, all present and passing; with a one-line digest.
fn require(report: &VerificationReport, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let hits: Vec<&CheckResult> = report.checks.iter().filter(|c| c.anchor == *name).collect();
        if hits.is_empty() {
            ok = false;
            parts.push(format!("{name}: missing"));
            continue;
        }
        let worst = hits.iter().map(|c| c.worst_margin).fold(f64::INFINITY, f64::min);
        let samples: usize = hits.iter().map(|c| c.samples).sum();
        let pass = hits.iter().all(|c| c.passed);
        ok &= pass;
        parts.push(format!("{name} {} (n = {samples}, worst {worst:.2e})", if pass { "ok" } else { "FAILED" }));
    }
    (ok, parts.join("; "))
}

fn hard_sphere_config(t_end: f64) -> SimulationConfig {
    let initial = InitialData::Bump { n: 1.0, center: 1.0, width: 0.15 };
    let mut c = SimulationConfig::new(KernelModel::hard_sphere(), initial, Horizon::Absolute { t: t_end });
    c.grid = GridSpec { nodes: 64, ratio: 1.25, transition: 1.0, x_max: 12.0 };
    c.dt = DtPolicy::Fixed { dt: 1e-4 };
    c.output_every = 100;
    c
}

fn criterion_1() -> Line {
    let t = Instant::now();
    let sizes = KernelSuiteSizes { identities: 100_000, triples: 10_000, convergence: 100 };
    let r = check_kernel_suite(&KernelModel::hard_sphere(), SEED, sizes).expect("kernel suite runs");
    let (ok, detail) = require(&r, &[ANCHOR_INTERVAL_IDENTITY, ANCHOR_POST_COLLISION, ANCHOR_HARD_SPHERE]);
    let el = t.elapsed();
    let ok = ok && el < Duration::from_secs(30);
    line(1, "kernel identities", ok, format!("{detail}; {}", secs(el)))
}

fn criterion_2() -> Line {
    let t = Instant::now();
    let sizes = KernelSuiteSizes::from_triples(10_000);
    let power = check_kernel_suite(&KernelModel::power(0.5, 1.0 / 16.0).unwrap(), SEED, sizes).expect("power suite runs");
    let yukawa = check_kernel_suite(&KernelModel::yukawa(), SEED, sizes).expect("Yukawa suite runs");
    let (a, da) = require(&power, &[ANCHOR_CROSS_SECTION_LOWER, ANCHOR_POWER_LOWER]);
    let (b, db) = require(&yukawa, &[ANCHOR_YUKAWA_UPPER, ANCHOR_YUKAWA_DIFFERENCE]);
    let el = t.elapsed();
    let ok = a && b && el < Duration::from_secs(120);
    line(2, "kernel bounds", ok, format!("{da}; {db}; {}", secs(el)))
}

fn criterion_3() -> (Line, TimeSeries) {
    let t = Instant::now();
    let cfg = hard_sphere_config(0.1);
    let grid = cfg.grid.build().unwrap();
    let f0 = cfg.initial.build(&grid, &cfg.kernel).unwrap();
    let (n, e) = f0.moments();
    let far = f0.integrate(|x| if x > grid.x_max() / 4.0 { 1.0 } else { 0.0 });
    let s = run(&cfg).expect("hard-sphere run");
    let sm = &s.summary;
    let drift_n = sm.max_abs_drift_n / n;
    let ledger = sm.ledger_e.abs() / e;
    let unexplained = sm.max_unexplained_drift_e / e;
    let ok = sm.steps == 1000
        && far <= 1e-12 * n
        && drift_n <= 1e-9
        && ledger <= 1e-6
        && unexplained <= 1e-12 * sm.steps as f64
        && !sm.invalid
        && t.elapsed() < Duration::from_secs(120);
    let detail = format!(
        "{} steps, mass beyond x_M/4 {far:.1e}, |dN|/N {drift_n:.2e}, ledger/E {ledger:.2e}, unexplained dE/E {unexplained:.2e}; {}",
        sm.steps,
        secs(t.elapsed())
    );
    (line(3, "hard-sphere conservation", ok, detail), s)
}

fn criterion_4(collision: &VerificationReport) -> Line {
    let (ok, detail) = require(collision, &[ANCHOR_CONVEX, ANCHOR_DECOMPOSITION]);
    line(4, "convex positivity and decomposition", ok, detail)
}

/// `ζ(s)` by direct summation with an Euler–Maclaurin tail.
fn zeta_oracle(s: f64) -> f64 {
    let m = 2000usize;
    let head: f64 = (1..m).map(|k| (k as f64).powf(-s)).sum();
    let x = m as f64;
    head + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s / 12.0 * x.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * x.powf(-s - 3.0)
}

fn criterion_5() -> Line {
    let st = solve_equilibrium(3.0, 1.0, 1e-12).unwrap();
    let formula = condensate_rounded_formula(3.0, 1.0);
    let rel = (st.condensate - formula).abs() / formula;
    let z32 = (zeta(1.5).unwrap() - zeta_oracle(1.5)).abs();
    let z52 = (zeta(2.5).unwrap() - zeta_oracle(2.5)).abs();
    let ok = rel <= 1e-3 && (st.condensate - 1.364).abs() < 1e-3 && z32 <= 1e-10 && z52 <= 1e-10;
    line(
        5,
        "equilibrium cross-check",
        ok,
        format!(
            "condensate {:.6} against formula {formula:.6} (relative {rel:.1e}); zeta errors {z32:.1e}, {z52:.1e}",
            st.condensate
        ),
    )
}

fn criterion_6(hs: &TimeSeries, cond: &VerificationReport) -> Line {
    let mut checks: Vec<CheckResult> = cond.checks.iter().filter(|c| c.anchor == ANCHOR_MONOTONE).cloned().collect();
    checks.push(check_monotonicity(hs, "hard-sphere run"));
    let ok = checks.len() == 3 && checks.iter().all(|c| c.passed);
    let detail = checks
        .iter()
        .map(|c| format!("{} {} (worst {:.1e})", c.name, if c.passed { "ok" } else { "FAILED" }, c.worst_margin))
        .collect::<Vec<_>>()
        .join("; ");
    line(6, "exponential monotonicity", ok, detail)
}

fn criterion_7(cond: &VerificationReport, out: &bosecond::suite::CondensationSuiteOutput, el: Duration) -> Line {
    let (ok, _) = require(cond, &[ANCHOR_CONDENSATION, ANCHOR_NO_CONDENSATION]);
    let c = &out.condensation;
    let nc = &out.no_condensation;
    let detail = format!(
        "(a) w0 >= N/8 at t/h = {:.2e}, final deficit {:.2}%; (b) noise floor/N {:.1e}, min gap {:.5}; {}",
        c.t_reach_eighth.map(|t| t / c.constants.h).unwrap_or(f64::INFINITY),
        100.0 * c.final_relative_deficit,
        nc.noise_floor / nc.constants.n0,
        nc.min_relative_gap,
        secs(el)
    );
    line(7, "condensation dichotomy", ok && el < Duration::from_secs(1200), detail)
}

fn criterion_8() -> Line {
    let emit = || -> (Vec<u8>, String) {
        let cfg = hard_sphere_config(0.02);
        let s = run(&cfg).unwrap();
        let manifest = RunManifest::new("acceptance", Some(SEED), 1).with_config(&cfg).unwrap().with_series(&s);
        let mut csv = Vec::new();
        write_csv_to(&mut csv, &manifest, &s.columns, &s.rows).unwrap();
        let report = collision_suite_small();
        (csv, to_json_string(&manifest, &report).unwrap())
    };
    let (a_csv, a_json) = emit();
    let (b_csv, b_json) = emit();
    let ok = a_csv == b_csv && a_json == b_json;
    line(8, "determinism", ok, format!("CSV {} bytes, JSON {} bytes, identical: {ok}", a_csv.len(), a_json.len()))
}

fn collision_suite_small() -> VerificationReport {
    bosecond::verifier::check_collision_suite(&KernelModel::power(0.5, 1.0 / 16.0).unwrap(), SEED, 50).unwrap()
}

fn criterion_9(collision: &VerificationReport, cond: &VerificationReport) -> Line {
    let kk: Vec<&CheckResult> = collision.checks.iter().filter(|c| c.anchor == ANCHOR_CUBIC_LOWER).collect();
    let kk_ok = kk.len() >= 2 && kk.iter().all(|c| c.passed);
    let growth: Vec<&CheckResult> = collision
        .checks
        .iter()
        .chain(&cond.checks)
        .filter(|c| c.anchor == ANCHOR_GROWTH || c.anchor == ANCHOR_GROWTH_ZERO)
        .collect();
    let flagged = growth.iter().filter(|c| !c.passed).count();
    let kk_worst = kk.iter().map(|c| c.worst_margin).fold(f64::INFINITY, f64::min);
    let g_worst = growth.iter().map(|c| c.worst_margin).fold(f64::INFINITY, f64::min);
    let ok = kk_ok && growth.len() == 4 && growth.iter().all(|c| c.advisory);
    line(
        9,
        "inequality audits",
        ok,
        format!(
            "cubic lower bound {} (worst {kk_worst:.2e}); {} advisory growth audits, {flagged} flagged (worst {g_worst:.2e})",
            if kk_ok { "ok" } else { "FAILED" },
            growth.len()
        ),
    )
}

fn main() {
    let mut lines = vec![criterion_1(), criterion_2()];
    let (l3, hs) = criterion_3();
    lines.push(l3);
    let collision = collision_suite(SEED, 1000).expect("collision suite runs");
    lines.push(criterion_4(&collision));
    lines.push(criterion_5());
    let t = Instant::now();
    let (cond, out) = condensation_suite(SEED).expect("condensation suite runs");
    let el = t.elapsed();
    lines.push(criterion_6(&hs, &cond));
    lines.push(criterion_7(&cond, &out, el));
    lines.push(criterion_8());
    lines.push(criterion_9(&collision, &cond));
    for l in &lines {
        println!("{}", l.text);
    }
    let failed = lines.iter().filter(|l| !l.ok).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
