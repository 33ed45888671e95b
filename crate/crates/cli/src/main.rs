//! `bosecond` command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration error,
//! 3 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bosecond::config::{self, Preset, PRESETS};
use bosecond::equilibrium::{condensate_rounded_formula, equilibrium_table, solve_equilibrium, EquilibriumRow, EQUILIBRIUM_COLUMNS};
use bosecond::kernel::{w_hard_closed, w_quadrature, KernelFamily, KernelModel, QuadConfig, WRule};
use bosecond::measure::{generate_example_initial, local_condition, ExampleOptions, Profile};
use bosecond::output::{to_json_string, write_csv_to, RunManifest};
use bosecond::simulator::experiments::{condensation_experiment, no_condensation_experiment, CondensationReport, NoCondensationReport};
use bosecond::simulator::{run, Experiment, InitialData, RunSummary, SimulationConfig};
use bosecond::suite::{run_suite, Suite};
use bosecond::verifier::{check_kernel_suite, KernelSuiteSizes, VerificationReport};
use bosecond::{Error, GridSpec};

#[derive(Parser)]
#[command(name = "bosecond", version, about = "Isotropic Boltzmann-Nordheim solver and condensation verification lab")]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; outputs are reproducible at a fixed count.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate W(x, y, z), or audit a kernel's bounds when no triple is given.
    Kernel(KernelArgs),
    /// Bose-Einstein equilibrium for (N, E), or a sweep over temperature ratios.
    Equilibrium(EquilibriumArgs),
    /// Run the configured simulation and its experiment, if any.
    Simulate(SimulateArgs),
    /// Run a verification suite and emit its report.
    Verify(VerifyArgs),
    /// Generate initial data satisfying the local condition.
    InitGen(InitGenArgs),
    /// Print a named preset, or run it with --run.
    Preset(PresetArgs),
}

#[derive(Args)]
struct KernelFlags {
    /// hard_sphere, power, yukawa or tabulated.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    /// Two-column CSV `r, phi_hat` for the tabulated family.
    #[arg(long)]
    phi_hat_file: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    kernel: KernelFlags,
    #[arg(long, requires_all = ["y", "z"])]
    x: Option<f64>,
    #[arg(long, requires_all = ["x", "z"])]
    y: Option<f64>,
    #[arg(long, requires_all = ["x", "y"])]
    z: Option<f64>,
    /// Number of audit triples.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args)]
struct EquilibriumArgs {
    /// Mass.
    #[arg(long = "n", short = 'N')]
    n: Option<f64>,
    /// Energy.
    #[arg(long = "e", short = 'E', conflicts_with = "t_ratios")]
    e: Option<f64>,
    /// Comma-separated temperature ratios to sweep with mass N.
    #[arg(long, value_delimiter = ',')]
    t_ratios: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Use a named simulation preset instead of --config.
    #[arg(long)]
    preset: Option<String>,
    /// Also write the JSON report here when emitting CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Triples for the kernel suite and measures for the collision suite.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct InitGenArgs {
    #[command(flatten)]
    kernel: KernelFlags,
    #[arg(long)]
    alpha: Option<f64>,
    /// exponential or compact.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    energy_fraction: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
}

#[derive(Args)]
struct PresetArgs {
    /// One of the known presets.
    name: String,
    /// Execute the preset instead of printing it.
    #[arg(long)]
    run: bool,
    /// Triples per family for a kernel-audit run.
    #[arg(long)]
    samples: Option<usize>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Precondition(_) | Error::Domain(_) => 2,
        _ => 3,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), msg: e.to_string() }
    }
}

fn config_failure(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Whether every check in the command passed.
type Verdict = bool;

struct Ctx {
    config: Option<PathBuf>,
    seed: u64,
    threads: usize,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl Ctx {
    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, Some(self.seed), self.threads)
    }

    fn load_config(&self) -> CliResult<Option<SimulationConfig>> {
        match &self.config {
            None => Ok(None),
            Some(p) => config::parse_config(p).map(Some).map_err(|e| config_failure(format!("{}: {e}", p.display()))),
        }
    }

    fn emit_bytes(&self, bytes: &[u8]) -> CliResult<()> {
        let res = match &self.out {
            Some(p) => std::fs::write(p, bytes),
            None => std::io::stdout().lock().write_all(bytes),
        };
        res.map_err(|e| Failure { code: 3, msg: format!("writing output: {e}") })
    }

    fn emit_json<T: Serialize>(&self, manifest: &RunManifest, report: &T) -> CliResult<()> {
        let s = to_json_string(manifest, report)?;
        self.emit_bytes(s.as_bytes())
    }

    fn emit_csv(&self, manifest: &RunManifest, columns: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
        let columns: Vec<String> = columns.iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, manifest, &columns, rows)?;
        self.emit_bytes(&buf)
    }

    fn json_only(&self, command: &str) -> CliResult<()> {
        match self.format {
            Some(Format::Csv) => Err(config_failure(format!("`{command}` emits JSON only"))),
            _ => Ok(()),
        }
    }
}

fn kernel_from_flags(flags: &KernelFlags, fallback: Option<&KernelModel>) -> CliResult<KernelModel> {
    let Some(family) = flags.family.as_deref() else {
        if flags.eta.is_some() || flags.b0.is_some() || flags.phi_hat_file.is_some() {
            return Err(config_failure("--eta, --b0 and --phi-hat-file need --family"));
        }
        return fallback.cloned().ok_or_else(|| config_failure("give --family or a --config with a kernel"));
    };
    let fam: KernelFamily = family.parse()?;
    Ok(match fam {
        KernelFamily::HardSphere => KernelModel::hard_sphere(),
        KernelFamily::Yukawa => KernelModel::yukawa(),
        KernelFamily::Power => KernelModel::power(
            flags.eta.ok_or_else(|| config_failure("power family needs --eta"))?,
            flags.b0.ok_or_else(|| config_failure("power family needs --b0"))?,
        )?,
        KernelFamily::Tabulated => {
            let path = flags.phi_hat_file.as_ref().ok_or_else(|| config_failure("tabulated family needs --phi-hat-file"))?;
            let eta = flags.eta.ok_or_else(|| config_failure("tabulated family needs --eta"))?;
            KernelModel::tabulated(config::read_phi_hat_table(path)?, eta)
        }
    })
}

#[derive(Serialize)]
struct KernelValue {
    family: &'static str,
    eta: f64,
    b0: f64,
    x: f64,
    y: f64,
    z: f64,
    w: f64,
    /// Closed form, hard spheres only.
    w_closed: Option<f64>,
}

fn cmd_kernel(ctx: &Ctx, a: &KernelArgs) -> CliResult<Verdict> {
    let cfg = ctx.load_config()?;
    let model = kernel_from_flags(&a.kernel, cfg.as_ref().map(|c| &c.kernel))?;
    let manifest = ctx.manifest("kernel");
    if let (Some(x), Some(y), Some(z)) = (a.x, a.y, a.z) {
        let quad = cfg.as_ref().map(|c| c.quad).unwrap_or(QuadConfig { s_nodes: 64, theta_nodes: 64, x_nodes: 16 });
        let w = w_quadrature(&model, x, y, z, &WRule::new(quad)?)?;
        let w_closed = (model.family() == KernelFamily::HardSphere).then(|| w_hard_closed(x, y, z));
        match ctx.format.unwrap_or(Format::Json) {
            Format::Json => {
                let v = KernelValue { family: model.family().as_str(), eta: model.eta(), b0: model.b0(), x, y, z, w, w_closed };
                ctx.emit_json(&manifest, &v)?;
            }
            Format::Csv => ctx.emit_csv(&manifest, &["x", "y", "z", "W"], &[vec![x, y, z, w]])?,
        }
        return Ok(true);
    }
    ctx.json_only("kernel audit")?;
    let report = check_kernel_suite(&model, ctx.seed, KernelSuiteSizes::from_triples(a.samples))?;
    ctx.emit_json(&manifest, &report)?;
    Ok(report.passed())
}

#[derive(Serialize)]
struct EquilibriumOut {
    state: bosecond::equilibrium::EquilibriumState,
    /// `(1 − (2.2720 E / N^{5/3})^{3/5})₊ N`.
    condensate_rounded_formula: f64,
}

fn emit_table(ctx: &Ctx, manifest: &RunManifest, rows: &[EquilibriumRow]) -> CliResult<()> {
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => ctx.emit_csv(manifest, EQUILIBRIUM_COLUMNS, &rows.iter().map(EquilibriumRow::values).collect::<Vec<_>>()),
        Format::Json => ctx.emit_json(manifest, &rows),
    }
}

fn cmd_equilibrium(ctx: &Ctx, a: &EquilibriumArgs) -> CliResult<Verdict> {
    let cfg = ctx.load_config()?;
    let manifest = ctx.manifest("equilibrium");
    if let Some(trs) = &a.t_ratios {
        let rows = equilibrium_table(a.n.unwrap_or(1.0), trs)?;
        emit_table(ctx, &manifest, &rows)?;
        return Ok(true);
    }
    let (n, e) = match (a.n, a.e, &cfg) {
        (Some(n), Some(e), _) => (n, e),
        (None, None, Some(c)) => {
            let g = c.grid.build()?;
            c.initial.build(&g, &c.kernel)?.moments()
        }
        _ => return Err(config_failure("give --n and --e, --t-ratios, or a --config with initial data")),
    };
    let state = solve_equilibrium(n, e, a.tol)?;
    match ctx.format.unwrap_or(Format::Json) {
        Format::Json => ctx.emit_json(&manifest, &EquilibriumOut { state, condensate_rounded_formula: condensate_rounded_formula(n, e) })?,
        Format::Csv => {
            let row = EquilibriumRow { t_ratio: state.t_ratio, state, fraction: state.condensate / n, formula_fraction: condensate_rounded_formula(n, e) / n };
            emit_table(ctx, &manifest, &[row])?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct SimulateOut<'a> {
    columns: &'a [String],
    rows: &'a [Vec<f64>],
    summary: &'a RunSummary,
    condensation: Option<CondensationReport>,
    no_condensation: Option<NoCondensationReport>,
}

fn simulate(ctx: &Ctx, cfg: &SimulationConfig, report_path: Option<&Path>) -> CliResult<Verdict> {
    cfg.validate()?;
    let (series, cond, nocond) = match cfg.experiment {
        Experiment::None => (run(cfg)?, None, None),
        Experiment::Condensation => {
            let (s, r) = condensation_experiment(cfg, None)?;
            (s, Some(r), None)
        }
        Experiment::NoCondensation => {
            let (s, r) = no_condensation_experiment(cfg)?;
            (s, None, Some(r))
        }
    };
    let passed = !series.summary.invalid
        && series.summary.terminated_early.is_none()
        && cond.as_ref().map_or(true, CondensationReport::passes)
        && nocond.as_ref().map_or(true, NoCondensationReport::passes);
    let manifest = ctx.manifest("simulate").with_config(cfg)?.with_series(&series);
    let out = SimulateOut { columns: &series.columns, rows: &series.rows, summary: &series.summary, condensation: cond, no_condensation: nocond };
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let cols: Vec<&str> = series.columns.iter().map(String::as_str).collect();
            ctx.emit_csv(&manifest, &cols, &series.rows)?;
            if let Some(p) = report_path {
                std::fs::write(p, to_json_string(&manifest, &out)?).map_err(|e| Failure { code: 3, msg: format!("writing report: {e}") })?;
            }
        }
        Format::Json => ctx.emit_json(&manifest, &out)?,
    }
    if let Some(msg) = &series.summary.terminated_early {
        eprintln!("run ended early: {msg}");
    }
    Ok(passed)
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> CliResult<Verdict> {
    let cfg = match &a.preset {
        Some(_) if ctx.config.is_some() => return Err(config_failure("give either --preset or --config, not both")),
        Some(name) => match config::preset(name)? {
            Preset::Simulation(c) => c,
            _ => return Err(config_failure(format!("preset `{name}` is not a simulation; use `preset {name} --run`"))),
        },
        None => ctx.load_config()?.ok_or_else(|| config_failure("simulate needs --config or --preset"))?,
    };
    simulate(ctx, &cfg, a.report.as_deref())
}

fn cmd_verify(ctx: &Ctx, a: &VerifyArgs) -> CliResult<Verdict> {
    ctx.json_only("verify")?;
    let suite: Suite = a.suite.parse()?;
    let report = run_suite(suite, ctx.seed, a.samples)?;
    ctx.emit_json(&ctx.manifest("verify"), &report)?;
    for c in report.hard_failures() {
        eprintln!("FAILED {}: worst margin {:e} (tolerance {:e}) at {}", c.name, c.worst_margin, c.tolerance, c.witness.as_deref().unwrap_or("-"));
    }
    Ok(report.passed())
}

#[derive(Serialize)]
struct InitGenOut {
    local: bosecond::measure::LocalCondition,
    r: f64,
    c0: f64,
    lambda: f64,
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "E")]
    e: f64,
    x: Vec<f64>,
    w: Vec<f64>,
}

fn cmd_init_gen(ctx: &Ctx, a: &InitGenArgs) -> CliResult<Verdict> {
    let cfg = ctx.load_config()?;
    let model = kernel_from_flags(&a.kernel, cfg.as_ref().map(|c| &c.kernel))?;
    let (mut alpha, mut profile, mut opts) = (None, Profile::Exponential, ExampleOptions::default());
    if let Some(InitialData::Example { alpha: al, profile: p, energy_fraction, safety }) = cfg.as_ref().map(|c| &c.initial) {
        alpha = Some(*al);
        profile = *p;
        opts = ExampleOptions { energy_fraction: *energy_fraction, safety: *safety };
    }
    let alpha = a.alpha.or(alpha).ok_or_else(|| config_failure("init-gen needs --alpha or a config with a [generator] block"))?;
    if let Some(p) = &a.profile {
        profile = p.parse()?;
    }
    opts.energy_fraction = a.energy_fraction.unwrap_or(opts.energy_fraction);
    opts.safety = a.safety.unwrap_or(opts.safety);
    if model.family() != KernelFamily::Power {
        return Err(config_failure("init-gen needs a power kernel"));
    }
    let spec = cfg.as_ref().map(|c| c.grid).unwrap_or_else(GridSpec::default);
    let grid = spec.build()?;
    let gen = generate_example_initial(alpha, model.eta(), model.b0(), profile, &grid, opts)?;
    let local = local_condition(&gen.measure, alpha, model.eta(), model.b0())?;
    let (n, e) = gen.measure.moments();
    let manifest = ctx.manifest("init-gen");
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = grid.nodes().iter().zip(gen.measure.weights()).map(|(x, w)| vec![*x, *w]).collect();
            ctx.emit_csv(&manifest, &["x", "w"], &rows)?;
        }
        Format::Json => ctx.emit_json(
            &manifest,
            &InitGenOut { local, r: gen.r, c0: gen.c0, lambda: gen.lambda, n, e, x: grid.nodes().to_vec(), w: gen.measure.weights().to_vec() },
        )?,
    }
    Ok(local.passes())
}

#[derive(Serialize)]
struct AuditOut {
    reports: Vec<VerificationReport>,
}

fn cmd_preset(ctx: &Ctx, a: &PresetArgs) -> CliResult<Verdict> {
    let p = config::preset(&a.name)?;
    let manifest = ctx.manifest("preset");
    if !a.run {
        match p {
            Preset::Simulation(c) => ctx.emit_bytes(config::to_config_string(&c).as_bytes())?,
            Preset::KernelAudit { models } => ctx.emit_json(&manifest, &models)?,
            Preset::EquilibriumTable { n, t_ratios } => {
                ctx.emit_json(&manifest, &serde_json::json!({ "N": n, "t_ratios": t_ratios }))?
            }
        }
        return Ok(true);
    }
    match p {
        Preset::Simulation(c) => simulate(ctx, &c, None),
        Preset::KernelAudit { models } => {
            ctx.json_only("kernel-audit")?;
            let sizes = KernelSuiteSizes::from_triples(a.samples.unwrap_or(10_000));
            let reports = models.iter().map(|m| check_kernel_suite(m, ctx.seed, sizes)).collect::<bosecond::Result<Vec<_>>>()?;
            let ok = reports.iter().all(VerificationReport::passed);
            ctx.emit_json(&manifest, &AuditOut { reports })?;
            Ok(ok)
        }
        Preset::EquilibriumTable { n, t_ratios } => {
            emit_table(ctx, &manifest, &equilibrium_table(n, &t_ratios)?)?;
            Ok(true)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<Verdict> {
    if cli.threads == 0 {
        return Err(config_failure("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Failure { code: 3, msg: format!("thread pool: {e}") })?;
    let ctx = Ctx { config: cli.config, seed: cli.seed, threads: cli.threads, out: cli.out, format: cli.format };
    match &cli.command {
        Command::Kernel(a) => cmd_kernel(&ctx, a),
        Command::Equilibrium(a) => cmd_equilibrium(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::InitGen(a) => cmd_init_gen(&ctx, a),
        Command::Preset(a) => {
            if !PRESETS.contains(&a.name.as_str()) {
                return Err(config_failure(format!("unknown preset `{}`; known: {}", a.name, PRESETS.join(", "))));
            }
            cmd_preset(&ctx, a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
