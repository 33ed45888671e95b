//! Flat `key = value` configuration files and the named presets.
//!
//! Keys may be grouped under `[section]` headers; a key inside a section must
//! belong to it, and top-level keys may be any known key. Comments start with
//! `#` or `;`. Unknown keys, unknown sections and repeated keys are errors
//! carrying the offending line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{KernelFamily, KernelModel, PhiHatTable, QuadConfig};
use crate::measure::Profile;
use crate::simulator::{DtPolicy, Experiment, Horizon, InitialData, PositivityPolicy, SimulationConfig};

const SECTIONS: &[(&str, &[&str])] = &[
    ("kernel", &["family", "kernel", "eta", "b0", "phi_hat_file"]),
    ("grid", &["nodes", "ratio", "transition", "x_max"]),
    ("quad", &["s_nodes", "theta_nodes", "x_nodes"]),
    ("initial", &["initial", "N", "E", "center", "width", "file"]),
    ("generator", &["alpha", "profile", "energy_fraction", "safety"]),
    (
        "run",
        &[
            "t_end",
            "t_end_over_h",
            "dt",
            "dt_target",
            "dt_stability",
            "dt_max",
            "positivity",
            "max_retries",
            "probe_eps",
            "output_every",
            "max_steps",
            "experiment",
        ],
    ),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS.iter().find(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s)
}

/// Raw key/value pairs with the line each came from.
#[derive(Debug, Default)]
struct Entries {
    map: BTreeMap<String, (String, usize)>,
    base: Option<PathBuf>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut out = Entries::default();
        let mut section: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config_at(line_no, format!("malformed section header `{line}`")))?
                    .trim();
                section = Some(
                    SECTIONS
                        .iter()
                        .find(|(s, _)| *s == name)
                        .map(|(s, _)| *s)
                        .ok_or_else(|| Error::config_at(line_no, format!("unknown section `[{name}]`")))?,
                );
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config_at(line_no, format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let home = section_of(k).ok_or_else(|| Error::config_at(line_no, format!("unknown key `{k}`")))?;
            if let Some(s) = section {
                if s != home {
                    return Err(Error::config_at(line_no, format!("key `{k}` belongs in [{home}], not [{s}]")));
                }
            }
            // `kernel` is an alias of `family`
            let canon = if k == "kernel" { "family" } else { k };
            if out.map.contains_key(canon) {
                return Err(Error::config_at(line_no, format!("key `{k}` given twice")));
            }
            if v.is_empty() {
                return Err(Error::config_at(line_no, format!("key `{k}` has no value")));
            }
            out.map.insert(canon.to_string(), (v.to_string(), line_no));
        }
        Ok(out)
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.map.get(key).map(|(_, l)| *l)
    }

    fn err(&self, key: &str, msg: impl Into<String>) -> Error {
        match self.line(key) {
            Some(l) => Error::config_at(l, msg),
            None => Error::config(msg),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((v, l)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| Error::config_at(*l, format!("`{key}` must be a finite number, got `{v}`"))),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((v, l)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::config_at(*l, format!("`{key}` must be a non-negative integer, got `{v}`"))),
        }
    }

    fn need_f64(&self, key: &str, what: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::config(format!("{what} needs `{key}`")))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.str(key).map(|v| {
            let p = PathBuf::from(v);
            match &self.base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        })
    }
}

pub fn read_phi_hat_table(path: &Path) -> Result<PhiHatTable> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::config(format!("{}: malformed row {:?}", path.display(), rec)))
        };
        r.push(get(0)?);
        v.push(get(1)?);
    }
    PhiHatTable::new(r, v)
}

fn kernel_from(e: &Entries) -> Result<KernelModel> {
    let fam: KernelFamily = e
        .str("family")
        .ok_or_else(|| Error::config("missing required key `kernel` (or `family`)"))?
        .parse()
        .map_err(|err: Error| e.err("family", strip(err)))?;
    let eta = e.f64("eta")?;
    let b0 = e.f64("b0")?;
    match fam {
        KernelFamily::HardSphere => {
            if eta.is_some() || b0.is_some() {
                return Err(e.err("family", "hard_sphere takes no eta or b0"));
            }
            Ok(KernelModel::hard_sphere())
        }
        KernelFamily::Power => {
            let eta = eta.unwrap_or(0.5);
            let b0 = b0.unwrap_or(1.0 / 16.0);
            KernelModel::power(eta, b0).map_err(|err| {
                let key = if !(eta > 0.0 && eta < 1.0) { "eta" } else { "b0" };
                e.err(key, strip(err))
            })
        }
        KernelFamily::Yukawa => {
            if eta.is_some_and(|x| x != 2.0) || b0.is_some() {
                return Err(e.err(if eta.is_some() { "eta" } else { "b0" }, "yukawa has eta = 2 and no b0"));
            }
            Ok(KernelModel::yukawa())
        }
        KernelFamily::Tabulated => {
            let path = e.path("phi_hat_file").ok_or_else(|| Error::config("tabulated kernel needs `phi_hat_file`"))?;
            let table = read_phi_hat_table(&path).map_err(|err| e.err("phi_hat_file", err.to_string()))?;
            Ok(KernelModel::tabulated(table, eta.unwrap_or(2.0)))
        }
    }
}

fn profile_from(s: &str) -> Option<Profile> {
    match s {
        "exponential" => Some(Profile::Exponential),
        "gaussian" => Some(Profile::Gaussian),
        _ => None,
    }
}

fn profile_name(p: Profile) -> &'static str {
    match p {
        Profile::Exponential => "exponential",
        Profile::Gaussian => "gaussian",
    }
}

fn initial_from(e: &Entries, kernel: &KernelModel) -> Result<InitialData> {
    let kind = match e.str("initial") {
        Some(k) => k.to_string(),
        None if e.map.contains_key("alpha") => "example".into(),
        None if e.map.contains_key("N") && e.map.contains_key("E") => "maxwellian".into(),
        None => return Err(Error::config("no initial data: give `initial`, or `N` and `E`, or a generator `alpha`")),
    };
    let generator_keys = ["alpha", "profile", "energy_fraction", "safety"];
    if kind != "example" {
        if let Some(k) = generator_keys.iter().find(|k| e.map.contains_key(**k)) {
            return Err(e.err(k, format!("generator key `{k}` only applies to initial = example")));
        }
    }
    let data = match kind.as_str() {
        "example" => {
            let alpha = e.need_f64("alpha", "initial = example")?;
            let eta = kernel.eta();
            if kernel.family() != KernelFamily::Power {
                return Err(e.err("initial", "initial = example needs the power kernel"));
            }
            if !(alpha > 0.0 && alpha < 1.0 - eta) {
                return Err(e.err("alpha", format!("generator needs 0 < alpha < 1 - eta = {}, got {alpha}", 1.0 - eta)));
            }
            let profile = match e.str("profile") {
                None => Profile::Exponential,
                Some(p) => profile_from(p).ok_or_else(|| e.err("profile", format!("unknown profile `{p}`")))?,
            };
            let energy_fraction = e.f64("energy_fraction")?.unwrap_or(0.5);
            if !(energy_fraction > 0.0 && energy_fraction < 1.0) {
                return Err(e.err("energy_fraction", "energy_fraction must lie in (0, 1)"));
            }
            let safety = e.f64("safety")?.unwrap_or(1.05);
            if !(safety >= 1.0) {
                return Err(e.err("safety", "safety must be at least 1"));
            }
            InitialData::Example { alpha, profile, energy_fraction, safety }
        }
        "maxwellian" => InitialData::Maxwellian { n: e.need_f64("N", "maxwellian")?, e: e.need_f64("E", "maxwellian")? },
        "equilibrium" => InitialData::Equilibrium { n: e.need_f64("N", "equilibrium")?, e: e.need_f64("E", "equilibrium")? },
        "bump" => InitialData::Bump {
            n: e.need_f64("N", "bump")?,
            center: e.need_f64("center", "bump")?,
            width: e.need_f64("width", "bump")?,
        },
        "condensate" => InitialData::Condensate { mass: e.need_f64("N", "condensate")? },
        "zero" => InitialData::Zero,
        "file" => InitialData::File { path: e.path("file").ok_or_else(|| Error::config("initial = file needs `file`"))? },
        other => return Err(e.err("initial", format!("unknown initial data `{other}`"))),
    };
    for (key, ok) in [
        ("N", !matches!(data, InitialData::Zero | InitialData::Example { .. } | InitialData::File { .. })),
        ("E", matches!(data, InitialData::Maxwellian { .. } | InitialData::Equilibrium { .. })),
        ("center", matches!(data, InitialData::Bump { .. })),
        ("width", matches!(data, InitialData::Bump { .. })),
        ("file", matches!(data, InitialData::File { .. })),
    ] {
        if !ok && e.map.contains_key(key) {
            return Err(e.err(key, format!("`{key}` does not apply to initial = {kind}")));
        }
    }
    Ok(data)
}

fn positive(e: &Entries, key: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !(x > 0.0) => Err(e.err(key, format!("`{key}` must be positive, got {x}"))),
        other => Ok(other),
    }
}

fn config_from(e: &Entries) -> Result<SimulationConfig> {
    let kernel = kernel_from(e)?;
    let initial = initial_from(e, &kernel)?;
    let horizon = match (positive(e, "t_end", e.f64("t_end")?)?, positive(e, "t_end_over_h", e.f64("t_end_over_h")?)?) {
        (Some(t), None) => Horizon::Absolute { t },
        (None, Some(factor)) => Horizon::InUnitsOfH { factor },
        (Some(_), Some(_)) => return Err(e.err("t_end_over_h", "give only one of `t_end` and `t_end_over_h`")),
        (None, None) => return Err(Error::config("missing required key `t_end` (or `t_end_over_h`)")),
    };
    let mut c = SimulationConfig::new(kernel, initial, horizon);
    let d = c.grid;
    c.grid = GridSpec {
        nodes: e.usize("nodes")?.unwrap_or(d.nodes),
        ratio: e.f64("ratio")?.unwrap_or(d.ratio),
        transition: e.f64("transition")?.unwrap_or(d.transition),
        x_max: e.f64("x_max")?.unwrap_or(d.x_max),
    };
    if let Err(err) = c.grid.build() {
        return Err(e.err(if e.map.contains_key("nodes") { "nodes" } else { "x_max" }, strip(err)));
    }
    let q = c.quad;
    c.quad = QuadConfig {
        s_nodes: e.usize("s_nodes")?.unwrap_or(q.s_nodes),
        theta_nodes: e.usize("theta_nodes")?.unwrap_or(q.theta_nodes),
        x_nodes: e.usize("x_nodes")?.unwrap_or(q.x_nodes),
    };
    for (k, v) in [("s_nodes", c.quad.s_nodes), ("theta_nodes", c.quad.theta_nodes), ("x_nodes", c.quad.x_nodes)] {
        if v == 0 {
            return Err(e.err(k, format!("`{k}` must be positive")));
        }
    }
    let adaptive_keys = ["dt_target", "dt_stability", "dt_max"];
    c.dt = match positive(e, "dt", e.f64("dt")?)? {
        Some(dt) => {
            if let Some(k) = adaptive_keys.iter().find(|k| e.map.contains_key(**k)) {
                return Err(e.err(k, format!("`{k}` conflicts with a fixed `dt`")));
            }
            DtPolicy::Fixed { dt }
        }
        None => DtPolicy::Adaptive {
            target: positive(e, "dt_target", e.f64("dt_target")?)?.unwrap_or(1e-3),
            stability: positive(e, "dt_stability", e.f64("dt_stability")?)?.unwrap_or(1.0),
            dt_max: positive(e, "dt_max", e.f64("dt_max")?)?,
        },
    };
    if let Some(p) = e.str("positivity") {
        c.positivity = match p {
            "clip" => PositivityPolicy::ClipAndLog,
            "reject" => PositivityPolicy::RejectStep,
            other => return Err(e.err("positivity", format!("positivity must be `clip` or `reject`, got `{other}`"))),
        };
    }
    if let Some(m) = e.usize("max_retries")? {
        c.max_retries = m;
    }
    if let Some(list) = e.str("probe_eps") {
        let parsed: std::result::Result<Vec<f64>, _> = list.split(',').map(|s| s.trim().parse::<f64>()).collect();
        c.probe_eps = parsed.map_err(|_| e.err("probe_eps", format!("`probe_eps` must be a comma list of numbers, got `{list}`")))?;
    }
    if let Some(n) = e.usize("output_every")? {
        c.output_every = n;
    }
    if let Some(n) = e.usize("max_steps")? {
        c.max_steps = n;
    }
    if let Some(x) = e.str("experiment") {
        c.experiment = match x {
            "none" => Experiment::None,
            "condensation" => Experiment::Condensation,
            "no_condensation" => Experiment::NoCondensation,
            other => return Err(e.err("experiment", format!("unknown experiment `{other}`"))),
        };
    }
    c.validate().map_err(|err| Error::config(strip(err)))?;
    Ok(c)
}

fn strip(err: Error) -> String {
    match err {
        Error::Config { msg, .. } => msg,
        other => other.to_string(),
    }
}

/// Parses configuration text; relative paths resolve against the working directory.
pub fn parse_config_str(text: &str) -> Result<SimulationConfig> {
    config_from(&Entries::parse(text)?)
}

/// Parses a configuration file; relative paths inside resolve against its directory.
pub fn parse_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    let mut entries = Entries::parse(&text)?;
    entries.base = path.parent().map(Path::to_path_buf);
    config_from(&entries)
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Renders a configuration in the file format; `parse_config_str` reads it back
/// to an equal value except for tabulated kernels, whose table is written as a
/// `phi_hat_file` placeholder.
pub fn to_config_string(c: &SimulationConfig) -> String {
    let mut s = String::new();
    let m = &c.kernel;
    s.push_str("[kernel]\n");
    let _ = writeln!(s, "family = {}", m.family().as_str());
    match m.family() {
        KernelFamily::Power => {
            let _ = writeln!(s, "eta = {}\nb0 = {}", num(m.eta()), num(m.b0()));
        }
        KernelFamily::Tabulated => {
            let _ = writeln!(s, "eta = {}\nphi_hat_file = phi_hat.csv", num(m.eta()));
        }
        _ => {}
    }
    let g = c.grid;
    let _ = writeln!(
        s,
        "\n[grid]\nnodes = {}\nratio = {}\ntransition = {}\nx_max = {}",
        g.nodes,
        num(g.ratio),
        num(g.transition),
        num(g.x_max)
    );
    let q = c.quad;
    let _ = writeln!(s, "\n[quad]\ns_nodes = {}\ntheta_nodes = {}\nx_nodes = {}", q.s_nodes, q.theta_nodes, q.x_nodes);
    s.push_str("\n[initial]\n");
    let mut generator = None;
    match &c.initial {
        InitialData::Example { alpha, profile, energy_fraction, safety } => {
            s.push_str("initial = example\n");
            generator = Some(format!(
                "\n[generator]\nalpha = {}\nprofile = {}\nenergy_fraction = {}\nsafety = {}\n",
                num(*alpha),
                profile_name(*profile),
                num(*energy_fraction),
                num(*safety)
            ));
        }
        InitialData::Maxwellian { n, e } => {
            let _ = writeln!(s, "initial = maxwellian\nN = {}\nE = {}", num(*n), num(*e));
        }
        InitialData::Equilibrium { n, e } => {
            let _ = writeln!(s, "initial = equilibrium\nN = {}\nE = {}", num(*n), num(*e));
        }
        InitialData::Bump { n, center, width } => {
            let _ = writeln!(s, "initial = bump\nN = {}\ncenter = {}\nwidth = {}", num(*n), num(*center), num(*width));
        }
        InitialData::Condensate { mass } => {
            let _ = writeln!(s, "initial = condensate\nN = {}", num(*mass));
        }
        InitialData::Zero => s.push_str("initial = zero\n"),
        InitialData::File { path } => {
            let _ = writeln!(s, "initial = file\nfile = {}", path.display());
        }
    }
    if let Some(gen) = generator {
        s.push_str(&gen);
    }
    s.push_str("\n[run]\n");
    match c.horizon {
        Horizon::Absolute { t } => {
            let _ = writeln!(s, "t_end = {}", num(t));
        }
        Horizon::InUnitsOfH { factor } => {
            let _ = writeln!(s, "t_end_over_h = {}", num(factor));
        }
    }
    match c.dt {
        DtPolicy::Fixed { dt } => {
            let _ = writeln!(s, "dt = {}", num(dt));
        }
        DtPolicy::Adaptive { target, stability, dt_max } => {
            let _ = writeln!(s, "dt_target = {}\ndt_stability = {}", num(target), num(stability));
            if let Some(m) = dt_max {
                let _ = writeln!(s, "dt_max = {}", num(m));
            }
        }
    }
    let pos = match c.positivity {
        PositivityPolicy::ClipAndLog => "clip",
        PositivityPolicy::RejectStep => "reject",
    };
    let eps: Vec<String> = c.probe_eps.iter().map(|x| num(*x)).collect();
    let _ = writeln!(
        s,
        "positivity = {pos}\nmax_retries = {}\nprobe_eps = {}\noutput_every = {}\nmax_steps = {}\nexperiment = {}",
        c.max_retries,
        eps.join(", "),
        c.output_every,
        c.max_steps,
        c.experiment.as_str()
    );
    s
}

/// Named presets.
pub const PRESETS: &[&str] = &["condensation-demo", "no-condensation-demo", "kernel-audit", "equilibrium-table"];

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Simulation(SimulationConfig),
    /// Kernel suites for every listed family at full sample counts.
    KernelAudit { models: Vec<KernelModel> },
    /// Equilibria at the listed temperature ratios for mass `n`.
    EquilibriumTable { n: f64, t_ratios: Vec<f64> },
}

/// The condensation scenario: power kernel `η = ½`, `b₀ = 1/16`, cold data
/// from the generator with `α = 0.45` on a 64-node grid reaching `x = 10`.
pub fn condensation_demo() -> SimulationConfig {
    let kernel = KernelModel::power(0.5, 1.0 / 16.0).expect("valid power kernel");
    let initial = InitialData::Example { alpha: 0.45, profile: Profile::Exponential, energy_fraction: 0.5, safety: 1.05 };
    let mut c = SimulationConfig::new(kernel, initial, Horizon::InUnitsOfH { factor: 1e-9 });
    c.grid = GridSpec { nodes: 64, ratio: 1.25, transition: 1.0, x_max: 10.0 };
    c.output_every = 20;
    c.experiment = Experiment::Condensation;
    c
}

/// The no-condensation scenario: Yukawa kernel, a bump of mass 10 at `x = 1.5`
/// (temperature ratio about 0.75), five threshold times.
pub fn no_condensation_demo() -> SimulationConfig {
    let initial = InitialData::Bump { n: 10.0, center: 1.5, width: 0.3 };
    let mut c = SimulationConfig::new(KernelModel::yukawa(), initial, Horizon::InUnitsOfH { factor: 5.0 });
    c.grid = GridSpec { nodes: 64, ratio: 1.3, transition: 1.0, x_max: 12.0 };
    c.output_every = 10;
    c.experiment = Experiment::NoCondensation;
    c
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "condensation-demo" => Ok(Preset::Simulation(condensation_demo())),
        "no-condensation-demo" => Ok(Preset::Simulation(no_condensation_demo())),
        "kernel-audit" => Ok(Preset::KernelAudit {
            models: vec![KernelModel::hard_sphere(), KernelModel::power(0.5, 1.0 / 16.0)?, KernelModel::yukawa()],
        }),
        "equilibrium-table" => Ok(Preset::EquilibriumTable { n: 1.0, t_ratios: vec![0.25, 0.5, 1.0, 2.0] }),
        other => Err(Error::config(format!("unknown preset `{other}`; known: {}", PRESETS.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: Error) -> Option<usize> {
        match err {
            Error::Config { line, .. } => line,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config_str("kernel = hard_sphere\nN = 1\nE = 1\nt_end = 1\n").unwrap();
        assert_eq!(c.kernel, KernelModel::hard_sphere());
        assert_eq!(c.initial, InitialData::Maxwellian { n: 1.0, e: 1.0 });
        assert_eq!(c.horizon, Horizon::Absolute { t: 1.0 });
        assert_eq!(c.grid, GridSpec::default());
        assert_eq!(c.probe_eps, vec![0.05, 0.2]);
        assert_eq!(c.experiment, Experiment::None);
    }

    #[test]
    fn power_eta_above_one_rejected_at_its_line() {
        let err = parse_config_str("family = power\neta = 1.5\nN = 1\nE = 1\nt_end = 1\n").unwrap_err();
        assert_eq!(line_of(err), Some(2));
    }

    #[test]
    fn generator_alpha_out_of_range_rejected() {
        let text = "[kernel]\nfamily = power\neta = 0.5\n[generator]\nalpha = 0.5\n[run]\nt_end = 1\n";
        let err = parse_config_str(text).unwrap_err();
        assert_eq!(line_of(err), Some(5));
    }

    #[test]
    fn unknown_keys_sections_and_duplicates_rejected() {
        assert_eq!(line_of(parse_config_str("kernel = yukawa\nbogus = 3\n").unwrap_err()), Some(2));
        assert_eq!(line_of(parse_config_str("[nope]\n").unwrap_err()), Some(1));
        assert_eq!(line_of(parse_config_str("kernel = yukawa\nfamily = yukawa\n").unwrap_err()), Some(2));
        assert_eq!(line_of(parse_config_str("[grid]\neta = 1\n").unwrap_err()), Some(2));
        assert_eq!(line_of(parse_config_str("kernel yukawa\n").unwrap_err()), Some(1));
    }

    #[test]
    fn missing_horizon_is_an_error() {
        assert!(parse_config_str("kernel = yukawa\nN = 1\nE = 1\n").is_err());
    }

    #[test]
    fn presets_round_trip_through_text() {
        for name in ["condensation-demo", "no-condensation-demo"] {
            let Preset::Simulation(c) = preset(name).unwrap() else { panic!("{name} is a simulation preset") };
            let back = parse_config_str(&to_config_string(&c)).unwrap();
            assert_eq!(back, c, "{name}");
        }
        assert!(preset("nothing").is_err());
    }
}
