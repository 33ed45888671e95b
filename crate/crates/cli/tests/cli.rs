use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bosecond"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// The no-condensation preset shrunk to a few steps on a coarse grid.
fn short_config(dir: &Path, max_steps: usize) -> std::path::PathBuf {
    let ini = stdout(&run(&["preset", "no-condensation-demo"]));
    let ini = ini
        .lines()
        .map(|l| match l.split(" = ").next() {
            Some("max_steps") => format!("max_steps = {max_steps}"),
            Some("nodes") => "nodes = 24".into(),
            Some("ratio") => "ratio = 1.5".into(),
            Some("x_max") => "x_max = 8.0".into(),
            Some("experiment") => "experiment = none".into(),
            Some("t_end_over_h") => "t_end_over_h = 1e-3".into(),
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    let p = dir.join("short.ini");
    std::fs::write(&p, ini).unwrap();
    p
}

#[test]
fn help_lists_every_subcommand_and_global_flag() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for word in ["kernel", "equilibrium", "simulate", "verify", "init-gen", "preset"] {
        assert!(text.contains(word), "help lacks `{word}`");
    }
    for flag in ["--config", "--seed", "--threads", "--out", "--format"] {
        assert!(text.contains(flag), "help lacks `{flag}`");
    }
}

#[test]
fn equilibrium_reports_the_condensate() {
    let o = run(&["equilibrium", "-N", "3", "-E", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let m = v["report"]["state"]["condensate"].as_f64().unwrap();
    assert!((m - 1.364).abs() < 1e-3, "{v}");
}

#[test]
fn equilibrium_table_emits_csv() {
    let o = run(&["equilibrium", "-N", "1", "--t-ratios", "0.25,0.5,1,2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "t_ratio,N,E,A,kappa,condensate,fraction,formula_fraction");
    assert_eq!(body.len(), 5);
}

#[test]
fn kernel_triple_matches_the_hard_sphere_closed_form() {
    let o = run(&["kernel", "--family", "hard_sphere", "--x", "1", "--y", "0.5", "--z", "0.7", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = v["report"]["w"].as_f64().unwrap();
    let closed = v["report"]["w_closed"].as_f64().unwrap();
    assert!((w - closed).abs() <= 1e-10 * closed, "{v}");
}

#[test]
fn invalid_parameters_exit_with_two() {
    assert_eq!(code(&run(&["kernel", "--family", "power", "--eta", "1.5", "--b0", "0.1"])), 2);
    assert_eq!(code(&run(&["preset", "nope"])), 2);
    assert_eq!(code(&run(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&run(&["--threads", "0", "equilibrium", "-N", "1", "-E", "1"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["verify", "--format", "csv"])), 2);
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(short_config(dir.path(), 10)).unwrap();
    let bad = dir.path().join("bad.ini");
    std::fs::write(&bad, good.replace("nodes = 24", "nodes = banana")).unwrap();
    let o = run(&["--config", bad.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 2);
    let line = good.lines().position(|l| l == "nodes = 24").unwrap() + 1;
    assert!(stderr(&o).contains(&format!("line {line}")), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let o = run(&["--out", "/nonexistent-dir/x.json", "equilibrium", "-N", "1", "-E", "1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn early_termination_is_a_failed_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 2);
    let text = std::fs::read_to_string(&cfg).unwrap().replace("t_end_over_h = 1e-3", "t_end_over_h = 1.0");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("early"));
}

#[test]
fn simulation_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 1_000_000);
    let emit = |name: &str| {
        let out = dir.path().join(name);
        let report = dir.path().join(format!("{name}.json"));
        let o = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "simulate",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (std::fs::read(out).unwrap(), std::fs::read(report).unwrap())
    };
    let a = emit("a.csv");
    let b = emit("b.csv");
    assert!(!a.0.is_empty());
    assert_eq!(a, b);
}

#[test]
fn verify_is_seeded_and_reproducible() {
    let args = ["--seed", "7", "verify", "--suite", "kernel", "--samples", "200"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["manifest"]["seed"], 7);
    assert!(!v["report"]["checks"].as_array().unwrap().is_empty());
}

#[test]
fn presets_print_and_simulate_rejects_double_sources() {
    let o = run(&["preset", "equilibrium-table"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["t_ratios"].as_array().unwrap().len(), 4);

    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 10);
    let o = run(&["--config", cfg.to_str().unwrap(), "simulate", "--preset", "condensation-demo"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn init_gen_writes_weights_that_pass_the_local_condition() {
    let o = run(&["init-gen", "--family", "power", "--eta", "0.5", "--b0", "0.0625", "--alpha", "0.25", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = v["report"]["w"].as_array().unwrap();
    assert!(w.iter().all(|w| w.as_f64().unwrap() >= 0.0));
    assert_eq!(w.len(), v["report"]["x"].as_array().unwrap().len());
}
