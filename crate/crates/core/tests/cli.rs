use std::path::Path;
use std::process::{Command, Output};

use floquet_qi::cli::RunConfig;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_floquet-qi"));
    c.env_remove("FLOQUET_QI_THREADS");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SCAN: &[&str] = &[
    "scan", "--system", "two-level", "--tau", "0.05", "--delta-min", "-2", "--delta-max", "2", "--delta-step", "1",
    "--power-min", "-40", "--power-max", "-39", "--power-step", "1", "--out", "scan.csv",
];

#[test]
fn scan_writes_long_form_csv_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), SCAN);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("delta,power_dbm,rho11"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    // 17 significant digits
    let cell = rows[0].split(',').nth(2).unwrap();
    let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
    assert!(dir.path().join("scan.csv.provenance").exists());
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), SCAN)), 0);
    let again = run(dir.path(), SCAN);
    assert_eq!(code(&again), 3);
    assert!(stderr(&again).contains("scan.csv"));
    let mut forced = SCAN.to_vec();
    forced.push("--force");
    assert_eq!(code(&run(dir.path(), &forced)), 0);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["scan", "--tau", "0.05"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("'system'"), "{}", stderr(&o));

    let o = run(dir.path(), &["spectrum", "--system", "two-level"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("'tau'"));

    std::fs::write(dir.path().join("bad.cfg"), "system = two-level\ntau = 0.05\nflavour = strange\n").unwrap();
    let o = run(dir.path(), &["spectrum", "--config", "bad.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("'flavour'"));

    assert_eq!(code(&run(dir.path(), &["spectrum", "--bogus-flag", "1"])), 2);
    assert_eq!(code(&run(dir.path(), &["analytic", "--op", "bessel", "--x", "2e4"])), 2);
}

#[test]
fn help_lists_every_flag() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
    let top = String::from_utf8_lossy(&o.stdout);
    for sub in ["scan", "spectrum", "fit", "rwa", "analytic", "repro"] {
        assert!(top.contains(sub), "{sub}");
    }
    for sub in ["scan", "spectrum", "fit", "rwa", "analytic"] {
        let o = bin().args([sub, "--help"]).output().unwrap();
        let text = String::from_utf8_lossy(&o.stdout);
        for key in RunConfig::KEYS.iter().map(|k| k.replace('_', "-")).chain(["config".into(), "force".into()]) {
            assert!(text.contains(&format!("--{key}")), "{sub} --help lacks --{key}");
        }
    }
    let o = bin().args(["repro", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("--criterion") && text.contains("--threads"));
}

#[test]
fn provenance_reruns_to_the_same_data() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "spectrum", "--system", "three-level", "--tau", "0.1", "--delta-min", "-6", "--delta-max", "6", "--delta-step",
        "0.5", "--regime", "eit", "--out", "a.csv",
    ];
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let prov = std::fs::read_to_string(dir.path().join("a.csv.provenance")).unwrap();
    let cfg = RunConfig::parse(&prov).unwrap();
    assert_eq!(cfg.tau, Some(0.1));
    let o = run(dir.path(), &["spectrum", "--config", "a.csv.provenance", "--out", "b.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(a.starts_with("delta,rho11,im_rho10\n"));
    assert_eq!(a, b);
    let pb = RunConfig::parse(&std::fs::read_to_string(dir.path().join("b.csv.provenance")).unwrap()).unwrap();
    assert_eq!(RunConfig { out: None, ..pb }, RunConfig { out: None, ..cfg });
}

#[test]
fn fit_json_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["fit", "--tau", "0.05", "--format", "json", "--out", "fit.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    for (model, keys) in [("qi", &["omega_c", "omega_p", "gamma_big", "lambda"][..]), ("ats", &["omega_c", "omega_p", "gamma_big"][..])] {
        let f = &v[model];
        assert_eq!(f["model"], model);
        for k in ["rss", "aic_per_point"] {
            assert!(f[k].is_f64(), "{model}.{k}");
        }
        assert_eq!(f["n"], 161);
        assert_eq!(f["k"].as_u64(), Some(keys.len() as u64));
        for k in keys {
            assert!(f["params"][k].is_f64(), "{model}.params.{k}");
        }
    }
    let w = &v["weights"];
    let sum = w["w_qi"].as_f64().unwrap() + w["w_ats"].as_f64().unwrap();
    assert!((sum - 1.0).abs() < 1e-15);
    let cfg = floquet_qi::cli::config_from_json(&v).unwrap();
    assert_eq!(cfg.tau, Some(0.05));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan", "--system", "three-level", "--delta-min", "-20", "--delta-max", "20", "--delta-step", "4", "--tau-min",
        "0.02", "--tau-max", "0.2", "--tau-points", "3",
    ];
    let free = run(dir.path(), &args);
    let capped = bin().current_dir(dir.path()).args(args).env("FLOQUET_QI_THREADS", "1").output().unwrap();
    assert_eq!(code(&free), 0, "{}", stderr(&free));
    assert_eq!(free.stdout, capped.stdout);
    assert!(String::from_utf8_lossy(&free.stdout).starts_with("delta,tau,rho11\n"));
}

#[test]
fn analytic_and_rwa_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["analytic", "--op", "resonant-steady", "--tau", "0.05", "--omega-p", "40"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(dir.path(), &["rwa", "--tau", "0.15", "--carrier", "6000", "--n-periods", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!o.stdout.is_empty());
}
