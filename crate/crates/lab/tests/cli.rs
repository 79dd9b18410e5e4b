use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riccati-lab"))
}

fn config(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.toml")].iter().collect()
}

fn run(args: &[&str], cfg: &str) -> Output {
    bin().args(args).arg("--config").arg(config(cfg)).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("riccati-lab-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

#[test]
fn success_exits_zero() {
    let o = run(&["classify", "--format", "json"], "cubic");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["case"], "CaseI");
}

#[test]
fn inconclusive_classification_exits_two() {
    assert_eq!(code(&run(&["classify"], "slowly_varying")), 2);
}

#[test]
fn not_applicable_construction_exits_three() {
    let o = run(&["solve", "--kind", "EXTREME_V_GROW"], "square_law_two");
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn errors_exit_one() {
    let o = bin().args(["classify", "--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());

    let dir = scratch("bad");
    fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    fs::write(&bad, "[equation]\nfamliy = \"power_log\"\n").unwrap();
    let o = bin().args(["classify", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("famliy"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failed_verification_exits_one() {
    // the growing extreme on the k = 1/2 square law misses the oracle tolerance
    assert_eq!(code(&run(&["verify"], "square_law_half")), 1);
    assert_eq!(code(&run(&["verify"], "cubic")), 0);
}

#[test]
fn json_is_byte_identical_across_runs() {
    for (cmd, cfg) in [("sweep", "sweep"), ("solve", "cubic"), ("verify", "exponential_pair"), ("classify", "tail_power")] {
        let a = run(&[cmd, "--format", "json"], cfg);
        let b = run(&[cmd, "--format", "json"], cfg);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{cmd} {cfg}");
    }
}

#[test]
fn solve_writes_one_csv_per_solution() {
    let dir = scratch("solve");
    let o = bin().args(["solve", "--format", "table", "--config"]).arg(config("cubic")).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let mut names: Vec<String> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["MODERATE_U_I.csv", "MODERATE_V_I.csv", "solve.json", "solve.txt"]);
    let csv = fs::read_to_string(dir.join("MODERATE_V_I.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,Dx"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert!(cols.iter().all(|c| c.is_finite()));
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_lists_config_defaults() {
    let o = bin().arg("--help").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for key in ["[equation]", "[grid]", "[tail]", "[solver]", "[verify]", "[sweep]", "[output]", "max_iter"] {
        assert!(text.contains(key), "{key}");
    }
}
