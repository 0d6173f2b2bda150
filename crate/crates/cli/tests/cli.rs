use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[grid]
n = 128

[noise]
modes = 8

[solver]
dt = [0.0078125, 0.00390625, 0.001953125, 0.0009765625]
"#;

fn fsse(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsse"))
        .args(args)
        .current_dir(dir)
        .env_remove("FSSE_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fraccalc_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fsse(&["--check", "fraccalc", "--out", "res"], dir.path());
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("[PASS] stieltjes_classical_pair_abs"), "{text}");
    assert!(!text.contains("[FAIL]"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/check.json")).unwrap()).unwrap();
    assert_eq!(json["suite"], "fraccalc");
    assert_eq!(json["passed"], true);
    assert!(dir.path().join("res/meta.json").exists());
    assert!(dir.path().join("res/config.toml").exists());
}

#[test]
fn bad_hurst_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[noise]\nhurst = 0.4\n");
    let o = fsse(&["--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(1/2, 1)"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "typo.toml", "sead = 3\n");
    assert_eq!(fsse(&["--config", &cfg], dir.path()).status.code(), Some(2));
    assert_eq!(fsse(&["--config", "missing.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(fsse(&["--experiment", "nope"], dir.path()).status.code(), Some(2));
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // A strong nonlinearity at coarse steps is outside the asymptotic regime,
    // so the direct/gauge gap does not shrink monotonically.
    let cfg = write_config(
        dir.path(),
        "coarse.toml",
        "[grid]\nn = 64\n[nonlinearity]\nkind = \"power\"\nsigma = 1.0\nmu = 80.0\n[solver]\ndt = [0.25, 0.125, 0.0625]\n",
    );
    let o = fsse(&["--config", &cfg, "--check", "solver", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL] gauge_gap_increases"));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "huge.toml",
        "[grid]\nn = 64\n[nonlinearity]\nkind = \"power\"\nsigma = 1.0\nmu = 1e200\n[solver]\ndt = [0.0078125]\n",
    );
    let o = fsse(&["--config", &cfg, "--experiment", "solve", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn gauge_sweep_emits_table_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let o = fsse(
        &["--config", &cfg, "--experiment", "gauge-equivalence", "--dt-sweep", "--out", "res"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("res/gauge_gap.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "dt,gap,direct_drift,gauge_drift");
    assert_eq!(lines.len(), 5);
    let gaps: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(dir.path().join("res/gauge_gap.svg").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/report.json")).unwrap()).unwrap();
    let order = report["summary"]["gap_order"].as_f64().unwrap();
    assert!(order > 1.0, "{order}");
    assert_eq!(report["summary"]["gap_monotone"], true);
}

fn report_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name != "meta.json" && name != "config.toml"
        })
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    for experiment in ["solve", "mollification"] {
        let a = format!("{experiment}-a");
        let b = format!("{experiment}-b");
        let base = ["--config", cfg.as_str(), "--experiment", experiment, "--dt-sweep", "--seed", "9"];
        let oa = fsse(&[&base[..], &["--out", &a, "--workers", "1"]].concat(), dir.path());
        let ob = fsse(&[&base[..], &["--out", &b, "--workers", "3"]].concat(), dir.path());
        assert!(oa.status.success() && ob.status.success(), "{}{}", stderr(&oa), stderr(&ob));
        let fa = report_files(&dir.path().join(&a));
        let fb = report_files(&dir.path().join(&b));
        assert!(fa.len() >= 2);
        assert_eq!(fa, fb, "{experiment} outputs differ");
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(&a).join("meta.json")).unwrap())
                .unwrap();
        assert!(meta["started_unix"].as_f64().unwrap() > 0.0);
        assert_eq!(meta["seed"], 9);
    }
}

#[test]
fn output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_fsse"))
            .args(["--check", "fraccalc"])
            .args(extra)
            .current_dir(dir.path())
            .env("FSSE_OUT", "from-env")
            .output()
            .unwrap()
    };
    assert!(run(&[]).status.success());
    assert!(dir.path().join("from-env/check.json").exists());
    assert!(run(&["--out", "from-flag"]).status.success());
    assert!(dir.path().join("from-flag/check.json").exists());
    let echo = fs::read_to_string(dir.path().join("from-flag/config.toml")).unwrap();
    assert!(echo.contains("from-flag"), "{echo}");
}
