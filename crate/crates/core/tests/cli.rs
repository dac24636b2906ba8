//! The command-line binary: config handling, exit codes and artefacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_relay-diffusion");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn simulate(config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(["simulate", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

const SMALL: &str = r#"
[model]
x_lo = 0.1
x_hi = 0.4

[grid]
n = 33

[time]
dt = 0.01
t_end = 2.0

[init]
v0 = 1.0
w0 = 0.0
A0 = [[0.1, 0.4]]

[init.u0]
kind = "piecewise_linear"
points = [[0.1, 0.5], [0.4, 1.5]]

[output]
dir = "unused"
stride = 50
"#;

#[test]
fn simulate_writes_all_artefacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let res = simulate(&cfg, &out);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let scalars = fs::read_to_string(out.join("scalars.csv")).unwrap();
    let mut lines = scalars.lines();
    assert_eq!(lines.next(), Some("t,U,v,w,P,conservation_residual"));
    assert_eq!(lines.count(), 201);
    let snaps = fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 5);
    let first = fs::read_to_string(out.join("snapshots/snapshot_000000.csv")).unwrap();
    assert!(first.starts_with("x,u,r\n0.1,0.5,1\n"), "{first}");
    let report = fs::read_to_string(out.join("report.toml")).unwrap();
    assert!(report.contains("[asymptotics]"), "{report}");
}

#[test]
fn output_is_byte_for_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(simulate(&cfg, &a).status.success());
    assert!(simulate(&cfg, &b).status.success());
    for name in [
        "scalars.csv",
        "report.toml",
        "snapshots/snapshot_000004.csv",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn zero_population_run_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let text = SMALL
        .replace("kind = \"piecewise_linear\"", "kind = \"constant\"")
        .replace("points = [[0.1, 0.5], [0.4, 1.5]]", "value = 0.0");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    assert!(simulate(&cfg, &out).status.success());
    let scalars = fs::read_to_string(out.join("scalars.csv")).unwrap();
    for line in scalars.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[1..], ["0", "1", "0", "0", "0"], "{line}");
    }
}

#[test]
fn strict_clamp_fixture_fails() {
    let dir = tempfile::tempdir().unwrap();
    let res = simulate(&fixture("strict_clamp.toml"), dir.path());
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("invariant breach"), "{err}");
}

#[test]
fn invalid_config_reports_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SMALL.replace("x_lo = 0.1", "x_lo = 0.0")).unwrap();
    let res = simulate(&cfg, &dir.path().join("out"));
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("x_lo must be > 0"), "{err}");
}

#[test]
fn fast_verification_passes() {
    let res = Command::new(BIN)
        .args(["verify", "--level", "fast", "--seed", "7"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "{text}");
    assert_eq!(
        text.lines().filter(|l| l.starts_with("[PASS]")).count(),
        5,
        "{text}"
    );
}
