use std::process::Command;

fn semibandit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semibandit"))
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.csv");
    let status = semibandit()
        .args(["run", "--K", "5", "--d", "2", "--delta", "0.2", "--T", "5000", "--C", "50"])
        .args(["--policy", "cbarbar", "--heuristic", "both", "--repeats", "3", "--seed", "4"])
        .arg("--out")
        .arg(&out)
        .args(["--workers", "2"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("seed,heuristic,final_regret,"));
    assert!(lines[1].starts_with("4,begin,"));
    assert!(String::from_utf8_lossy(&status.stdout).contains("cbarbar"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    let out = dir.path().join("runs.csv");
    std::fs::write(
        &config,
        format!(
            "K = 4\nd = 1\ndelta = 0.2\nT = 3000\npolicy = \"tsallis\"\nheuristic = \"none\"\nrepeats = 5\nout = {:?}\n",
            out
        ),
    )
    .unwrap();
    let status = semibandit()
        .arg("run")
        .arg("--config")
        .arg(&config)
        .args(["--repeats", "2"])
        .output()
        .unwrap();
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn bad_input_is_a_usage_error() {
    let out = semibandit().args(["run", "--policy", "hybrid"]).output().unwrap();
    assert!(!out.status.success());
    let out = semibandit().args(["run", "--K", "3", "--d", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = semibandit().args(["table", "table9"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn selftest_passes() {
    let out = semibandit().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
