use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ringpair() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ringpair"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn rates_prints_both_locations() {
    let output = ringpair()
        .args(["rates", "--config"])
        .arg(configs().join("rates_example.cfg"))
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    assert!(text.contains("[output bus]"));
    assert!(text.contains("[intracavity]"));
    assert!(text.contains("herald"));
}

#[test]
fn rates_accepts_omega_override() {
    let output = ringpair()
        .args(["rates", "--config"])
        .arg(configs().join("rates_example.cfg"))
        .args(["--omega", "0.5"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout(&output).contains("omega = 5.0"));
}

#[test]
fn sweep_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        let output = ringpair()
            .args(["sweep", "--config"])
            .arg(configs().join("fig4_resonance.cfg"))
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# config-hash: "));
    // header + 5 * 401 rows
    assert_eq!(text.lines().count(), 2 + 5 * 401);
}

#[test]
fn sweep_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let output = ringpair()
        .args(["sweep", "--config"])
        .arg(configs().join("fig6_herald.cfg"))
        .arg("--out")
        .arg(&out)
        .args(["--format", "json"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let dataset = ringpair_core::sweep::dataset_from_json(&text).unwrap();
    assert_eq!(dataset.rows.len(), 5 * 200);
    assert_eq!(ringpair_core::sweep::emit_json(&dataset), text);
}

#[test]
fn sweep_honors_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out_serial = dir.path().join("serial.csv");
    let out_parallel = dir.path().join("parallel.csv");
    for (out, threads) in [(&out_serial, "1"), (&out_parallel, "4")] {
        let output = ringpair()
            .env("RINGPAIR_THREADS", threads)
            .args(["sweep", "--config"])
            .arg(configs().join("fig5_car.cfg"))
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    assert_eq!(
        std::fs::read(&out_serial).unwrap(),
        std::fs::read(&out_parallel).unwrap()
    );
}

#[test]
fn verify_fast_exits_zero() {
    let output = ringpair().arg("verify").output().unwrap();
    assert!(output.status.success(), "{}", stdout(&output));
    assert!(stdout(&output).contains("invariants passed"));
}

#[test]
fn verify_full_exits_zero_with_residuals() {
    let start = std::time::Instant::now();
    let output = ringpair().args(["verify", "--full"]).output().unwrap();
    assert!(output.status.success(), "{}", stdout(&output));
    let text = stdout(&output);
    assert!(text.contains("max residual"));
    assert!(text.contains("highq/limit_convergence_orders"));
    assert!(start.elapsed() < std::time::Duration::from_secs(60));
}

#[test]
fn limits_prints_fitted_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("limits.csv");
    let output = ringpair()
        .args(["limits", "--config"])
        .arg(configs().join("limits.cfg"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(stdout(&output).contains("fitted order"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("err_pair_rate"));
}

#[test]
fn info_echoes_derived_parameters() {
    let output = ringpair()
        .args(["info", "--config"])
        .arg(configs().join("rates_example.cfg"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("signal"));
    assert!(text.contains("rho = 0.95"));
    assert!(text.contains("pi+"));
}

#[test]
fn validation_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "mode.rho = 1.5\n").unwrap();
    let output = ringpair()
        .args(["rates", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("mode.rho"));
}

#[test]
fn pole_error_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let pole = dir.path().join("pole.cfg");
    std::fs::write(
        &pole,
        "mode.rho = 1.0\nmode.alpha = 1.0\npump.r = 0\ndetuning.theta = 0.0\n",
    )
    .unwrap();
    let output = ringpair()
        .args(["rates", "--config"])
        .arg(&pole)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn duplicate_key_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dup.cfg");
    std::fs::write(
        &cfg,
        "mode.rho = 0.9\nmode.rho = 0.95\nmode.alpha = 0.99\npump.r = 1e-5\n",
    )
    .unwrap();
    let output = ringpair().args(["info", "--config"]).arg(&cfg).output().unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("duplicate key"));
}
