//! End-to-end tests of the compiled binary: exit codes, JSON error shape,
//! artifact determinism, and config override behavior.

use std::path::Path;
use std::process::Command;

fn omit(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_omit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid JSON")
}

#[test]
fn poles_and_critical_power_emit_stable_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = omit(&["poles"], dir.path());
    assert_eq!(code, 0, "stderr: {stderr}");
    let v = json(&stdout);
    assert!((v["x_plus"]["im"].as_f64().unwrap() + 95322.85158609273).abs() < 1e-6);
    assert!((v["x_minus"]["im"].as_f64().unwrap() + 1256004.9540216746).abs() < 1e-6);
    assert!((v["a_plus"]["im"].as_f64().unwrap() + 220855.99636439318).abs() < 1e-6);
    assert_eq!(v["regime"], "eit_region");
    assert_eq!(v["params_hash"].as_str().unwrap().len(), 64);

    let (code, stdout, _) = omit(&["critical-power"], dir.path());
    assert_eq!(code, 0);
    let v = json(&stdout);
    let crit = v["critical_power_mw"].as_f64().unwrap();
    assert!((crit - 3.8271852458678337).abs() / crit < 1e-12);
}

#[test]
fn spectrum_artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--out", "run", "spectrum", "--points", "801", "--lo", "-0.02", "--hi", "0.02",
        "--metrics", "--pole-parts",
    ];
    let (code, _, stderr) = omit(&args, dir.path());
    assert_eq!(code, 0, "stderr: {stderr}");
    let csv1 = std::fs::read(dir.path().join("run/spectrum.csv")).unwrap();
    let man1 = std::fs::read(dir.path().join("run/spectrum.manifest.json")).unwrap();

    let (code, _, _) = omit(&args, dir.path());
    assert_eq!(code, 0);
    assert_eq!(csv1, std::fs::read(dir.path().join("run/spectrum.csv")).unwrap());
    assert_eq!(
        man1,
        std::fs::read(dir.path().join("run/spectrum.manifest.json")).unwrap()
    );

    let manifest = json(std::str::from_utf8(&man1).unwrap());
    let cmd: Vec<&str> = manifest["command"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(cmd.contains(&"spectrum"), "manifest records the command");
    assert_eq!(manifest["evaluator"], "sideband");
    assert!(manifest["metrics"]["narrow_hwhm_numeric"].is_f64());
}

#[test]
fn figure_presets_pin_their_pump_power() {
    let dir = tempfile::tempdir().unwrap();
    // A power override elsewhere must not leak into a figure preset.
    let (code, stdout, _) = omit(&["--out", "f", "--power-mw", "1.0", "fig4"], dir.path());
    assert_eq!(code, 0);
    let summary = json(&stdout);
    assert_eq!(summary["pump_power_w"].as_f64().unwrap(), 6.9e-3);
    assert_eq!(summary["regime"], "splitting_region");
    let manifest = json(&std::fs::read_to_string(dir.path().join("f/fig4.manifest.json")).unwrap());
    assert_eq!(manifest["drive"]["power_c"].as_f64().unwrap(), 6.9e-3);
    assert_eq!(manifest["metrics"]["classification"], "split_doublet");
}

#[test]
fn config_errors_name_the_offending_key_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing.cfg");
    std::fs::write(
        &path,
        "lambda_nm=1064\ncavity_length_mm=25\nkappa_khz=215\nomega_m_khz=947\n\
         gamma_m_hz=141\npump_power_mw=1\n",
    )
    .unwrap();
    let (code, stdout, stderr) = omit(
        &["--config", path.to_str().unwrap(), "poles"],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stdout.is_empty(), "data channel stays clean on errors");
    let e = json(stderr.lines().next().unwrap());
    assert_eq!(e["error"]["code"], 2);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().contains("mass_ng"));

    std::fs::write(&path, "bogus=1\n").unwrap();
    let (code, _, stderr) = omit(&["--config", path.to_str().unwrap(), "poles"], dir.path());
    assert_eq!(code, 2);
    assert!(stderr.contains("bogus"));
}

#[test]
fn bistable_steady_state_exits_3_with_the_roots() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bistable.cfg");
    std::fs::write(
        &path,
        "lambda_nm=1064\ncavity_length_mm=25\nmass_ng=145\nkappa_khz=215\n\
         omega_m_khz=947\ngamma_m_hz=141\npump_power_mw=7.5\ndelta_mode=self_consistent\n",
    )
    .unwrap();
    let (code, stdout, stderr) = omit(
        &["--config", path.to_str().unwrap(), "poles"],
        dir.path(),
    );
    assert_eq!(code, 3, "stdout: {stdout}");
    let e = json(stderr.lines().next().unwrap());
    assert_eq!(e["error"]["kind"], "bistable");
    assert!(e["error"]["message"].as_str().unwrap().contains("branch"));
}

#[test]
fn oracle_threshold_breach_exits_4_but_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = omit(
        &[
            "--out", "o", "oracle-check", "--points", "2", "--threshold", "1e-9",
        ],
        dir.path(),
    );
    assert_eq!(code, 4, "stderr: {stderr}");
    let e = json(stderr.lines().next().unwrap());
    assert_eq!(e["error"]["kind"], "threshold");
    // The summary still went to stdout and the report to disk.
    let summary = json(&stdout);
    assert_eq!(summary["summary"]["passed"], false);
    let report = json(&std::fs::read_to_string(dir.path().join("o/oracle_check.json")).unwrap());
    assert_eq!(report["summary"]["n_ok"], 2);
    assert_eq!(report["summary"]["threshold"].as_f64().unwrap(), 1e-9);
}

#[test]
fn oracle_check_passes_at_the_default_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = omit(
        &["--out", "ok", "oracle-check", "--points", "3"],
        dir.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    let summary = json(&stdout);
    assert_eq!(summary["summary"]["passed"], true);
    assert!(summary["summary"]["max_rel_dev"].as_f64().unwrap() < 1e-2);
}

#[test]
fn strong_probe_ratio_warns_but_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = omit(&["--probe-ratio", "0.01", "poles"], dir.path());
    assert_eq!(code, 0);
    assert!(stderr.contains("warning:"), "stderr: {stderr}");
    assert!(stderr.contains("probe/pump power ratio"));
    json(&stdout);
}

#[test]
fn two_point_spectrum_is_a_valid_csv_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = omit(
        &["--out", "tiny", "spectrum", "--points", "2"],
        dir.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    let text = std::fs::read_to_string(dir.path().join("tiny/spectrum.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header plus two rows");
    assert_eq!(lines[1].split(',').count(), lines[0].split(',').count());
}

#[test]
fn manifest_reproduces_config_values_to_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("awkward.cfg");
    std::fs::write(
        &path,
        "lambda_nm=1063.72\ncavity_length_mm=24.913\nmass_ng=144.737\n\
         kappa_khz=215.317\nomega_m_khz=946.291\ngamma_m_hz=141.443\n\
         pump_power_mw=1.379\nprobe_ratio=2.3e-7\n",
    )
    .unwrap();
    let (code, _, stderr) = omit(
        &[
            "--config", path.to_str().unwrap(), "--out", "m", "spectrum", "--points", "11",
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    let manifest =
        json(&std::fs::read_to_string(dir.path().join("m/spectrum.manifest.json")).unwrap());

    let tau = std::f64::consts::TAU;
    let close = |got: f64, want: f64| (got - want).abs() <= 1e-15 * want.abs();
    let sys = &manifest["system"];
    assert!(close(sys["kappa"].as_f64().unwrap(), tau * 215.317e3));
    assert!(close(sys["omega_m"].as_f64().unwrap(), tau * 946.291e3));
    assert!(close(sys["gamma_m"].as_f64().unwrap(), tau * 141.443));
    assert!(close(sys["mass"].as_f64().unwrap(), 144.737e-12));
    assert!(close(sys["length"].as_f64().unwrap(), 24.913e-3));
    assert!(close(
        manifest["drive"]["power_c"].as_f64().unwrap(),
        1.379e-3
    ));
    // Raw keys survive verbatim for exact replay.
    assert_eq!(manifest["raw_config"]["kappa_khz"], "215.317");
    assert_eq!(manifest["raw_config"]["probe_ratio"], "2.3e-7");
}
