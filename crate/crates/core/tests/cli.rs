use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use funnelquad::config;
use funnelquad::output::{csv_header, CSV_COLUMNS};
use serde_json::{json, Value};

fn funnelquad(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_funnelquad"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("FUNNELQUAD_OUT")
        .output()
        .expect("binary runs")
}

fn preset_json(name: &str) -> Value {
    serde_json::from_str(config::preset_source(name).unwrap()).unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn header_is_pinned() {
    let expected = "t,p_x,p_y,p_z,v_x,v_y,v_z,phi,theta,psi,omega_phi,omega_theta,omega_psi,\
p_r_x,p_r_y,p_r_z,psi_r,v_r_x,v_r_y,v_r_z,omega_r_phi,omega_r_theta,omega_r_psi,phi_r,theta_r,\
F_z,tau_phi,tau_theta,tau_psi,\
e_p_x,e_p_y,e_p_z,e_v_x,e_v_y,e_v_z,e_tilt_1,e_tilt_2,e_psi,e_omega_phi,e_omega_theta,e_omega_psi,\
rho_p_x,rho_p_y,rho_p_z,rho_v_x,rho_v_y,rho_v_z,rho_tilt_1,rho_tilt_2,rho_psi,rho_omega_phi,rho_omega_theta,rho_omega_psi,\
xi_p_x,xi_p_y,xi_p_z,xi_v_x,xi_v_y,xi_v_z,xi_tilt_1,xi_tilt_2,xi_psi,xi_omega_phi,xi_omega_theta,xi_omega_psi,\
cond_a,cond_b,cond_c";
    assert_eq!(csv_header(), expected);
    assert_eq!(expected.split(',').count(), CSV_COLUMNS);
}

#[test]
fn ascent_preset_runs_clean_and_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let out = funnelquad(&["run", "--config", "ascent", "--plots"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let rows = csv_rows(&dir.path().join("telemetry.csv"));
    assert_eq!(rows.len(), 20_002, "header plus 20001 samples");
    assert_eq!(rows[0], csv_header());
    for row in &rows[1..] {
        assert_eq!(row.split(',').count(), CSV_COLUMNS);
    }
    let time = |row: &str| row.split(',').next().unwrap().parse::<f64>().unwrap();
    assert_eq!(time(&rows[1]), 0.0);
    assert_eq!(time(rows.last().unwrap()), 20.0);

    let metrics: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["compliant"], json!(true));
    assert_eq!(metrics["violation_count"], json!(0));
    assert_eq!(metrics["termination"]["kind"], json!("completed"));

    for ch in ["p_x", "p_y", "p_z", "psi"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("funnel_{ch}.svg"))).unwrap();
        check_svg(&svg);
    }
}

// Parses the chart and checks the error trace lies between the two bounds.
fn check_svg(svg: &str) {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let points = |id: &str| -> Vec<(f64, f64)> {
        let node = doc
            .descendants()
            .find(|n| n.attribute("id") == Some(id))
            .unwrap_or_else(|| panic!("missing {id}"));
        node.attribute("points")
            .unwrap()
            .split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect()
    };
    let (upper, lower, error) = (points("rho_upper"), points("rho_lower"), points("error"));
    assert!(upper.len() > 100 && upper.len() <= 2001);
    assert_eq!(upper.len(), error.len());
    assert_eq!(lower.len(), error.len());
    for ((u, l), e) in upper.iter().zip(&lower).zip(&error) {
        assert_eq!(u.0, e.0);
        // screen y grows downwards
        assert!(u.1 <= e.1 && e.1 <= l.1, "{u:?} {e:?} {l:?}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--config",
        "landing",
        "--duration",
        "1",
        "--disturbance",
        "sinusoid",
    ];
    assert_eq!(funnelquad(&args, a.path()).status.code(), Some(0));
    assert_eq!(funnelquad(&args, b.path()).status.code(), Some(0));
    for f in ["telemetry.csv", "metrics.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    assert_eq!(csv_rows(&a.path().join("telemetry.csv")).len(), 1002);
}

#[test]
fn initial_violation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = preset_json("ascent");
    v["funnels"]["p_z"]["rho0"] = json!(0.5);
    let cfg = write_json(dir.path(), "narrow.json", &v);
    let out = funnelquad(
        &["run", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p_z"), "{err}");
}

#[test]
fn in_flight_violation_exits_with_two_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = preset_json("ascent");
    v["duration"] = json!(1.0);
    v["disturbance"] =
        json!({ "kind": "constant", "force": [30.0, 30.0, 0.0], "torque": [0.0, 0.0, 0.0] });
    let cfg = write_json(dir.path(), "pushed.json", &v);
    let out_dir = dir.path().join("out");
    let out = funnelquad(&["run", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("funnel violation"));
    let rows = csv_rows(&out_dir.join("telemetry.csv"));
    assert!(rows.len() > 2 && rows.len() < 1002);
    let metrics: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["compliant"], json!(false));
    assert_eq!(metrics["termination"]["kind"], json!("halted"));

    v["violation_mode"] = json!("clamp_and_continue");
    let cfg = write_json(dir.path(), "pushed_clamp.json", &v);
    let out = funnelquad(
        &["run", "--config", cfg.to_str().unwrap()],
        &dir.path().join("clamp"),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = funnelquad(
        &["run", "--config", "/nonexistent/scenario.json"],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(1));

    let negative = funnelquad(&["run", "--config", "ascent", "--dt", "-0.001"], dir.path());
    assert_eq!(negative.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&negative.stderr).contains("dt"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ \"duration\": 1,\n  \"dt\": }").unwrap();
    let out = funnelquad(&["run", "--config", broken.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let usage = funnelquad(&["run"], dir.path());
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_funnelquad"))
        .args(["run", "--config", "ascent", "--duration", "0.01"])
        .env("FUNNELQUAD_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("telemetry.csv").exists());
}
