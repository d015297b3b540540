//! Builds a hover scenario in code, saves it as JSON and runs the reloaded
//! copy.
//!
//! ```text
//! cargo run --release --example custom_scenario
//! ```

use funnelquad::attitude::EulerAngles;
use funnelquad::config;
use funnelquad::plant::VehicleState;
use funnelquad::sim;
use funnelquad::trajectories::TrajectoryKind;
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = config::preset("ascent")?;
    let target = Vector3::new(0.5, -0.5, 2.0);
    cfg.scenario = TrajectoryKind::Hover {
        p: target,
        psi: 0.0,
    };
    cfg.initial_state = VehicleState {
        p: Vector3::new(0.2, -0.2, 1.8),
        eta: EulerAngles::new(0.0, 0.0, 0.03),
        ..Default::default()
    };
    cfg.initial_state.eta = sim::aligned_initial_attitude(&cfg)?;
    cfg.duration = 8.0;

    let diag = sim::validate_initial(&cfg)?;
    let (worst, xi) = diag.worst_channel();
    println!("initial compliance ok, largest |xi(0)| = {xi:.3} on {worst}");

    let path = std::env::temp_dir().join("funnelquad_hover.json");
    config::save_config(&cfg, &path)?;
    let reloaded = config::load_config(&path)?;
    assert_eq!(reloaded, cfg);
    println!("saved and reloaded {}", path.display());

    let report = sim::run(&reloaded)?;
    let last = report.last().expect("records");
    println!(
        "after {:.1} s: position error {:.4} m, yaw error {:.4} rad",
        last.t,
        (last.state.p - target).norm(),
        last.state.eta.psi
    );
    Ok(())
}
