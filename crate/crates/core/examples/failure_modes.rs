//! The two ways a run can end in a funnel violation.
//!
//! ```text
//! cargo run --release --example failure_modes
//! ```

use funnelquad::config;
use funnelquad::error::SimError;
use funnelquad::funnel::PerformanceFunction;
use funnelquad::plant::{DisturbanceKind, DisturbanceSpec};
use funnelquad::sim::{self, ViolationMode};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A funnel narrower than the initial error.
    let mut cfg = config::preset("ascent")?;
    cfg.funnels.pos[2] = PerformanceFunction::new(0.5, 0.2, 0.4)?;
    match sim::run(&cfg) {
        Err(e @ SimError::InitialCompliance(_)) => println!("rejected before the first step: {e}"),
        other => println!("unexpected: {:?}", other.map(|r| r.violations.len())),
    }

    // A disturbance far beyond what the funnels were sized for.
    let mut cfg = config::preset("ascent")?;
    cfg.duration = 1.0;
    cfg.disturbance = DisturbanceSpec {
        kind: DisturbanceKind::Constant,
        force: Vector3::new(30.0, 30.0, 0.0),
        torque: Vector3::zeros(),
        frequency: 0.0,
    };
    match sim::run(&cfg) {
        Err(SimError::FunnelViolation { violation, report }) => println!(
            "halted at t = {} s on {} (xi = {:.3}) with {} records",
            violation.t,
            violation.channel,
            violation.xi,
            report.records.len()
        ),
        other => println!("unexpected: {:?}", other.map(|r| r.violations.len())),
    }

    cfg.violation_mode = ViolationMode::ClampAndContinue;
    let report = sim::run(&cfg)?;
    let first = report.violations.first().expect("violations");
    println!(
        "clamp mode: first violation at t = {} s on {}, {} violating samples, ended {:?}",
        first.t,
        first.channel,
        report.violations.len(),
        report.termination
    );
    Ok(())
}
