//! Descending onto a boat that follows a fixed steering schedule.
//!
//! ```text
//! cargo run --release --example landing
//! ```

use funnelquad::config;
use funnelquad::sim;
use funnelquad::trajectories::boat_path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = config::preset("landing")?;
    let report = sim::run(&cfg)?;

    println!("   t      boat x    boat y    quad x    quad y    quad z");
    for r in report.records.iter().step_by(1000) {
        let boat = boat_path(r.t)?;
        println!(
            "{:5.1} {:9.3} {:9.3} {:9.3} {:9.3} {:9.3}",
            r.t, boat.p_b.x, boat.p_b.y, r.state.p.x, r.state.p.y, r.state.p.z
        );
    }

    let last = report.last().expect("records");
    let boat = boat_path(last.t)?;
    let miss = (last.state.p.xy() - boat.p_b).norm();
    println!(
        "touchdown: {:.3} m from the boat, altitude {:.3} m, {} violations",
        miss,
        last.state.p.z,
        report.violations.len()
    );
    Ok(())
}
