//! Logs the three stability conditions along the ascent. The gain-ratio
//! condition fails with the stock gains and holds once the horizontal
//! velocity gains are raised.
//!
//! ```text
//! cargo run --release --example condition_monitor
//! ```

use funnelquad::config;
use funnelquad::sim;
use nalgebra::Vector2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = config::preset("ascent")?;
    cfg.duration = 5.0;

    let ratio = cfg.gains.k_v_xy.min() / cfg.gains.k_v_z;
    let bound = cfg.funnels.tilt[0].rho0.max(cfg.funnels.tilt[1].rho0)
        / (4.0 * cfg.conditions.pi_bar.cos().powi(2));
    println!("gain ratio {ratio:.3} vs bound {bound:.6}");

    for (label, k_v_xy) in [
        ("stock gains", cfg.gains.k_v_xy),
        ("k_v_xy = (10, 10)", Vector2::new(10.0, 10.0)),
    ] {
        let mut run_cfg = cfg.clone();
        run_cfg.gains.k_v_xy = k_v_xy;
        // stiffer gains change the initial tilt demand
        run_cfg.initial_state.eta = sim::aligned_initial_attitude(&run_cfg)?;
        match sim::run(&run_cfg) {
            Ok(report) => {
                let f = report.metrics.condition_false_counts;
                println!(
                    "{label}: {} steps; false counts a={} b={} c={}; attitude bound held: {}",
                    report.records.len(),
                    f[0],
                    f[1],
                    f[2],
                    report.attitude_bound_ok
                );
            }
            Err(e) => println!("{label}: {e}"),
        }
    }
    Ok(())
}
