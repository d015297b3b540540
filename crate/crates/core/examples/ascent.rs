//! Climbing-lemniscate tracking from the origin, 20 s.
//!
//! ```text
//! cargo run --release --example ascent
//! ```

use funnelquad::config;
use funnelquad::funnel::Channel;
use funnelquad::sim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = config::preset("ascent")?;
    let start = std::time::Instant::now();
    let report = sim::run(&cfg)?;
    let elapsed = start.elapsed();

    println!(
        "{} steps in {:.2} s, {} violations",
        report.records.len(),
        elapsed.as_secs_f64(),
        report.violations.len()
    );
    println!(
        "{:<12} {:>10} {:>12} {:>14}",
        "channel", "max|xi|", "max|e|", "steady |e|"
    );
    let m = &report.metrics;
    for c in Channel::ALL {
        let i = c.index();
        println!(
            "{:<12} {:>10.4} {:>12.5} {:>14.5}",
            c.name(),
            m.max_abs_xi[i],
            m.max_abs_error[i],
            m.steady_state_error[i]
        );
    }

    let last = report.last().expect("at least one record");
    let e = last.state.p - last.reference.p;
    println!(
        "final position error: ({:+.4}, {:+.4}, {:+.4}) m",
        e.x, e.y, e.z
    );
    Ok(())
}
