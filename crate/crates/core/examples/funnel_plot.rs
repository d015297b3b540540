//! Writes telemetry, metrics and one funnel chart per channel.
//!
//! ```text
//! cargo run --release --example funnel_plot -- [ascent|landing] [out-dir]
//! ```

use std::path::PathBuf;

use funnelquad::config;
use funnelquad::funnel::Channel;
use funnelquad::output;
use funnelquad::sim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "ascent".into());
    let dir = PathBuf::from(args.next().unwrap_or_else(|| format!("plots-{name}")));
    std::fs::create_dir_all(&dir)?;

    let report = sim::run(&config::preset(&name)?)?;
    output::write_csv(&report, dir.join("telemetry.csv"))?;
    output::write_metrics(&report, dir.join("metrics.json"))?;
    for c in Channel::ALL {
        output::write_funnel_svg(&report, c.name(), dir.join(format!("funnel_{c}.svg")))?;
    }
    println!(
        "wrote telemetry, metrics and 12 charts to {}",
        dir.display()
    );
    Ok(())
}
