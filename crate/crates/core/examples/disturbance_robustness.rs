//! Reruns the ascent under each disturbance model the plant offers, in
//! parallel, with the controller unchanged.
//!
//! ```text
//! cargo run --release --example disturbance_robustness
//! ```

use funnelquad::config;
use funnelquad::funnel::Channel;
use funnelquad::plant::{DisturbanceKind, DisturbanceSpec};
use funnelquad::sim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = config::preset("ascent")?;
    let kinds = [
        DisturbanceKind::None,
        DisturbanceKind::Constant,
        DisturbanceKind::Sinusoid,
        DisturbanceKind::LinearDrag,
    ];

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let mut cfg = base.clone();
                cfg.disturbance = DisturbanceSpec::default_for(kind);
                s.spawn(move || (kind, sim::run(&cfg)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker"))
            .collect()
    });

    for (kind, result) in results {
        match result {
            Ok(report) => {
                let m = &report.metrics;
                let worst = Channel::ALL
                    .into_iter()
                    .max_by(|a, b| m.max_abs_xi[a.index()].total_cmp(&m.max_abs_xi[b.index()]))
                    .unwrap();
                println!(
                    "{kind:?}: compliant, worst channel {worst} at |xi| = {:.3}, steady |e_p| <= {:.3} m",
                    m.max_abs_xi[worst.index()],
                    m.steady_state_error[..3].iter().cloned().fold(0.0, f64::max)
                );
            }
            Err(e) => println!("{kind:?}: {e}"),
        }
    }
    Ok(())
}
