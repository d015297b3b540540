//! The controller never sees mass or inertia. Sweep both and keep the gains.
//!
//! ```text
//! cargo run --release --example model_free
//! ```

use funnelquad::config;
use funnelquad::sim;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = config::preset("ascent")?;
    let cases = [(1.0, 1.0), (1.5, 1.0), (2.0, 1.0), (1.0, 2.0), (2.0, 2.0)];

    println!("mass [kg]  inertia x  result");
    for (mass_scale, inertia_scale) in cases {
        let mut cfg = base.clone();
        cfg.params.mass *= mass_scale;
        cfg.params.inertia *= inertia_scale;
        let outcome = match sim::run(&cfg) {
            Ok(r) => format!(
                "compliant, max |xi_p| = {:.3}",
                r.metrics.max_abs_xi[..3]
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max)
            ),
            Err(e) => e.to_string(),
        };
        println!("{:9.2}  {:9.2}  {outcome}", cfg.params.mass, inertia_scale);
    }
    Ok(())
}
