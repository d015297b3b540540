//! Evaluates a performance function and the error transform by hand, then
//! asks the controller for the same numbers.
//!
//! ```text
//! cargo run --example transform_basics
//! ```

use funnelquad::config;
use funnelquad::funnel::{self, PerformanceFunction};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho = PerformanceFunction::new(12.0, 0.2, 0.4)?;
    for t in [0.0, 1.0, 5.0, 10.0, 20.0] {
        println!(
            "rho({t:>4}) = {:.6}   rho'({t:>4}) = {:+.6}",
            rho.evaluate(t)?,
            rho.evaluate_derivative(t)?
        );
    }

    println!("\n    xi      eps = atanh(xi)   r = 1/(1 - xi^2)");
    for xi in [0.0, 0.25, 0.5, 0.9, 0.99, 0.999999] {
        let n = funnel::NormalizedError(xi);
        println!(
            "{xi:>9} {:>16.6} {:>18.3}",
            funnel::transform(n)?,
            funnel::transform_slope(n)?
        );
    }
    println!(
        "xi = 1 -> {}",
        funnel::transform(funnel::NormalizedError(1.0)).unwrap_err()
    );

    let controller = config::preset("ascent")?.controller();
    let v_r = controller.reference_velocity(&Vector3::new(-1.0, 0.0, -1.0), 0.0)?;
    println!(
        "\nreference velocity for e_p = (-1, 0, -1) at t = 0: {:.6?}",
        v_r.as_slice()
    );
    Ok(())
}
