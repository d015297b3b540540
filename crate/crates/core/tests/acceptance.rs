//! Scenario-level and property-level acceptance checks.
//!
//! Runs without the libtest harness and prints one PASS/FAIL line per
//! criterion; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use funnelquad::attitude::{self, EulerAngles};
use funnelquad::config;
use funnelquad::controller::{ControlDiagnostics, Controller, ReferenceSample};
use funnelquad::error::{ControlError, SimError};
use funnelquad::funnel::{self, Channel, NormalizedError};
use funnelquad::plant::{
    self, ControlCommand, DisturbanceKind, DisturbanceSpec, QuadParams, StateVector, VehicleState,
};
use funnelquad::sim::{self, rk4_step, RunReport, SimConfig, ViolationMode};
use funnelquad::trajectories;
use nalgebra::{SVector, Vector2, Vector3};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn cases(n: u32) -> Config {
    Config {
        cases: n,
        failure_persistence: None,
        ..Config::default()
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_ok(cfg: &SimConfig) -> Result<RunReport, String> {
    sim::run(cfg).map_err(|e| e.to_string())
}

fn position_channels() -> [Channel; 3] {
    [Channel::PosX, Channel::PosY, Channel::PosZ]
}

fn scenario_a(report: &RunReport, elapsed: f64) -> Outcome {
    let n = report.violations.len();
    let worst = Channel::ALL
        .into_iter()
        .map(|c| report.metrics.max_abs_xi[c.index()])
        .fold(0.0, f64::max);
    ensure(
        n == 0 && report.records.len() == 20_001 && elapsed < 10.0,
        format!(
            "{n} violations over {} steps, max |xi| {worst:.3}, runtime {elapsed:.2} s",
            report.records.len()
        ),
    )
}

fn steady_state(report: &RunReport) -> Outcome {
    let mut worst_p: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for r in report.records.iter().filter(|r| r.t >= 15.0) {
        for c in position_channels() {
            worst_p = worst_p.max(r.errors_raw[c.index()].abs());
        }
        worst_psi = worst_psi.max(r.errors_raw[Channel::Yaw.index()].abs());
    }
    ensure(
        worst_p < 0.2 && worst_psi < 0.05,
        format!("t >= 15 s: max |e_p| {worst_p:.4} m, max |e_psi| {worst_psi:.2e} rad"),
    )
}

fn scenario_b() -> Outcome {
    let report = run_ok(&config::preset("landing").unwrap())?;
    let last = report.last().ok_or("no records")?;
    let boat = trajectories::boat_path(10.0).unwrap();
    let horizontal = (last.state.p.xy() - boat.p_b).norm();
    let altitude = last.state.p.z;
    ensure(
        report.violations.is_empty() && last.t == 10.0 && horizontal < 0.2 && altitude < 0.2,
        format!(
            "{} violations, t_end {}, distance to boat {horizontal:.4} m, altitude {altitude:.4} m",
            report.violations.len(),
            last.t
        ),
    )
}

fn robustness() -> Outcome {
    let mut cfg = config::preset("ascent").unwrap();
    cfg.disturbance = DisturbanceSpec::default_for(DisturbanceKind::Sinusoid);
    let d = cfg.disturbance;
    let (f, tau) = (d.force.norm(), d.torque.norm());
    if f > 0.5 || tau > 0.05 || d.frequency != 1.0 {
        return Err(format!(
            "disturbance outside the stated envelope: {f} N, {tau} N m"
        ));
    }
    let report = run_ok(&cfg)?;
    ensure(
        report.violations.is_empty() && report.records.len() == 20_001,
        format!(
            "|F_d| {f:.3} N, |tau_d| {tau:.4} N m: {} violations",
            report.violations.len()
        ),
    )
}

fn model_freeness() -> Outcome {
    // The cascade's only inputs: time, measured state, reference.
    type ControlFn = fn(
        &Controller,
        f64,
        &VehicleState,
        &ReferenceSample,
    ) -> Result<(ControlCommand, ControlDiagnostics), ControlError>;
    let _signature: ControlFn = Controller::compute_control;
    let _constructor: fn(_, _, _) -> Controller = Controller::new;

    let mut cfg = config::preset("ascent").unwrap();
    cfg.params.mass = 2.0;
    let report = match sim::run(&cfg) {
        Ok(r) => r,
        Err(SimError::FunnelViolation { report, .. }) => *report,
        Err(e) => return Err(e.to_string()),
    };
    let pos = report
        .violations
        .iter()
        .filter(|v| v.channel.is_position())
        .count();
    ensure(
        pos == 0 && report.records.len() == 20_001,
        format!(
            "interface takes no plant data; m = 2 kg: {pos} position violations, {} in total",
            report.violations.len()
        ),
    )
}

fn transform_suite() -> Outcome {
    let mut worst_rt: f64 = 0.0;
    for k in 0..=20_000 {
        let x = -10.0 + k as f64 * 1e-3;
        let y = funnel::transform(NormalizedError(x.tanh())).map_err(|e| e.to_string())?;
        worst_rt = worst_rt.max((y - x).abs() / x.abs().max(1.0));
    }
    let mut worst_slope: f64 = 0.0;
    let h = 1e-6;
    for k in 0..=1980 {
        let xi = -0.99 + k as f64 * 1e-3;
        let t = |v: f64| funnel::transform(NormalizedError(v)).unwrap();
        let fd = (t(xi + h) - t(xi - h)) / (2.0 * h);
        let s = funnel::transform_slope(NormalizedError(xi)).unwrap();
        worst_slope = worst_slope.max((s - fd).abs() / s.abs());
    }
    let mut runner = TestRunner::new(cases(10_000));
    let mono = runner.run(
        &(-0.999_999f64..0.999_999, -0.999_999f64..0.999_999),
        |(a, b)| {
            let (ta, tb) = (
                funnel::transform(NormalizedError(a)).unwrap(),
                funnel::transform(NormalizedError(b)).unwrap(),
            );
            proptest::prop_assert!(a == b || (a < b) == (ta < tb));
            Ok(())
        },
    );
    ensure(
        worst_rt <= 1e-9 && worst_slope <= 1e-5 && mono.is_ok(),
        format!(
            "round trip {worst_rt:.1e}, slope {worst_slope:.1e}, monotonicity over 10^4 pairs: {}",
            if mono.is_ok() { "ok" } else { "FAILED" }
        ),
    )
}

fn attitude_suite() -> Outcome {
    let mut runner = TestRunner::new(cases(10_000));
    let strategy = (-1.5f64..1.5, -1.5f64..1.5, -PI..PI, -50.0f64..50.0);
    let cell = std::cell::Cell::new((0.0f64, 0.0f64));
    runner
        .run(&strategy, |(phi, theta, psi, f_z)| {
            let eta = EulerAngles::new(phi, theta, psi);
            let r = attitude::rot_body_to_inertial(&eta);
            let (gram, det) = r.orthonormality_defect();
            let full = r.matrix() * Vector3::new(0.0, 0.0, f_z);
            let xy = attitude::yaw_rotation_2d(psi) * attitude::tilt_vector(phi, theta).0 * f_z;
            let z = theta.cos() * phi.cos() * f_z;
            let fact = (full.xy() - xy).amax().max((full.z - z).abs());
            let (o, f) = cell.get();
            cell.set((o.max(gram).max(det), f.max(fact)));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (worst_orth, worst_fact) = cell.get();

    let mut worst_jac: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let h = 1e-6;
    for i in 0..=48 {
        for j in 0..=48 {
            let phi = -1.2 + 0.05 * i as f64;
            let theta = -1.2 + 0.05 * j as f64;
            let jac = attitude::tilt_jacobian(phi, theta).map_err(|e| e.to_string())?;
            let tv = |p: f64, t: f64| attitude::tilt_vector(p, t).0;
            let d_phi = (tv(phi + h, theta) - tv(phi - h, theta)) / (2.0 * h);
            let d_theta = (tv(phi, theta + h) - tv(phi, theta - h)) / (2.0 * h);
            for r in 0..2 {
                let scale = |a: f64| a.abs().max(1.0);
                worst_jac = worst_jac.max((jac[(r, 0)] - d_phi[r]).abs() / scale(jac[(r, 0)]));
                worst_jac = worst_jac.max((jac[(r, 1)] - d_theta[r]).abs() / scale(jac[(r, 1)]));
            }
            let (p, t) = attitude::tilt_to_angles(&attitude::tilt_vector(phi, theta))
                .map_err(|e| e.to_string())?;
            worst_inv = worst_inv.max((p - phi).abs()).max((t - theta).abs());
        }
    }
    ensure(
        worst_orth <= 1e-9 && worst_fact <= 1e-12 && worst_jac <= 1e-5 && worst_inv <= 1e-9,
        format!(
            "orthonormality {worst_orth:.1e}, factorization {worst_fact:.1e}, Jacobian {worst_jac:.1e}, inversion {worst_inv:.1e}"
        ),
    )
}

fn terminal_state(dt: f64) -> Result<StateVector, String> {
    let mut cfg = config::preset("ascent").unwrap();
    cfg.duration = 1.0;
    cfg.dt = dt;
    let report = run_ok(&cfg)?;
    let last = report.last().ok_or("no records")?;
    if (last.t - 1.0).abs() > 1e-9 {
        return Err(format!("run ended at {}", last.t));
    }
    Ok(last.state.to_vector())
}

fn dynamics_suite() -> Outcome {
    // hover equilibrium of the open-loop plant
    let params = QuadParams::default();
    let hover = ControlCommand {
        f_z: params.mass * params.g,
        tau: Vector3::zeros(),
    };
    let spec = DisturbanceSpec::none();
    let x0 = VehicleState::at_position(Vector3::new(0.3, -0.2, 1.0)).to_vector();
    let mut x = x0;
    for k in 0..1000 {
        x = rk4_step(
            |t, xi| plant::dynamics_rhs(&VehicleState::from_vector(xi), &hover, &spec, &params, t),
            &x,
            k as f64 * 1e-3,
            1e-3,
        )
        .map_err(|e| e.to_string())?;
    }
    let drift = (x - x0).amax();

    let mut runner = TestRunner::new(cases(10_000));
    let cell = std::cell::Cell::new(0.0f64);
    runner
        .run(
            &(-20.0f64..20.0, -20.0f64..20.0, -20.0f64..20.0),
            |(a, b, c)| {
                let w = Vector3::new(a, b, c);
                let term = -w.cross(&params.inertia.component_mul(&w));
                cell.set(cell.get().max(w.dot(&term).abs()));
                Ok(())
            },
        )
        .map_err(|e| e.to_string())?;
    let gyro = cell.get();

    let reference = terminal_state(1e-5)?;
    let coarse = (terminal_state(2e-3)? - reference).norm();
    let fine = (terminal_state(1e-3)? - reference).norm();
    let factor = coarse / fine;
    ensure(
        drift < 1e-9 && gyro <= 1e-12 && (13.0..=19.0).contains(&factor),
        format!(
            "hover drift {drift:.1e}, gyroscopic work {gyro:.1e}, refinement {coarse:.3e} -> {fine:.3e} (factor {factor:.2})"
        ),
    )
}

fn boat_oracle() -> Outcome {
    type S = SVector<f64, 3>;
    let switches = [
        3.0 * PI / 4.0,
        9.0 * PI / 4.0,
        11.0 * PI / 4.0,
        f64::INFINITY,
    ];
    let integrate = |t_end: f64| -> S {
        let h: f64 = 1e-4;
        let mut x = S::zeros();
        let mut t = 0.0;
        for &sw in &switches {
            let stop = sw.min(t_end);
            while t < stop {
                let step = h.min(stop - t);
                let u = trajectories::boat_steering(t + 0.5 * step);
                let f =
                    |_: f64, xi: &S| -> Result<S, ()> { Ok(S::new(xi[2].cos(), xi[2].sin(), u)) };
                x = rk4_step(f, &x, t, step).unwrap();
                t = if step < h { stop } else { t + step };
            }
            if t >= t_end {
                break;
            }
        }
        x
    };
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let t = 0.1 * k as f64;
        let exact = trajectories::boat_path(t).map_err(|e| e.to_string())?;
        let x = integrate(t);
        worst = worst
            .max((exact.p_b - Vector2::new(x[0], x[1])).amax())
            .max((exact.alpha - x[2]).abs());
    }
    ensure(
        worst < 1e-6,
        format!("max deviation over 100 times {worst:.2e}"),
    )
}

fn condition_monitor(stock: &RunReport) -> Outcome {
    let cfg = config::preset("ascent").unwrap();
    let ratio = cfg.gains.k_v_xy.min() / cfg.gains.k_v_z;
    let bound = cfg.funnels.tilt[0].rho0.max(cfg.funnels.tilt[1].rho0)
        / (4.0 * cfg.conditions.pi_bar.cos().powi(2));
    let stock_false = stock.condition_flag_history.iter().all(|f| !f[1]);

    let mut tuned = config::preset("ascent").unwrap();
    tuned.duration = 5.0;
    tuned.gains.k_v_xy = Vector2::new(10.0, 10.0);
    tuned.initial_state.eta = sim::aligned_initial_attitude(&tuned).map_err(|e| e.to_string())?;
    let report = run_ok(&tuned)?;
    let tuned_true = report.condition_flag_history.iter().all(|f| f[1]);
    ensure(
        stock_false && tuned_true && (bound - 0.952).abs() < 1e-3 && ratio == 0.1,
        format!(
            "ratio {ratio} vs bound {bound:.4}: false on all {} stock steps = {stock_false}; true on all {} steps with k_v_xy = (10, 10) = {tuned_true}",
            stock.condition_flag_history.len(),
            report.condition_flag_history.len()
        ),
    )
}

fn first_logged_violation(report: &RunReport) -> Option<f64> {
    report
        .records
        .iter()
        .find(|r| {
            r.diagnostics
                .xi
                .iter()
                .any(|x| !NormalizedError(*x).is_inside())
        })
        .map(|r| r.t)
}

fn failure_modes() -> Outcome {
    let mut narrow = config::preset("ascent").unwrap();
    narrow.funnels.pos[2].rho0 = 0.5;
    let initial = match sim::run(&narrow) {
        Err(SimError::InitialCompliance(list)) => list.iter().any(|v| v.channel == Channel::PosZ),
        _ => false,
    };

    let pushed = |mode: ViolationMode, dt: f64, substeps: usize| {
        let mut cfg = config::preset("ascent").unwrap();
        cfg.duration = 0.01;
        cfg.dt = dt;
        cfg.substeps = substeps;
        cfg.violation_mode = mode;
        cfg.disturbance = DisturbanceSpec {
            kind: DisturbanceKind::Constant,
            force: Vector3::new(30.0, 30.0, 0.0),
            torque: Vector3::zeros(),
            frequency: 0.0,
        };
        sim::run(&cfg)
    };
    let clamp = pushed(ViolationMode::ClampAndContinue, 1e-3, 64).map_err(|e| e.to_string())?;
    let first = *clamp
        .violations
        .first()
        .ok_or("clamp run recorded no violation")?;
    let halted = match pushed(ViolationMode::Halt, 1e-3, 64) {
        Err(SimError::FunnelViolation { violation, .. }) => violation,
        other => {
            return Err(format!(
                "halt run did not stop: {:?}",
                other.map(|r| r.violations.len())
            ))
        }
    };
    // Same integration with every RK4 step logged: the first logged state
    // outside a funnel is where the monitor must have fired.
    let h = 1e-3 / 64.0;
    let dense = pushed(ViolationMode::ClampAndContinue, h, 1).map_err(|e| e.to_string())?;
    let dense_first = first_logged_violation(&dense).ok_or("dense run never left the funnel")?;
    let same_step = (dense_first - first.t).abs() < 0.5 * h;
    ensure(
        initial && first.t == halted.t && first.channel == halted.channel && same_step && first.xi.abs() >= 1.0,
        format!(
            "narrow p_z funnel rejected at t = 0: {initial}; in flight: clamp and halt both flag {} at t = {} s (xi = {:.3}), step-by-step log first exits at t = {dense_first} s",
            first.channel, first.t, first.xi
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let start = Instant::now();
    let a = sim::run(&config::preset("ascent").unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    match a {
        Ok(report) => {
            results.push((
                1,
                "scenario A funnel compliance",
                scenario_a(&report, elapsed),
            ));
            results.push((2, "scenario A steady-state bound", steady_state(&report)));
            results.push((10, "condition monitor", condition_monitor(&report)));
        }
        Err(e) => {
            for (n, name) in [
                (1, "scenario A funnel compliance"),
                (2, "scenario A steady-state bound"),
                (10, "condition monitor"),
            ] {
                results.push((n, name, Err(e.to_string())));
            }
        }
    }
    results.push((3, "scenario B landing", scenario_b()));
    results.push((4, "disturbance robustness", robustness()));
    results.push((5, "model-freeness", model_freeness()));
    results.push((6, "transform suite", transform_suite()));
    results.push((7, "attitude suite", attitude_suite()));
    results.push((8, "dynamics and integrator suite", dynamics_suite()));
    results.push((9, "boat path oracle", boat_oracle()));
    results.push((11, "failure-mode contract", failure_modes()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
