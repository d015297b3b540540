//! Fixed-step closed-loop simulation with funnel and attitude-bound monitoring.
//!
//! Every `dt` the controller is evaluated at the current state and the
//! result is logged. Between log points the plant is advanced with
//! `substeps` classical RK4 steps. With [`ControlUpdate::PerStage`] the
//! controller is re-evaluated at every Runge-Kutta stage, so the closed loop
//! is integrated as one smooth ODE; with [`ControlUpdate::ZeroOrderHold`] the
//! logged command is held for the whole interval.

use nalgebra::SVector;

use crate::attitude::{wrap_angle, EulerAngles};
use crate::controller::{
    ControlDiagnostics, Controller, FunnelPolicy, GainSet, ReferenceSample, TheoremConditions,
};
use crate::error::{ControlError, InitialViolation, SimError};
use crate::funnel::{Channel, FunnelSet, NormalizedError};
use crate::plant::{self, ControlCommand, DisturbanceSpec, QuadParams, StateVector, VehicleState};
use crate::trajectories::TrajectoryKind;

/// Largest accepted logging step, s.
pub const MAX_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViolationMode {
    /// Stop at the first monitored state with `|xi| >= 1`.
    #[default]
    Halt,
    /// Saturate the transform and keep integrating; for post-mortem plots.
    ClampAndContinue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlUpdate {
    /// Re-evaluate the control law at every RK4 stage.
    #[default]
    PerStage,
    /// Hold the command computed at the start of each `dt`.
    ZeroOrderHold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Logging and control period, s.
    pub dt: f64,
    pub duration: f64,
    /// RK4 steps per `dt`.
    pub substeps: usize,
    pub control_update: ControlUpdate,
    pub scenario: TrajectoryKind,
    pub initial_state: VehicleState,
    pub params: QuadParams,
    pub disturbance: DisturbanceSpec,
    pub funnels: FunnelSet,
    pub gains: GainSet,
    pub conditions: TheoremConditions,
    pub violation_mode: ViolationMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.dt > MAX_DT {
            return bad(format!("dt must not exceed {MAX_DT} s, got {}", self.dt));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return bad(format!(
                "duration must be at least dt, got {}",
                self.duration
            ));
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        if let Some(h) = self.scenario.horizon() {
            if self.duration > h + 1e-9 {
                return bad(format!(
                    "{} reference is defined up to {h} s, duration is {}",
                    self.scenario.name(),
                    self.duration
                ));
            }
        }
        self.scenario.validate()?;
        if !self.initial_state.is_finite() || !self.initial_state.eta.in_domain() {
            return bad("initial state must be finite with |phi|, |theta| < pi/2".into());
        }
        self.params
            .validate()
            .or_else(|m| bad(format!("params: {m}")))?;
        self.disturbance
            .validate()
            .or_else(|m| bad(format!("disturbance: {m}")))?;
        if let Err((ch, e)) = self.funnels.validate() {
            return bad(format!("funnel {ch}: {e}"));
        }
        self.gains
            .validate()
            .or_else(|m| bad(format!("gains: {m}")))?;
        self.conditions
            .validate()
            .or_else(|m| bad(format!("conditions: {m}")))?;
        Ok(())
    }

    pub fn controller(&self) -> Controller {
        Controller::new(self.funnels, self.gains, self.conditions)
    }

    /// Number of integration intervals; the run logs one more record.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize
    }
}

/// One logged instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub state: VehicleState,
    pub reference: ReferenceSample,
    pub command: ControlCommand,
    pub diagnostics: ControlDiagnostics,
    pub funnel_values: [f64; 12],
    pub errors_raw: [f64; 12],
}

impl SimRecord {
    fn new(
        t: f64,
        state: VehicleState,
        reference: ReferenceSample,
        command: ControlCommand,
        diagnostics: ControlDiagnostics,
    ) -> Self {
        Self {
            t,
            state,
            reference,
            command,
            funnel_values: diagnostics.rho,
            errors_raw: diagnostics.errors,
            diagnostics,
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Termination {
    #[default]
    Completed,
    /// Stopped at the first violation ([`ViolationMode::Halt`]).
    Halted { t: f64 },
    /// The state became non-finite after a violation in
    /// [`ViolationMode::ClampAndContinue`]; records end at the last log point.
    Diverged { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub channel: Channel,
    pub xi: f64,
}

/// Per-channel summary of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub max_abs_xi: [f64; 12],
    pub max_abs_error: [f64; 12],
    /// Max `|e|` over the final 25% of the run.
    pub steady_state_error: [f64; 12],
    /// Logged steps on which each monitored condition was false.
    pub condition_false_counts: [usize; 3],
    pub violation_count: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub records: Vec<SimRecord>,
    pub violations: Vec<Violation>,
    pub condition_flag_history: Vec<[bool; 3]>,
    /// `|phi|, |theta| <= pi_bar` at every monitored state.
    pub attitude_bound_ok: bool,
    pub termination: Termination,
    pub metrics: Metrics,
}

impl RunReport {
    pub fn is_compliant(&self) -> bool {
        self.violations.is_empty() && self.termination == Termination::Completed
    }

    pub fn last(&self) -> Option<&SimRecord> {
        self.records.last()
    }

    /// Time series of one channel's raw error.
    pub fn error_series(&self, channel: Channel) -> impl Iterator<Item = (f64, f64)> + '_ {
        let i = channel.index();
        self.records.iter().map(move |r| (r.t, r.errors_raw[i]))
    }
}

/// One classical Runge-Kutta step of `x' = f(t, x)`.
pub fn rk4_step<const N: usize, E>(
    f: impl FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>, E>,
    x: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>, E> {
    Ok(x + rk4_increment(f, x, t, dt)?)
}

/// The update `x(t + dt) - x(t)` of one RK4 step.
pub fn rk4_increment<const N: usize, E>(
    mut f: impl FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>, E>,
    x: &SVector<f64, N>,
    t: f64,
    dt: f64,
) -> Result<SVector<f64, N>, E> {
    let half = 0.5 * dt;
    let k1 = f(t, x)?;
    let k2 = f(t + half, &(x + k1 * half))?;
    let k3 = f(t + half, &(x + k2 * half))?;
    let k4 = f(t + dt, &(x + k3 * dt))?;
    Ok((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Running sum `x += dx` with Kahan compensation, so thousands of small RK4
/// increments do not accumulate rounding error.
#[derive(Debug, Clone, Copy)]
struct CompensatedState {
    x: StateVector,
    carry: StateVector,
}

impl CompensatedState {
    fn new(x: StateVector) -> Self {
        Self {
            x,
            carry: StateVector::zeros(),
        }
    }

    fn add(&mut self, dx: &StateVector) {
        for i in 0..dx.len() {
            let y = dx[i] - self.carry[i];
            let sum = self.x[i] + y;
            self.carry[i] = (sum - self.x[i]) - y;
            self.x[i] = sum;
        }
    }

    fn wrap_yaw(&mut self) {
        let psi = wrap_angle(self.x[8]);
        if psi != self.x[8] {
            self.x[8] = psi;
            self.carry[8] = 0.0;
        }
    }
}

/// Evaluates the cascade once at `t = 0` and lists every channel that does
/// not start strictly inside its funnel.
pub fn validate_initial(cfg: &SimConfig) -> Result<ControlDiagnostics, SimError> {
    let controller = cfg.controller().with_policy(FunnelPolicy::SoftClamp);
    let reference = cfg.scenario.sample(0.0)?;
    let (_, diag) = controller.compute_control(0.0, &cfg.initial_state, &reference)?;
    let failing: Vec<InitialViolation> = Channel::ALL
        .into_iter()
        .filter(|c| !NormalizedError(diag.xi(*c)).is_inside())
        .map(|channel| InitialViolation {
            channel,
            xi: diag.xi(channel),
        })
        .collect();
    if failing.is_empty() {
        Ok(diag)
    } else {
        Err(SimError::InitialCompliance(failing))
    }
}

/// Roll and pitch that make the tilt vector equal the controller's tilt
/// reference at `t = 0`, so the attitude and rate loops start at rest.
///
/// The tilt reference depends on position, velocity and yaw only, so one
/// evaluation suffices.
pub fn aligned_initial_attitude(cfg: &SimConfig) -> Result<EulerAngles, SimError> {
    let controller = cfg.controller().with_policy(FunnelPolicy::SoftClamp);
    let reference = cfg.scenario.sample(0.0)?;
    let (_, diag) = controller.compute_control(0.0, &cfg.initial_state, &reference)?;
    let (phi, theta) = crate::attitude::tilt_to_angles(&diag.tilt_ref)?;
    Ok(EulerAngles::new(phi, theta, cfg.initial_state.eta.psi))
}

/// Runs the closed loop for `cfg.duration`.
///
/// Funnels are checked at every logged step and at the start of every RK4
/// substep, so a violation is caught at the first state the integrator
/// produces with `|xi| >= 1`. In [`ViolationMode::Halt`] that state becomes
/// the final record, which may fall between log points.
pub fn run(cfg: &SimConfig) -> Result<RunReport, SimError> {
    cfg.validate()?;
    validate_initial(cfg)?;

    let strict = cfg.controller();
    let soft = cfg.controller().with_policy(FunnelPolicy::SoftClamp);
    let halt = cfg.violation_mode == ViolationMode::Halt;
    let n = cfg.steps();
    let h = cfg.dt / cfg.substeps as f64;
    let pi_bar = cfg.conditions.pi_bar;

    let mut report = RunReport {
        records: Vec::with_capacity(n + 1),
        attitude_bound_ok: true,
        ..Default::default()
    };
    let mut acc = CompensatedState::new(cfg.initial_state.to_vector());

    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let state = VehicleState::from_vector(&acc.x);
        let reference = cfg.scenario.sample(t)?;

        let mut diag = ControlDiagnostics::default();
        let outcome = if halt {
            strict.compute_control_into(t, &state, &reference, &mut diag)
        } else {
            soft.compute_control_into(t, &state, &reference, &mut diag)
        };
        let command = match outcome {
            Ok(c) => c,
            Err(ControlError::FunnelViolation { .. }) => {
                // refill every channel so the halting record is complete
                soft.compute_control_into(t, &state, &reference, &mut diag)?
            }
            Err(e) => return Err(e.into()),
        };

        if state.eta.phi.abs() > pi_bar || state.eta.theta.abs() > pi_bar {
            report.attitude_bound_ok = false;
        }
        let first = record_violations(&mut report, t, &diag);
        report
            .condition_flag_history
            .push(diag.conditions.as_array());
        report
            .records
            .push(SimRecord::new(t, state, reference, command, diag));

        if let (true, Some(violation)) = (halt, first) {
            return Err(halted(report, violation));
        }
        if k == n {
            break;
        }

        for j in 0..cfg.substeps {
            let ts = t + j as f64 * h;
            let x = acc.x;
            // controller output at the substep start, for monitoring
            let mut start: Option<(ControlCommand, ControlDiagnostics)> = None;
            let step = match cfg.control_update {
                ControlUpdate::ZeroOrderHold => {
                    if j > 0 {
                        let s = VehicleState::from_vector(&x);
                        start = Some(soft.compute_control(ts, &s, &cfg.scenario.sample(ts)?)?);
                    }
                    rk4_increment(|ti, xi| plant_rhs(cfg, xi, &command, ti), &x, ts, h)
                }
                ControlUpdate::PerStage => rk4_increment(
                    |ti, xi| {
                        if !xi.iter().all(|v| v.is_finite()) {
                            return Err(SimError::NonFinite(ti));
                        }
                        let s = VehicleState::from_vector(xi);
                        let r = cfg.scenario.sample(ti)?;
                        let (cmd, d) = soft.compute_control(ti, &s, &r)?;
                        let dx = plant_rhs(cfg, xi, &cmd, ti)?;
                        if start.is_none() {
                            start = Some((cmd, d));
                        }
                        Ok(dx)
                    },
                    &x,
                    ts,
                    h,
                ),
            };

            if j > 0 {
                if let Some((cmd, d)) = start {
                    let s = VehicleState::from_vector(&x);
                    if s.eta.phi.abs() > pi_bar || s.eta.theta.abs() > pi_bar {
                        report.attitude_bound_ok = false;
                    }
                    if let Some(violation) = record_violations(&mut report, ts, &d) {
                        if halt {
                            let r = cfg.scenario.sample(ts)?;
                            report.condition_flag_history.push(d.conditions.as_array());
                            report.records.push(SimRecord::new(ts, s, r, cmd, d));
                            return Err(halted(report, violation));
                        }
                    }
                }
            }

            let diverged = match step {
                Ok(dx) => {
                    acc.add(&dx);
                    acc.wrap_yaw();
                    !acc.x.iter().all(|v| v.is_finite())
                }
                Err(SimError::NonFinite(_)) => true,
                Err(e) => return Err(e),
            };
            if diverged {
                if halt {
                    return Err(SimError::NonFinite(ts + h));
                }
                report.termination = Termination::Diverged { t: ts + h };
                report.metrics = metrics(&report);
                return Ok(report);
            }
        }
    }

    report.metrics = metrics(&report);
    Ok(report)
}

/// Appends a violation for every channel with `|xi| >= 1` (or NaN) and
/// returns the first one.
fn record_violations(
    report: &mut RunReport,
    t: f64,
    diag: &ControlDiagnostics,
) -> Option<Violation> {
    let before = report.violations.len();
    for c in Channel::ALL {
        let xi = diag.xi(c);
        if !NormalizedError(xi).is_inside() {
            report.violations.push(Violation { t, channel: c, xi });
        }
    }
    report.violations.get(before).copied()
}

fn halted(mut report: RunReport, violation: Violation) -> SimError {
    report.termination = Termination::Halted { t: violation.t };
    report.metrics = metrics(&report);
    SimError::FunnelViolation {
        violation,
        report: Box::new(report),
    }
}

fn plant_rhs(
    cfg: &SimConfig,
    x: &StateVector,
    cmd: &ControlCommand,
    t: f64,
) -> Result<StateVector, SimError> {
    let s = VehicleState::from_vector(x);
    Ok(plant::dynamics_rhs(
        &s,
        cmd,
        &cfg.disturbance,
        &cfg.params,
        t,
    )?)
}

/// Summarizes a report. An empty report yields all-zero metrics.
pub fn metrics(report: &RunReport) -> Metrics {
    let mut m = Metrics {
        violation_count: report.violations.len(),
        steps: report.records.len(),
        ..Default::default()
    };
    let Some(last) = report.records.last() else {
        return m;
    };
    let window_start = 0.75 * last.t;
    for r in &report.records {
        for i in 0..12 {
            let xi = r.diagnostics.xi[i].abs();
            let e = r.errors_raw[i].abs();
            m.max_abs_xi[i] = m.max_abs_xi[i].max(xi);
            m.max_abs_error[i] = m.max_abs_error[i].max(e);
            if r.t >= window_start {
                m.steady_state_error[i] = m.steady_state_error[i].max(e);
            }
        }
    }
    for flags in &report.condition_flag_history {
        for (count, ok) in m.condition_false_counts.iter_mut().zip(flags) {
            *count += usize::from(!ok);
        }
    }
    m
}
