//! Rigid-body quadrotor model with thrust along body z, Euler-angle attitude
//! and bounded unmodelled forces and moments.
//!
//! Nothing in here is visible to the controller; the mass, inertia and
//! disturbance live only on the simulation side.

use nalgebra::{SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::{self, EulerAngles};
use crate::error::AttitudeError;

/// Length of the flattened state `(p, v, eta, omega)`.
pub const STATE_DIM: usize = 12;

pub type StateVector = SVector<f64, STATE_DIM>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    /// Inertial position, m.
    pub p: Vector3<f64>,
    /// Inertial velocity, m/s.
    pub v: Vector3<f64>,
    pub eta: EulerAngles,
    /// Angular velocity, rad/s.
    pub omega: Vector3<f64>,
}

impl VehicleState {
    pub fn at_position(p: Vector3<f64>) -> Self {
        Self {
            p,
            ..Self::default()
        }
    }

    pub fn to_vector(&self) -> StateVector {
        let mut x = StateVector::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.p);
        x.fixed_rows_mut::<3>(3).copy_from(&self.v);
        x[6] = self.eta.phi;
        x[7] = self.eta.theta;
        x[8] = self.eta.psi;
        x.fixed_rows_mut::<3>(9).copy_from(&self.omega);
        x
    }

    /// Unpacks a flat state. Yaw is taken as given, not wrapped.
    pub fn from_vector(x: &StateVector) -> Self {
        Self {
            p: x.fixed_rows::<3>(0).into_owned(),
            v: x.fixed_rows::<3>(3).into_owned(),
            eta: EulerAngles {
                phi: x[6],
                theta: x[7],
                psi: x[8],
            },
            omega: x.fixed_rows::<3>(9).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    /// kg
    pub mass: f64,
    /// Principal moments, kg m^2.
    pub inertia: Vector3<f64>,
    /// m/s^2
    pub g: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            inertia: Vector3::new(0.01, 0.01, 0.02),
            g: 9.81,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(format!("mass must be positive, got {}", self.mass));
        }
        if !self.inertia.iter().all(|i| *i > 0.0 && i.is_finite()) {
            return Err(format!(
                "inertia entries must be positive, got {:?}",
                self.inertia.as_slice()
            ));
        }
        if !self.g.is_finite() {
            return Err("gravity must be finite".into());
        }
        Ok(())
    }
}

/// Collective thrust along body z and body torque.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    /// N
    pub f_z: f64,
    /// N m
    pub tau: Vector3<f64>,
}

impl ControlCommand {
    pub fn is_finite(&self) -> bool {
        self.f_z.is_finite() && self.tau.iter().all(|t| t.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    #[default]
    None,
    Constant,
    Sinusoid,
    LinearDrag,
}

impl std::str::FromStr for DisturbanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "constant" => Ok(Self::Constant),
            "sinusoid" => Ok(Self::Sinusoid),
            "linear_drag" => Ok(Self::LinearDrag),
            other => Err(format!(
                "unknown disturbance kind `{other}` (expected none, constant, sinusoid or linear_drag)"
            )),
        }
    }
}

/// Unmodelled force and moment acting on the vehicle.
///
/// For `constant` and `sinusoid` the parameter vectors are amplitudes; for
/// `linear_drag` they are per-axis damping coefficients on `v` and `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
    /// rad/s, sinusoid only.
    pub frequency: f64,
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn sinusoid(force: Vector3<f64>, torque: Vector3<f64>, frequency: f64) -> Self {
        Self {
            kind: DisturbanceKind::Sinusoid,
            force,
            torque,
            frequency,
        }
    }

    /// Parameters used when a kind is selected without explicit amplitudes:
    /// `|F_d| <= 0.5 N`, `|tau_d| <= 0.05 N m`, 1 rad/s.
    pub fn default_for(kind: DisturbanceKind) -> Self {
        match kind {
            DisturbanceKind::None => Self::none(),
            DisturbanceKind::LinearDrag => Self {
                kind,
                force: Vector3::new(0.1, 0.1, 0.1),
                torque: Vector3::new(0.001, 0.001, 0.001),
                frequency: 0.0,
            },
            DisturbanceKind::Constant | DisturbanceKind::Sinusoid => Self {
                kind,
                force: Vector3::new(0.3, 0.3, 0.2),
                torque: Vector3::new(0.03, 0.03, 0.02),
                frequency: 1.0,
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = self
            .force
            .iter()
            .chain(self.torque.iter())
            .all(|x| x.is_finite());
        if !finite || !self.frequency.is_finite() {
            return Err("disturbance parameters must be finite".into());
        }
        if self.kind == DisturbanceKind::LinearDrag
            && self
                .force
                .iter()
                .chain(self.torque.iter())
                .any(|c| *c < 0.0)
        {
            return Err("drag coefficients must be non-negative".into());
        }
        Ok(())
    }
}

/// Force and torque disturbance at time `t`.
pub fn disturbance(
    spec: &DisturbanceSpec,
    state: &VehicleState,
    t: f64,
) -> (Vector3<f64>, Vector3<f64>) {
    match spec.kind {
        DisturbanceKind::None => (Vector3::zeros(), Vector3::zeros()),
        DisturbanceKind::Constant => (spec.force, spec.torque),
        DisturbanceKind::Sinusoid => {
            let s = (spec.frequency * t).sin();
            (spec.force * s, spec.torque * s)
        }
        DisturbanceKind::LinearDrag => (
            -spec.force.component_mul(&state.v),
            -spec.torque.component_mul(&state.omega),
        ),
    }
}

/// Right-hand side of the closed rigid-body model.
pub fn dynamics_rhs(
    state: &VehicleState,
    cmd: &ControlCommand,
    spec: &DisturbanceSpec,
    params: &QuadParams,
    t: f64,
) -> Result<StateVector, AttitudeError> {
    let rate_map = attitude::euler_rate_map(&state.eta)?;
    let (f_d, tau_d) = disturbance(spec, state, t);

    let r_ib = attitude::rot_body_to_inertial(&state.eta);
    let thrust = r_ib.matrix() * Vector3::new(0.0, 0.0, cmd.f_z);
    let v_dot = (thrust + f_d) / params.mass - Vector3::new(0.0, 0.0, params.g);

    let eta_dot = rate_map * state.omega;

    let inertia = params.inertia;
    let gyro = -state.omega.cross(&inertia.component_mul(&state.omega));
    let omega_dot = (gyro + cmd.tau + tau_d).component_div(&inertia);

    let mut dx = StateVector::zeros();
    dx.fixed_rows_mut::<3>(0).copy_from(&state.v);
    dx.fixed_rows_mut::<3>(3).copy_from(&v_dot);
    dx.fixed_rows_mut::<3>(6).copy_from(&eta_dot);
    dx.fixed_rows_mut::<3>(9).copy_from(&omega_dot);
    Ok(dx)
}

/// Translational acceleration through the heading/tilt factorization:
/// `v_xy' = (R_psi T F_z + F_xy) / m`, `v_z' = (c_theta c_phi F_z + F_z,d) / m - g`.
pub fn translational_accel_split(
    state: &VehicleState,
    cmd: &ControlCommand,
    spec: &DisturbanceSpec,
    params: &QuadParams,
    t: f64,
) -> (Vector2<f64>, f64) {
    let (f_d, _) = disturbance(spec, state, t);
    let eta = &state.eta;
    let tilt = attitude::tilt_vector(eta.phi, eta.theta);
    let horizontal =
        (attitude::yaw_rotation_2d(eta.psi) * tilt.0 * cmd.f_z + f_d.xy()) / params.mass;
    let vertical = (eta.theta.cos() * eta.phi.cos() * cmd.f_z + f_d.z) / params.mass - params.g;
    (horizontal, vertical)
}
