//! Model-free prescribed-performance cascade.
//!
//! Each loop normalizes its error by the loop's funnel, maps it through
//! `atanh`, and feeds back `-k * rho^-1 * (1 - xi^2)^-1 * atanh(xi)`:
//!
//! ```text
//! e_p  -> v_r                      (position)
//! e_v  -> F_z, tilt_r              (velocity; tilt_r steers the horizontal plane)
//! e_tilt, e_psi -> omega_r         (attitude)
//! e_omega -> tau                   (angular rate)
//! ```
//!
//! The controller only sees the state, the reference, the funnels and its
//! gains. Mass, inertia, gravity and disturbances are not reachable from
//! this module:
//!
//! ```compile_fail
//! use funnelquad::controller::Controller;
//! use funnelquad::plant::QuadParams;
//! fn peek(c: &Controller) -> QuadParams { c.params }
//! ```

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::attitude::{self, wrap_angle, EulerAngles, TiltVector};
use crate::error::{ControlError, Stage};
use crate::funnel::{self, Channel, FunnelSet};
use crate::plant::{ControlCommand, VehicleState};

/// Per-loop diagonal gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSet {
    pub k_p: Vector3<f64>,
    pub k_v_xy: Vector2<f64>,
    pub k_v_z: f64,
    pub k_tilt: Vector2<f64>,
    pub k_psi: f64,
    pub k_omega: Vector3<f64>,
}

impl Default for GainSet {
    fn default() -> Self {
        Self {
            k_p: Vector3::new(1.25, 1.25, 12.5),
            k_v_xy: Vector2::new(1.0, 2.0),
            k_v_z: 10.0,
            k_tilt: Vector2::new(3.0, 1.5),
            k_psi: 1.0,
            k_omega: Vector3::new(10.0, 10.0, 10.0),
        }
    }
}

impl GainSet {
    pub fn validate(&self) -> Result<(), String> {
        let scalars = [self.k_v_z, self.k_psi];
        let all = self
            .k_p
            .iter()
            .chain(self.k_v_xy.iter())
            .chain(self.k_tilt.iter())
            .chain(self.k_omega.iter())
            .chain(scalars.iter());
        for (i, k) in all.enumerate() {
            if !(*k > 0.0 && k.is_finite()) {
                return Err(format!("gain #{i} must be positive and finite, got {k}"));
            }
        }
        Ok(())
    }
}

/// Position and yaw reference at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceSample {
    pub p: Vector3<f64>,
    pub psi: f64,
}

/// Thresholds used to monitor the closed-loop stability conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConditions {
    /// Operational roll/pitch bound, rad, in `(0, pi/2)`.
    pub pi_bar: f64,
    /// Smallest `|F_z|` treated as non-zero, N.
    pub f_z_min: f64,
}

impl Default for TheoremConditions {
    fn default() -> Self {
        Self {
            pi_bar: 1.2,
            f_z_min: 1e-3,
        }
    }
}

impl TheoremConditions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.pi_bar > 0.0 && self.pi_bar < std::f64::consts::FRAC_PI_2) {
            return Err(format!("pi_bar must lie in (0, pi/2), got {}", self.pi_bar));
        }
        if !(self.f_z_min > 0.0 && self.f_z_min.is_finite()) {
            return Err(format!("f_z_min must be positive, got {}", self.f_z_min));
        }
        Ok(())
    }
}

/// How the transform treats a normalized error on or outside the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FunnelPolicy {
    /// Raise [`ControlError::FunnelViolation`].
    #[default]
    Strict,
    /// Saturate `|xi|` at `1 - 1e-9` and keep going. Diagnostic runs only.
    SoftClamp,
}

/// Monitored conditions: non-zero thrust, gain ratio, bounded tilt reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionFlags {
    pub thrust_nonzero: bool,
    pub gain_ratio: bool,
    pub tilt_reference_bounded: bool,
}

impl ConditionFlags {
    pub fn as_array(&self) -> [bool; 3] {
        [
            self.thrust_nonzero,
            self.gain_ratio,
            self.tilt_reference_bounded,
        ]
    }
}

/// Every intermediate signal of one controller evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlDiagnostics {
    pub v_r: Vector3<f64>,
    pub f_z: f64,
    pub tilt: TiltVector,
    pub tilt_ref: TiltVector,
    pub omega_r: Vector3<f64>,
    /// Raw errors, in [`Channel::ALL`] order.
    pub errors: [f64; 12],
    pub rho: [f64; 12],
    /// Normalized errors before any clamping.
    pub xi: [f64; 12],
    pub eps: [f64; 12],
    pub conditions: ConditionFlags,
}

impl ControlDiagnostics {
    pub fn xi(&self, channel: Channel) -> f64 {
        self.xi[channel.index()]
    }

    /// Largest `|xi|` and its channel.
    pub fn worst_channel(&self) -> (Channel, f64) {
        Channel::ALL
            .into_iter()
            .map(|c| (c, self.xi[c.index()].abs()))
            .fold(
                (Channel::PosX, -1.0),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            )
    }
}

/// The cascade with its funnels, gains and monitoring thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub funnels: FunnelSet,
    pub gains: GainSet,
    pub conditions: TheoremConditions,
    pub policy: FunnelPolicy,
}

impl Controller {
    pub fn new(funnels: FunnelSet, gains: GainSet, conditions: TheoremConditions) -> Self {
        Self {
            funnels,
            gains,
            conditions,
            policy: FunnelPolicy::Strict,
        }
    }

    pub fn with_policy(mut self, policy: FunnelPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// `v_r = -k_p rho_p^-1 r_p eps_p`.
    pub fn reference_velocity(
        &self,
        e_p: &Vector3<f64>,
        t: f64,
    ) -> Result<Vector3<f64>, ControlError> {
        self.position_stage(e_p, t, &mut ControlDiagnostics::default())
    }

    /// `F_z = -k_vz rho_vz^-1 r_vz eps_vz`.
    pub fn thrust(&self, e_vz: f64, t: f64) -> Result<f64, ControlError> {
        self.thrust_stage(e_vz, t, &mut ControlDiagnostics::default())
    }

    /// `tilt_r = -R_psi^T (k_vxy rho_vxy^-1 r_vxy eps_vxy) / F_z`.
    pub fn tilt_reference(
        &self,
        e_v_xy: &Vector2<f64>,
        psi: f64,
        f_z: f64,
        t: f64,
    ) -> Result<TiltVector, ControlError> {
        self.tilt_stage(e_v_xy, psi, f_z, t, &mut ControlDiagnostics::default())
    }

    /// Angular-rate reference from the tilt and yaw errors. The yaw row
    /// cancels the coupling of the measured roll/pitch rates into `psi_dot`.
    pub fn rate_reference(
        &self,
        e_tilt: &Vector2<f64>,
        e_psi: f64,
        eta: &EulerAngles,
        omega: &Vector3<f64>,
        t: f64,
    ) -> Result<Vector3<f64>, ControlError> {
        self.attitude_stage(
            e_tilt,
            e_psi,
            eta,
            omega,
            t,
            &mut ControlDiagnostics::default(),
        )
    }

    /// `tau = -k_omega rho_omega^-1 r_omega eps_omega`.
    pub fn torque(&self, e_omega: &Vector3<f64>, t: f64) -> Result<Vector3<f64>, ControlError> {
        self.rate_stage(e_omega, t, &mut ControlDiagnostics::default())
    }

    /// Runs the whole cascade at `(t, state)`.
    pub fn compute_control(
        &self,
        t: f64,
        state: &VehicleState,
        reference: &ReferenceSample,
    ) -> Result<(ControlCommand, ControlDiagnostics), ControlError> {
        let mut diag = ControlDiagnostics::default();
        let cmd = self.compute_control_into(t, state, reference, &mut diag)?;
        Ok((cmd, diag))
    }

    /// Like [`Controller::compute_control`], but leaves everything computed
    /// up to a failure in `diag`.
    pub fn compute_control_into(
        &self,
        t: f64,
        state: &VehicleState,
        reference: &ReferenceSample,
        diag: &mut ControlDiagnostics,
    ) -> Result<ControlCommand, ControlError> {
        let e_p = state.p - reference.p;
        let v_r = self.position_stage(&e_p, t, diag)?;
        diag.v_r = v_r;

        let e_v = state.v - v_r;
        let f_z = self.thrust_stage(e_v.z, t, diag)?;
        diag.f_z = f_z;
        let tilt_ref = self.tilt_stage(&e_v.xy(), state.eta.psi, f_z, t, diag)?;
        diag.tilt_ref = tilt_ref;

        let tilt = attitude::tilt_vector(state.eta.phi, state.eta.theta);
        diag.tilt = tilt;
        let e_tilt = tilt.0 - tilt_ref.0;
        let e_psi = wrap_angle(state.eta.psi - reference.psi);
        let omega_r = self.attitude_stage(&e_tilt, e_psi, &state.eta, &state.omega, t, diag)?;
        diag.omega_r = omega_r;

        let e_omega = state.omega - omega_r;
        let tau = self.rate_stage(&e_omega, t, diag)?;

        diag.conditions = self.check_conditions(diag, t);
        Ok(ControlCommand { f_z, tau })
    }

    /// Evaluates the three monitored conditions. Never alters the command.
    pub fn check_conditions(&self, diag: &ControlDiagnostics, t: f64) -> ConditionFlags {
        let thrust_nonzero = diag.f_z.abs() >= self.conditions.f_z_min;

        let ratio = self.gains.k_v_xy.min() / self.gains.k_v_z;
        let rho_tilt_0 = self.funnels.tilt[0].rho0.max(self.funnels.tilt[1].rho0);
        let bound = rho_tilt_0 / (4.0 * self.conditions.pi_bar.cos().powi(2));
        let gain_ratio = ratio > bound;

        let tilt_reference_bounded = (0..2)
            .all(|i| diag.tilt_ref.0[i].abs() <= self.funnels.tilt[i].value(t.max(0.0)) + 1.0);

        ConditionFlags {
            thrust_nonzero,
            gain_ratio,
            tilt_reference_bounded,
        }
    }

    fn position_stage(
        &self,
        e_p: &Vector3<f64>,
        t: f64,
        diag: &mut ControlDiagnostics,
    ) -> Result<Vector3<f64>, ControlError> {
        let channels = [Channel::PosX, Channel::PosY, Channel::PosZ];
        let mut v_r = Vector3::zeros();
        for (i, ch) in channels.into_iter().enumerate() {
            v_r[i] = -self.gains.k_p[i] * self.shaped(ch, e_p[i], t, Stage::Position, diag)?;
        }
        Ok(v_r)
    }

    fn thrust_stage(
        &self,
        e_vz: f64,
        t: f64,
        diag: &mut ControlDiagnostics,
    ) -> Result<f64, ControlError> {
        Ok(-self.gains.k_v_z * self.shaped(Channel::VelZ, e_vz, t, Stage::Velocity, diag)?)
    }

    fn tilt_stage(
        &self,
        e_v_xy: &Vector2<f64>,
        psi: f64,
        f_z: f64,
        t: f64,
        diag: &mut ControlDiagnostics,
    ) -> Result<TiltVector, ControlError> {
        let sx = self.shaped(Channel::VelX, e_v_xy.x, t, Stage::Velocity, diag)?;
        let sy = self.shaped(Channel::VelY, e_v_xy.y, t, Stage::Velocity, diag)?;
        let demand = self.gains.k_v_xy.component_mul(&Vector2::new(sx, sy));
        if demand == Vector2::zeros() {
            return Ok(TiltVector::default());
        }
        let f_z_min = self.conditions.f_z_min;
        let divisor = if f_z.abs() >= f_z_min {
            f_z
        } else {
            match self.policy {
                FunnelPolicy::Strict => {
                    return Err(ControlError::ThrustDegenerate { t, f_z, f_z_min })
                }
                FunnelPolicy::SoftClamp => f_z_min.copysign(f_z),
            }
        };
        let heading = attitude::yaw_rotation_2d(psi);
        Ok(TiltVector(-(heading.transpose() * demand) / divisor))
    }

    fn attitude_stage(
        &self,
        e_tilt: &Vector2<f64>,
        e_psi: f64,
        eta: &EulerAngles,
        omega: &Vector3<f64>,
        t: f64,
        diag: &mut ControlDiagnostics,
    ) -> Result<Vector3<f64>, ControlError> {
        let s1 = self.shaped(Channel::Tilt1, e_tilt.x, t, Stage::Attitude, diag)?;
        let s2 = self.shaped(Channel::Tilt2, e_tilt.y, t, Stage::Attitude, diag)?;
        let s_psi = self.shaped(Channel::Yaw, e_psi, t, Stage::Attitude, diag)?;

        let singular = |source| ControlError::Singularity {
            stage: Stage::Attitude,
            t,
            source,
        };
        let jac = attitude::tilt_jacobian(eta.phi, eta.theta).map_err(singular)?;
        let heading = attitude::heading_block(eta.psi, eta.theta).map_err(singular)?;
        let jac_inv = invert2(&jac);
        let heading_inv = invert2(&heading);

        let demand = self.gains.k_tilt.component_mul(&Vector2::new(s1, s2));
        let omega_tilt = -(heading_inv * (jac_inv * demand));

        let tan_theta = eta.theta.tan();
        let (sp, cp) = eta.psi.sin_cos();
        let omega_yaw =
            -self.gains.k_psi * s_psi - omega.x * cp * tan_theta - omega.y * sp * tan_theta;

        Ok(Vector3::new(omega_tilt.x, omega_tilt.y, omega_yaw))
    }

    fn rate_stage(
        &self,
        e_omega: &Vector3<f64>,
        t: f64,
        diag: &mut ControlDiagnostics,
    ) -> Result<Vector3<f64>, ControlError> {
        let channels = [Channel::RateRoll, Channel::RatePitch, Channel::RateYaw];
        let mut tau = Vector3::zeros();
        for (i, ch) in channels.into_iter().enumerate() {
            tau[i] = -self.gains.k_omega[i] * self.shaped(ch, e_omega[i], t, Stage::Rate, diag)?;
        }
        Ok(tau)
    }

    /// `rho^-1 (1 - xi^2)^-1 atanh(xi)` for one channel, recording the error,
    /// funnel value, `xi` and `eps` before any failure.
    fn shaped(
        &self,
        channel: Channel,
        e: f64,
        t: f64,
        stage: Stage,
        diag: &mut ControlDiagnostics,
    ) -> Result<f64, ControlError> {
        let i = channel.index();
        let rho = self.funnels.get(channel).value(t);
        let xi = funnel::normalize(e, rho);
        diag.errors[i] = e;
        diag.rho[i] = rho;
        diag.xi[i] = xi.value();

        let xi = match (xi.is_inside(), self.policy) {
            (true, _) => xi,
            (false, FunnelPolicy::SoftClamp) if !xi.value().is_nan() => xi.soft_clamped(),
            _ => {
                return Err(ControlError::FunnelViolation {
                    stage,
                    channel,
                    t,
                    xi: xi.value(),
                })
            }
        };
        let violation = |_| ControlError::FunnelViolation {
            stage,
            channel,
            t,
            xi: xi.value(),
        };
        let eps = funnel::transform(xi).map_err(violation)?;
        let slope = funnel::transform_slope(xi).map_err(violation)?;
        diag.eps[i] = eps;
        Ok(slope * eps / rho)
    }
}

// Callers have already rejected the singular configurations.
fn invert2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let det = m.determinant();
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}
