//! Z-Y-X Euler-angle kinematics and the matrices used to split the thrust
//! direction into a heading rotation and a two-dimensional tilt vector.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix3, Vector2};

use crate::error::AttitudeError;

const SINGULAR_EPS: f64 = 1e-9;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        PI
    } else {
        w
    }
}

/// Roll, pitch, yaw in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    /// Yaw is wrapped to `(-pi, pi]`; roll and pitch are stored as given.
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self {
            phi,
            theta,
            psi: wrap_angle(psi),
        }
    }

    /// `|phi| < pi/2` and `|theta| < pi/2`.
    pub fn in_domain(&self) -> bool {
        self.phi.abs() < FRAC_PI_2 && self.theta.abs() < FRAC_PI_2 && self.psi.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.phi, self.theta, self.psi]
    }
}

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(Matrix3<f64>);

impl Rot3 {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Largest entry of `|R R^T - I|` and `|det R - 1|`.
    pub fn orthonormality_defect(&self) -> (f64, f64) {
        let gram = self.0 * self.0.transpose() - Matrix3::identity();
        (gram.amax(), (self.0.determinant() - 1.0).abs())
    }
}

/// Horizontal thrust-direction surrogate `(sin(theta) cos(phi), -sin(phi))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TiltVector(pub Vector2<f64>);

impl TiltVector {
    pub fn new(t1: f64, t2: f64) -> Self {
        Self(Vector2::new(t1, t2))
    }
}

/// `R_IB = R_z(psi) R_y(theta) R_x(phi)`.
pub fn rot_body_to_inertial(eta: &EulerAngles) -> Rot3 {
    let (sf, cf) = eta.phi.sin_cos();
    let (st, ct) = eta.theta.sin_cos();
    let (sp, cp) = eta.psi.sin_cos();
    Rot3(Matrix3::new(
        cp * ct,
        cp * st * sf - sp * cf,
        cp * st * cf + sp * sf,
        sp * ct,
        sp * st * sf + cp * cf,
        sp * st * cf - cp * sf,
        -st,
        ct * sf,
        ct * cf,
    ))
}

pub fn tilt_vector(phi: f64, theta: f64) -> TiltVector {
    TiltVector::new(theta.sin() * phi.cos(), -phi.sin())
}

/// `d tilt / d(phi, theta)`.
pub fn tilt_jacobian(phi: f64, theta: f64) -> Result<Matrix2<f64>, AttitudeError> {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let det = cf * ct * cf;
    if det.abs() < SINGULAR_EPS {
        return Err(AttitudeError::Singularity {
            what: "tilt Jacobian",
            quantity: "det",
            value: det.abs(),
        });
    }
    Ok(Matrix2::new(-st * sf, ct * cf, -cf, 0.0))
}

/// Upper-left 2x2 block of the Euler rate map.
pub fn heading_block(psi: f64, theta: f64) -> Result<Matrix2<f64>, AttitudeError> {
    let ct = checked_cos_theta(theta, "heading block")?;
    let (sp, cp) = psi.sin_cos();
    Ok(Matrix2::new(cp / ct, sp / ct, -sp, cp))
}

/// Maps angular velocity to Euler angle rates, `eta_dot = R_T(eta) omega`.
pub fn euler_rate_map(eta: &EulerAngles) -> Result<Matrix3<f64>, AttitudeError> {
    let ct = checked_cos_theta(eta.theta, "Euler rate map")?;
    let tt = eta.theta.sin() / ct;
    let (sp, cp) = eta.psi.sin_cos();
    Ok(Matrix3::new(
        cp / ct,
        sp / ct,
        0.0,
        -sp,
        cp,
        0.0,
        cp * tt,
        sp * tt,
        1.0,
    ))
}

fn checked_cos_theta(theta: f64, what: &'static str) -> Result<f64, AttitudeError> {
    let ct = theta.cos();
    if ct.abs() < SINGULAR_EPS {
        Err(AttitudeError::Singularity {
            what,
            quantity: "cos(theta)",
            value: ct.abs(),
        })
    } else {
        Ok(ct)
    }
}

/// Planar rotation by `psi`.
pub fn yaw_rotation_2d(psi: f64) -> Matrix2<f64> {
    let (s, c) = psi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Inverts [`tilt_vector`] on `|phi|, |theta| < pi/2`.
pub fn tilt_to_angles(tv: &TiltVector) -> Result<(f64, f64), AttitudeError> {
    let (t1, t2) = (tv.0.x, tv.0.y);
    if t2.is_nan() || t2.abs() >= 1.0 || !t1.is_finite() {
        return Err(AttitudeError::Inversion(t1, t2));
    }
    let phi = -t2.asin();
    let s = t1 / phi.cos();
    if s.is_nan() || s.abs() > 1.0 {
        return Err(AttitudeError::Inversion(t1, t2));
    }
    Ok((phi, s.asin()))
}
