//! Exponential performance functions and the error transformation that keeps
//! a tracking error strictly inside its envelope.
//!
//! A tracking error `e(t)` is admissible while `|e(t)| < rho(t)`. Dividing by
//! the envelope gives the normalized error `xi = e / rho`, and the map
//! `atanh: (-1, 1) -> R` turns the constrained error into an unconstrained
//! one that grows without bound as `xi` approaches the funnel boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::FunnelError;

/// Normalized errors are clamped to this magnitude in soft-clamp mode.
pub const SOFT_CLAMP: f64 = 1.0 - 1e-9;

/// Above this magnitude the transform switches to the split-log form.
/// `1 +- xi` is exact there, while `f64::atanh` loses about
/// `1 / (1 - |xi|)` ulps.
const NEAR_BOUNDARY: f64 = 0.5;

/// Exponentially decaying envelope `(rho0 - rho_inf) * exp(-l t) + rho_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceFunction {
    pub rho0: f64,
    pub rho_inf: f64,
    pub l: f64,
}

impl PerformanceFunction {
    /// Builds a funnel, rejecting parameters that do not describe a strictly
    /// shrinking positive envelope.
    pub fn new(rho0: f64, rho_inf: f64, l: f64) -> Result<Self, FunnelError> {
        let pf = Self { rho0, rho_inf, l };
        pf.validate()?;
        Ok(pf)
    }

    pub fn validate(&self) -> Result<(), FunnelError> {
        let ok = self.rho0.is_finite()
            && self.rho_inf.is_finite()
            && self.l.is_finite()
            && self.rho_inf > 0.0
            && self.rho0 > self.rho_inf
            && self.l > 0.0;
        if ok {
            Ok(())
        } else {
            Err(FunnelError::InvalidParameters {
                rho0: self.rho0,
                rho_inf: self.rho_inf,
                l: self.l,
            })
        }
    }

    /// Envelope value at time `t >= 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64, FunnelError> {
        check_time(t)?;
        Ok(self.value(t))
    }

    /// Time derivative of the envelope at `t >= 0`. Always negative.
    pub fn evaluate_derivative(&self, t: f64) -> Result<f64, FunnelError> {
        check_time(t)?;
        Ok(-self.l * (self.rho0 - self.rho_inf) * (-self.l * t).exp())
    }

    // Unchecked evaluation for callers that already own a valid time.
    pub(crate) fn value(&self, t: f64) -> f64 {
        (self.rho0 - self.rho_inf) * (-self.l * t).exp() + self.rho_inf
    }
}

fn check_time(t: f64) -> Result<(), FunnelError> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(FunnelError::NegativeTime(t))
    }
}

/// Error ratio `e / rho`. Valid while strictly inside `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct NormalizedError(pub f64);

impl NormalizedError {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_inside(self) -> bool {
        self.0.abs() < 1.0
    }

    /// Saturates the ratio at `±SOFT_CLAMP`. Used only for post-mortem runs.
    pub fn soft_clamped(self) -> Self {
        Self(self.0.clamp(-SOFT_CLAMP, SOFT_CLAMP))
    }
}

/// `xi = e / rho`. Out-of-funnel ratios are returned unchanged.
pub fn normalize(e: f64, rho: f64) -> NormalizedError {
    debug_assert!(rho > 0.0, "funnel value must be positive");
    NormalizedError(e / rho)
}

/// `atanh(xi)`. Fails with [`FunnelError::Violation`] when `|xi| >= 1`.
pub fn transform(xi: NormalizedError) -> Result<f64, FunnelError> {
    let x = checked(xi)?;
    if x.abs() > NEAR_BOUNDARY {
        Ok(0.5 * (x.ln_1p() - (-x).ln_1p()))
    } else {
        Ok(x.atanh())
    }
}

/// `d atanh(xi) / d xi = 1 / (1 - xi^2)`, always `>= 1` on the valid domain.
pub fn transform_slope(xi: NormalizedError) -> Result<f64, FunnelError> {
    let x = checked(xi)?;
    Ok(1.0 / ((1.0 - x) * (1.0 + x)))
}

fn checked(xi: NormalizedError) -> Result<f64, FunnelError> {
    if xi.is_inside() {
        Ok(xi.0)
    } else {
        Err(FunnelError::Violation {
            channel: None,
            t: None,
            xi: xi.0,
        })
    }
}

/// The twelve error channels of the cascade, in telemetry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "p_x")]
    PosX,
    #[serde(rename = "p_y")]
    PosY,
    #[serde(rename = "p_z")]
    PosZ,
    #[serde(rename = "v_x")]
    VelX,
    #[serde(rename = "v_y")]
    VelY,
    #[serde(rename = "v_z")]
    VelZ,
    #[serde(rename = "tilt_1")]
    Tilt1,
    #[serde(rename = "tilt_2")]
    Tilt2,
    #[serde(rename = "psi")]
    Yaw,
    #[serde(rename = "omega_phi")]
    RateRoll,
    #[serde(rename = "omega_theta")]
    RatePitch,
    #[serde(rename = "omega_psi")]
    RateYaw,
}

impl Channel {
    pub const ALL: [Channel; 12] = [
        Channel::PosX,
        Channel::PosY,
        Channel::PosZ,
        Channel::VelX,
        Channel::VelY,
        Channel::VelZ,
        Channel::Tilt1,
        Channel::Tilt2,
        Channel::Yaw,
        Channel::RateRoll,
        Channel::RatePitch,
        Channel::RateYaw,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::PosX => "p_x",
            Channel::PosY => "p_y",
            Channel::PosZ => "p_z",
            Channel::VelX => "v_x",
            Channel::VelY => "v_y",
            Channel::VelZ => "v_z",
            Channel::Tilt1 => "tilt_1",
            Channel::Tilt2 => "tilt_2",
            Channel::Yaw => "psi",
            Channel::RateRoll => "omega_phi",
            Channel::RatePitch => "omega_theta",
            Channel::RateYaw => "omega_psi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Channel::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn is_position(self) -> bool {
        matches!(self, Channel::PosX | Channel::PosY | Channel::PosZ)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One envelope per error channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunnelSet {
    /// Position, m.
    pub pos: [PerformanceFunction; 3],
    /// Inertial velocity, m/s.
    pub vel: [PerformanceFunction; 3],
    /// Tilt vector components, dimensionless.
    pub tilt: [PerformanceFunction; 2],
    /// Yaw, rad.
    pub yaw: PerformanceFunction,
    /// Angular rate, rad/s.
    pub rate: [PerformanceFunction; 3],
}

impl FunnelSet {
    /// Builds a set from one uniform envelope per loop.
    pub fn uniform(
        pos: PerformanceFunction,
        vel: PerformanceFunction,
        tilt: PerformanceFunction,
        yaw: PerformanceFunction,
        rate: PerformanceFunction,
    ) -> Self {
        Self {
            pos: [pos; 3],
            vel: [vel; 3],
            tilt: [tilt; 2],
            yaw,
            rate: [rate; 3],
        }
    }

    pub fn get(&self, channel: Channel) -> &PerformanceFunction {
        match channel {
            Channel::PosX => &self.pos[0],
            Channel::PosY => &self.pos[1],
            Channel::PosZ => &self.pos[2],
            Channel::VelX => &self.vel[0],
            Channel::VelY => &self.vel[1],
            Channel::VelZ => &self.vel[2],
            Channel::Tilt1 => &self.tilt[0],
            Channel::Tilt2 => &self.tilt[1],
            Channel::Yaw => &self.yaw,
            Channel::RateRoll => &self.rate[0],
            Channel::RatePitch => &self.rate[1],
            Channel::RateYaw => &self.rate[2],
        }
    }

    pub fn get_mut(&mut self, channel: Channel) -> &mut PerformanceFunction {
        match channel {
            Channel::PosX => &mut self.pos[0],
            Channel::PosY => &mut self.pos[1],
            Channel::PosZ => &mut self.pos[2],
            Channel::VelX => &mut self.vel[0],
            Channel::VelY => &mut self.vel[1],
            Channel::VelZ => &mut self.vel[2],
            Channel::Tilt1 => &mut self.tilt[0],
            Channel::Tilt2 => &mut self.tilt[1],
            Channel::Yaw => &mut self.yaw,
            Channel::RateRoll => &mut self.rate[0],
            Channel::RatePitch => &mut self.rate[1],
            Channel::RateYaw => &mut self.rate[2],
        }
    }

    /// All twelve envelope values at `t`, in [`Channel::ALL`] order.
    pub fn values(&self, t: f64) -> [f64; 12] {
        Channel::ALL.map(|c| self.get(c).value(t))
    }

    pub fn validate(&self) -> Result<(), (Channel, FunnelError)> {
        for c in Channel::ALL {
            self.get(c).validate().map_err(|e| (c, e))?;
        }
        Ok(())
    }
}
