use std::path::PathBuf;

use thiserror::Error;

use crate::funnel::Channel;
use crate::sim::{RunReport, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunnelError {
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid performance function (rho0={rho0}, rho_inf={rho_inf}, l={l}): need rho0 > rho_inf > 0 and l > 0")]
    InvalidParameters { rho0: f64, rho_inf: f64, l: f64 },
    #[error("funnel violation{}{}: |xi| = {} >= 1",
        channel.map(|c| format!(" on {c}")).unwrap_or_default(),
        t.map(|t| format!(" at t={t}")).unwrap_or_default(),
        xi.abs())]
    Violation {
        channel: Option<Channel>,
        t: Option<f64>,
        xi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttitudeError {
    #[error("kinematic singularity in {what}: |{quantity}| = {value:e} below 1e-9")]
    Singularity {
        what: &'static str,
        quantity: &'static str,
        value: f64,
    },
    #[error("tilt vector ({0}, {1}) is outside the image of the admissible angle domain")]
    Inversion(f64, f64),
}

/// Loop of the cascade in which a control error was raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Position,
    Velocity,
    Attitude,
    Rate,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Position => "position",
            Stage::Velocity => "velocity",
            Stage::Attitude => "attitude",
            Stage::Rate => "angular-rate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("{stage} loop: funnel violation on {channel} at t={t}: xi = {xi}")]
    FunnelViolation {
        stage: Stage,
        channel: Channel,
        t: f64,
        xi: f64,
    },
    #[error("velocity loop: thrust {f_z:e} N at t={t} is below the non-degeneracy threshold {f_z_min:e} N")]
    ThrustDegenerate { t: f64, f_z: f64, f_z_min: f64 },
    #[error("{stage} loop at t={t}: {source}")]
    Singularity {
        stage: Stage,
        t: f64,
        #[source]
        source: AttitudeError,
    },
}

impl ControlError {
    pub fn stage(&self) -> Stage {
        match self {
            ControlError::FunnelViolation { stage, .. }
            | ControlError::Singularity { stage, .. } => *stage,
            ControlError::ThrustDegenerate { .. } => Stage::Velocity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("boat path is defined on [0, 10] s, got t={0}")]
    OutOfRange(f64),
    #[error("invalid trajectory parameter: {0}")]
    InvalidParameter(String),
}

/// One channel that starts outside its funnel.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialViolation {
    pub channel: Channel,
    pub xi: f64,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("initial funnel compliance fails on {}", fmt_initial(.0))]
    InitialCompliance(Vec<InitialViolation>),
    #[error("funnel violation on {} at t={}: xi = {}", .violation.channel, .violation.t, .violation.xi)]
    FunnelViolation {
        violation: Violation,
        /// Everything logged up to and including the violating step.
        report: Box<RunReport>,
    },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Attitude(#[from] AttitudeError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("state became non-finite at t={0}")]
    NonFinite(f64),
}

fn fmt_initial(v: &[InitialViolation]) -> String {
    v.iter()
        .map(|iv| format!("{} (xi(0) = {:.6})", iv.channel, iv.xi))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("report has no records")]
    EmptyReport,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
