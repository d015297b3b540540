//! Reference trajectories: the climbing lemniscate, the boat landing, and a
//! constant hover point.

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};

use crate::controller::ReferenceSample;
use crate::error::TrajectoryError;

/// Horizon over which the boat's steering schedule is defined, s.
pub const BOAT_HORIZON: f64 = 10.0;

// Sampling slack at the end of the boat horizon, for integrator stages that
// land a rounding error past t = 10.
const HORIZON_SLACK: f64 = 1e-9;

/// Steering segments `(start time, turn rate)`.
const BOAT_SEGMENTS: [(f64, f64); 4] = [
    (0.0, -1.0),
    (3.0 * PI / 4.0, 1.0),
    (9.0 * PI / 4.0, -1.0),
    (11.0 * PI / 4.0, 0.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TrajectoryKind {
    #[default]
    LemniscateAscent,
    /// Sigmoid descent from `z_d` centred at `t_d`, tracking the boat.
    Landing {
        z_d: f64,
        t_d: f64,
    },
    Hover {
        p: Vector3<f64>,
        psi: f64,
    },
}

impl TrajectoryKind {
    pub fn landing() -> Self {
        TrajectoryKind::Landing { z_d: 5.0, t_d: 5.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TrajectoryKind::LemniscateAscent => "lemniscate_ascent",
            TrajectoryKind::Landing { .. } => "landing",
            TrajectoryKind::Hover { .. } => "hover",
        }
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        match *self {
            TrajectoryKind::LemniscateAscent => Ok(()),
            TrajectoryKind::Landing { z_d, t_d } => {
                if !(z_d > 0.0 && z_d.is_finite()) {
                    return Err(TrajectoryError::InvalidParameter(format!(
                        "z_d must be positive, got {z_d}"
                    )));
                }
                if !(t_d > 0.0 && t_d.is_finite()) {
                    return Err(TrajectoryError::InvalidParameter(format!(
                        "t_d must be positive, got {t_d}"
                    )));
                }
                Ok(())
            }
            TrajectoryKind::Hover { p, psi } => {
                if p.iter().all(|x| x.is_finite()) && psi.is_finite() {
                    Ok(())
                } else {
                    Err(TrajectoryError::InvalidParameter(
                        "hover point must be finite".into(),
                    ))
                }
            }
        }
    }

    /// Longest duration the reference is defined for, if bounded.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            TrajectoryKind::Landing { .. } => Some(BOAT_HORIZON),
            _ => None,
        }
    }

    pub fn sample(&self, t: f64) -> Result<ReferenceSample, TrajectoryError> {
        match *self {
            TrajectoryKind::LemniscateAscent => Ok(lemniscate_ascent(t)),
            TrajectoryKind::Landing { z_d, t_d } => landing_reference(t, z_d, t_d),
            TrajectoryKind::Hover { p, psi } => Ok(hover(p, psi)),
        }
    }
}

/// Planar lemniscate of Bernoulli climbing at 0.2 m/s, heading fixed at 0.
pub fn lemniscate_ascent(t: f64) -> ReferenceSample {
    let (s, c) = t.sin_cos();
    let d = 1.0 + s * s;
    ReferenceSample {
        p: Vector3::new(c / d, s * c / d, 1.0 + t / 5.0),
        psi: 0.0,
    }
}

/// Time derivative of [`lemniscate_ascent`]'s position.
pub fn lemniscate_ascent_velocity(t: f64) -> Vector3<f64> {
    let (s, c) = t.sin_cos();
    let d = 1.0 + s * s;
    let d2 = d * d;
    let x = -s * (d + 2.0 * c * c) / d2;
    let y = ((c * c - s * s) * d - 2.0 * s * s * c * c) / d2;
    Vector3::new(x, y, 0.2)
}

/// Unicycle pose of the landing platform.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoatState {
    pub p_b: Vector2<f64>,
    pub alpha: f64,
}

impl BoatState {
    /// Pose after `dt` seconds at constant turn rate `u`.
    fn advance(&self, u: f64, dt: f64) -> BoatState {
        let a0 = self.alpha;
        if u == 0.0 {
            let (s, c) = a0.sin_cos();
            return BoatState {
                p_b: self.p_b + Vector2::new(c, s) * dt,
                alpha: a0,
            };
        }
        let a1 = a0 + u * dt;
        BoatState {
            p_b: self.p_b + Vector2::new(a1.sin() - a0.sin(), -(a1.cos() - a0.cos())) / u,
            alpha: a1,
        }
    }
}

/// Exact boat pose on `[0, 10]` s, starting at the origin heading along x.
pub fn boat_path(t: f64) -> Result<BoatState, TrajectoryError> {
    if !(0.0..=BOAT_HORIZON + HORIZON_SLACK).contains(&t) {
        return Err(TrajectoryError::OutOfRange(t));
    }
    let t = t.min(BOAT_HORIZON);
    let mut state = BoatState::default();
    for (i, &(start, u)) in BOAT_SEGMENTS.iter().enumerate() {
        let end = BOAT_SEGMENTS.get(i + 1).map_or(f64::INFINITY, |s| s.0);
        if t <= end {
            return Ok(state.advance(u, t - start));
        }
        state = state.advance(u, end - start);
    }
    unreachable!("last segment is unbounded")
}

/// Turn rate commanded to the boat at time `t`.
pub fn boat_steering(t: f64) -> f64 {
    BOAT_SEGMENTS
        .iter()
        .rev()
        .find(|(start, _)| t >= *start)
        .map_or(BOAT_SEGMENTS[0].1, |s| s.1)
}

/// Follows the boat horizontally while descending along a sigmoid.
pub fn landing_reference(t: f64, z_d: f64, t_d: f64) -> Result<ReferenceSample, TrajectoryError> {
    let boat = boat_path(t)?;
    let z = z_d * (1.0 - 1.0 / (1.0 + (-(t - t_d)).exp()));
    Ok(ReferenceSample {
        p: Vector3::new(boat.p_b.x, boat.p_b.y, z),
        psi: 0.0,
    })
}

pub fn hover(p: Vector3<f64>, psi: f64) -> ReferenceSample {
    ReferenceSample { p, psi }
}
