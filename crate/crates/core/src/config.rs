//! JSON scenario files and the bundled presets.
//!
//! ```json
//! {
//!   "scenario": { "kind": "landing", "z_d": 5.0, "t_d": 5.0 },
//!   "duration": 10.0,
//!   "dt": 0.001,
//!   "integration": { "substeps": 64, "control_update": "per_stage" },
//!   "violation_mode": "halt",
//!   "initial_state": { "p": [0, 0, 5], "v": [0, 0, 0], "eta": [0, 0, 0], "omega": [0, 0, 0] },
//!   "params": { "mass": 1.0, "inertia": [0.01, 0.01, 0.02], "g": 9.81 },
//!   "disturbance": { "kind": "none" },
//!   "funnels": { "p_x": { "rho0": 12.0, "rho_inf": 0.2, "l": 0.4 }, "...": "all 12 channels" },
//!   "gains": { "k_p": [1.25, 1.25, 12.5], "...": "..." },
//!   "conditions": { "pi_bar": 1.2, "f_z_min": 0.001 },
//!   "outputs": { "plot_channels": ["p_x", "p_y", "p_z"] }
//! }
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::EulerAngles;
use crate::controller::{GainSet, TheoremConditions};
use crate::error::ConfigError;
use crate::funnel::{Channel, FunnelSet, PerformanceFunction};
use crate::plant::{DisturbanceKind, DisturbanceSpec, QuadParams, VehicleState};
use crate::sim::{ControlUpdate, SimConfig, ViolationMode};
use crate::trajectories::TrajectoryKind;

const ASCENT: &str = include_str!("../presets/ascent.json");
const LANDING: &str = include_str!("../presets/landing.json");

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 2] = ["ascent", "landing"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSection {
    LemniscateAscent,
    Landing {
        #[serde(default = "five")]
        z_d: f64,
        #[serde(default = "five")]
        t_d: f64,
    },
    Hover {
        p: [f64; 3],
        #[serde(default)]
        psi: f64,
    },
}

fn five() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlUpdateName {
    PerStage,
    ZeroOrderHold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationModeName {
    Halt,
    ClampAndContinue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub substeps: usize,
    pub control_update: ControlUpdateName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub p: [f64; 3],
    #[serde(default)]
    pub v: [f64; 3],
    /// Roll, pitch, yaw.
    #[serde(default)]
    pub eta: [f64; 3],
    #[serde(default)]
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub mass: f64,
    pub inertia: [f64; 3],
    #[serde(default = "gravity")]
    pub g: f64,
}

fn gravity() -> f64 {
    9.81
}

/// Omitted amplitudes fall back to [`DisturbanceSpec::default_for`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub kind: DisturbanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub k_p: [f64; 3],
    pub k_v_xy: [f64; 2],
    pub k_v_z: f64,
    pub k_phitheta: [f64; 2],
    pub k_psi: f64,
    pub k_omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsSection {
    pub pi_bar: f64,
    pub f_z_min: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Channels drawn with `--plots`; empty means all twelve.
    #[serde(default)]
    pub plot_channels: Vec<String>,
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: ScenarioSection,
    pub duration: f64,
    pub dt: f64,
    pub integration: IntegrationSection,
    pub violation_mode: ViolationModeName,
    pub initial_state: StateSection,
    pub params: ParamsSection,
    pub disturbance: DisturbanceSection,
    pub funnels: BTreeMap<String, PerformanceFunction>,
    pub gains: GainsSection,
    pub conditions: ConditionsSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

/// A validated simulation plus what to emit for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sim: SimConfig,
    pub plot_channels: Vec<Channel>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }

    pub fn from_config(cfg: &SimConfig) -> Self {
        let scenario = match cfg.scenario {
            TrajectoryKind::LemniscateAscent => ScenarioSection::LemniscateAscent,
            TrajectoryKind::Landing { z_d, t_d } => ScenarioSection::Landing { z_d, t_d },
            TrajectoryKind::Hover { p, psi } => ScenarioSection::Hover { p: p.into(), psi },
        };
        let s = &cfg.initial_state;
        let d = &cfg.disturbance;
        let g = &cfg.gains;
        Self {
            scenario,
            duration: cfg.duration,
            dt: cfg.dt,
            integration: IntegrationSection {
                substeps: cfg.substeps,
                control_update: match cfg.control_update {
                    ControlUpdate::PerStage => ControlUpdateName::PerStage,
                    ControlUpdate::ZeroOrderHold => ControlUpdateName::ZeroOrderHold,
                },
            },
            violation_mode: match cfg.violation_mode {
                ViolationMode::Halt => ViolationModeName::Halt,
                ViolationMode::ClampAndContinue => ViolationModeName::ClampAndContinue,
            },
            initial_state: StateSection {
                p: s.p.into(),
                v: s.v.into(),
                eta: s.eta.as_array(),
                omega: s.omega.into(),
            },
            params: ParamsSection {
                mass: cfg.params.mass,
                inertia: cfg.params.inertia.into(),
                g: cfg.params.g,
            },
            disturbance: DisturbanceSection {
                kind: d.kind,
                force: Some(d.force.into()),
                torque: Some(d.torque.into()),
                frequency: Some(d.frequency),
            },
            funnels: Channel::ALL
                .into_iter()
                .map(|c| (c.name().to_string(), *cfg.funnels.get(c)))
                .collect(),
            gains: GainsSection {
                k_p: g.k_p.into(),
                k_v_xy: g.k_v_xy.into(),
                k_v_z: g.k_v_z,
                k_phitheta: g.k_tilt.into(),
                k_psi: g.k_psi,
                k_omega: g.k_omega.into(),
            },
            conditions: ConditionsSection {
                pi_bar: cfg.conditions.pi_bar,
                f_z_min: cfg.conditions.f_z_min,
            },
            outputs: OutputsSection::default(),
        }
    }

    /// Converts to a validated [`Scenario`].
    pub fn into_scenario(self) -> Result<Scenario, ConfigError> {
        let funnels = self.funnel_set()?;

        let scenario = match self.scenario {
            ScenarioSection::LemniscateAscent => TrajectoryKind::LemniscateAscent,
            ScenarioSection::Landing { z_d, t_d } => TrajectoryKind::Landing { z_d, t_d },
            ScenarioSection::Hover { p, psi } => TrajectoryKind::Hover {
                p: Vector3::from(p),
                psi,
            },
        };
        scenario
            .validate()
            .map_err(|e| invalid("scenario", e.to_string()))?;

        let [phi, theta, psi] = self.initial_state.eta;
        let initial_state = VehicleState {
            p: self.initial_state.p.into(),
            v: self.initial_state.v.into(),
            eta: EulerAngles::new(phi, theta, psi),
            omega: self.initial_state.omega.into(),
        };

        let params = QuadParams {
            mass: self.params.mass,
            inertia: self.params.inertia.into(),
            g: self.params.g,
        };
        params.validate().map_err(|m| invalid("params", m))?;

        let base = DisturbanceSpec::default_for(self.disturbance.kind);
        let disturbance = DisturbanceSpec {
            kind: self.disturbance.kind,
            force: self.disturbance.force.map_or(base.force, Vector3::from),
            torque: self.disturbance.torque.map_or(base.torque, Vector3::from),
            frequency: self.disturbance.frequency.unwrap_or(base.frequency),
        };
        disturbance
            .validate()
            .map_err(|m| invalid("disturbance", m))?;

        let g = &self.gains;
        let gains = GainSet {
            k_p: g.k_p.into(),
            k_v_xy: Vector2::from(g.k_v_xy),
            k_v_z: g.k_v_z,
            k_tilt: Vector2::from(g.k_phitheta),
            k_psi: g.k_psi,
            k_omega: g.k_omega.into(),
        };
        gains.validate().map_err(|m| invalid("gains", m))?;

        let conditions = TheoremConditions {
            pi_bar: self.conditions.pi_bar,
            f_z_min: self.conditions.f_z_min,
        };
        conditions
            .validate()
            .map_err(|m| invalid("conditions", m))?;

        let plot_channels = self
            .outputs
            .plot_channels
            .iter()
            .map(|n| {
                Channel::from_name(n).ok_or_else(|| {
                    invalid("outputs.plot_channels", format!("unknown channel `{n}`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let sim = SimConfig {
            dt: self.dt,
            duration: self.duration,
            substeps: self.integration.substeps,
            control_update: match self.integration.control_update {
                ControlUpdateName::PerStage => ControlUpdate::PerStage,
                ControlUpdateName::ZeroOrderHold => ControlUpdate::ZeroOrderHold,
            },
            scenario,
            initial_state,
            params,
            disturbance,
            funnels,
            gains,
            conditions,
            violation_mode: match self.violation_mode {
                ViolationModeName::Halt => ViolationMode::Halt,
                ViolationModeName::ClampAndContinue => ViolationMode::ClampAndContinue,
            },
        };
        check_sim(&sim)?;
        Ok(Scenario { sim, plot_channels })
    }

    fn funnel_set(&self) -> Result<FunnelSet, ConfigError> {
        if let Some(unknown) = self
            .funnels
            .keys()
            .find(|k| Channel::from_name(k).is_none())
        {
            return Err(invalid(format!("funnels.{unknown}"), "unknown channel"));
        }
        let placeholder = PerformanceFunction {
            rho0: 1.0,
            rho_inf: 0.5,
            l: 1.0,
        };
        let mut set = FunnelSet::uniform(
            placeholder,
            placeholder,
            placeholder,
            placeholder,
            placeholder,
        );
        for c in Channel::ALL {
            let pf = self
                .funnels
                .get(c.name())
                .ok_or_else(|| invalid(format!("funnels.{c}"), "missing funnel entry"))?;
            pf.validate()
                .map_err(|e| invalid(format!("funnels.{c}"), e.to_string()))?;
            *set.get_mut(c) = *pf;
        }
        Ok(set)
    }
}

/// Re-checks the assembled config, naming the offending top-level field.
fn check_sim(sim: &SimConfig) -> Result<(), ConfigError> {
    if sim.dt.is_nan() || sim.dt <= 0.0 || sim.dt > crate::sim::MAX_DT {
        return Err(invalid(
            "dt",
            format!("must lie in (0, {}], got {}", crate::sim::MAX_DT, sim.dt),
        ));
    }
    if sim.duration.is_nan() || sim.duration < sim.dt {
        return Err(invalid(
            "duration",
            format!("must be at least dt, got {}", sim.duration),
        ));
    }
    if sim.substeps == 0 {
        return Err(invalid("integration.substeps", "must be at least 1"));
    }
    sim.validate()
        .map_err(|e| invalid("scenario", e.to_string()))
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioFile::parse(&text, path)?.into_scenario()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig, ConfigError> {
    load_scenario(path).map(|s| s.sim)
}

/// Writes `cfg` as a scenario file that [`load_config`] reads back.
pub fn save_config(cfg: &SimConfig, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, ScenarioFile::from_config(cfg).to_json() + "\n")
}

/// Source text of a bundled preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "ascent" => Some(ASCENT),
        "landing" => Some(LANDING),
        _ => None,
    }
}

pub fn preset_scenario(name: &str) -> Result<Scenario, ConfigError> {
    let text = preset_source(name).ok_or_else(|| {
        invalid(
            "preset",
            format!(
                "unknown preset `{name}` (expected {})",
                PRESETS.join(" or ")
            ),
        )
    })?;
    ScenarioFile::parse(text, Path::new(&format!("<preset {name}>")))?.into_scenario()
}

/// One of the bundled presets as a [`SimConfig`].
pub fn preset(name: &str) -> Result<SimConfig, ConfigError> {
    preset_scenario(name).map(|s| s.sim)
}
