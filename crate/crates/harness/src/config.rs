//! Scenario configuration: JSON documents layered over per-scenario presets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use simbiped_core::control::{LowPassState, PdController, PdGains};
use simbiped_core::gait::GaitParams;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    WalkPointFeet,
    WalkNoAnkle,
    WalkFull,
    TuneHipAir,
    TuneHipGround,
    TuneKnee,
    TuneAnkle,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::WalkPointFeet,
        ScenarioId::WalkNoAnkle,
        ScenarioId::WalkFull,
        ScenarioId::TuneHipAir,
        ScenarioId::TuneHipGround,
        ScenarioId::TuneKnee,
        ScenarioId::TuneAnkle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::WalkPointFeet => "walk_point_feet",
            ScenarioId::WalkNoAnkle => "walk_no_ankle",
            ScenarioId::WalkFull => "walk_full",
            ScenarioId::TuneHipAir => "tune_hip_air",
            ScenarioId::TuneHipGround => "tune_hip_ground",
            ScenarioId::TuneKnee => "tune_knee",
            ScenarioId::TuneAnkle => "tune_ankle",
        }
    }

    pub fn is_walk(&self) -> bool {
        matches!(self, ScenarioId::WalkPointFeet | ScenarioId::WalkNoAnkle | ScenarioId::WalkFull)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub hip: PdGains,
    pub knee: PdGains,
    pub ankle: PdGains,
    /// Torso posture loop producing a hip-angle rate.
    pub posture: PdGains,
}

/// Separate hip gains for the support and swing legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualHipGains {
    pub enabled: bool,
    pub support: PdGains,
    pub swing: PdGains,
}

/// Sine target of the tuning rigs and the window the RMS error is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineTarget {
    /// rad
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
    /// Settling time excluded from the error (s).
    pub transient: f64,
    /// Length of the scoring window after the transient (s).
    pub window: f64,
}

impl Default for SineTarget {
    fn default() -> Self {
        Self { amplitude: 0.5, frequency: 0.5, transient: 2.5, window: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    /// Initial CoM offset ahead of the support ankle (m).
    pub x_init: f64,
    /// Desired forward torso pitch (rad).
    pub theta_d: f64,
    pub gains: Gains,
    pub dual_hip: DualHipGains,
    pub gait: GaitParams,
    /// s
    pub duration: f64,
    /// Control and physics step (s).
    pub dt: f64,
    /// Seeds a small jitter of the initial pose; `None` keeps it exact.
    pub seed: Option<u64>,
    /// Telemetry CSV destination; `None` skips writing.
    pub output: Option<PathBuf>,
    pub sine: SineTarget,
    /// Fixed shin-relative ankle target of the no-ankle-control variant (rad).
    pub ankle_hold: f64,
    pub filter_alpha: f64,
    /// N·m
    pub torque_limit: f64,
    /// Walking runs stop once the CoM has covered this distance (m).
    pub distance_target: f64,
}

fn gains(kp: f64, kd: f64) -> PdGains {
    PdGains { kp, kd }
}

impl ScenarioConfig {
    /// Defaults for one scenario.
    pub fn preset(scenario: ScenarioId) -> Self {
        let walk_gains = Gains {
            hip: gains(48.5, 0.85),
            knee: gains(200.0, 4.0),
            ankle: gains(20.0, 1.2),
            posture: gains(1.5, 0.1),
        };
        let (theta_d, hip, duration) = match scenario {
            ScenarioId::WalkPointFeet => (0.3, walk_gains.hip, 60.0),
            ScenarioId::WalkNoAnkle => (0.2, walk_gains.hip, 60.0),
            ScenarioId::WalkFull => (0.1, walk_gains.hip, 60.0),
            ScenarioId::TuneHipAir => (0.0, gains(100.5, 5.0), 12.5),
            ScenarioId::TuneHipGround => (0.0, gains(22.5, 0.85), 12.5),
            ScenarioId::TuneKnee | ScenarioId::TuneAnkle => (0.0, walk_gains.hip, 12.5),
        };
        Self {
            scenario,
            x_init: 0.173,
            theta_d,
            gains: Gains { hip, ..walk_gains },
            dual_hip: DualHipGains { enabled: false, support: gains(100.5, 5.0), swing: gains(22.5, 0.85) },
            gait: GaitParams::default(),
            duration,
            dt: 1.0 / 60.0,
            seed: None,
            output: None,
            sine: SineTarget::default(),
            ankle_hold: 0.71,
            filter_alpha: LowPassState::DEFAULT_ALPHA,
            torque_limit: PdController::DEFAULT_TORQUE_LIMIT,
            distance_target: 100.0,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |what: &str| Err(HarnessError::Config(what.to_string()));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be > 0");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if !(self.torque_limit > 0.0) {
            return bad("torque_limit must be > 0");
        }
        if !(self.x_init.is_finite() && self.theta_d.is_finite()) {
            return bad("x_init and theta_d must be finite");
        }
        let all = [self.gains.hip, self.gains.knee, self.gains.ankle, self.gains.posture];
        let dual = [self.dual_hip.support, self.dual_hip.swing];
        if all.iter().chain(&dual).any(|g| PdGains::new(g.kp, g.kd).is_err()) {
            return bad("gains must be >= 0");
        }
        if !(self.sine.amplitude >= 0.0 && self.sine.frequency >= 0.0 && self.sine.transient >= 0.0) {
            return bad("sine amplitude, frequency and transient must be >= 0");
        }
        LowPassState::new(self.filter_alpha).map_err(|e| HarnessError::Config(e.to_string()))?;
        self.gait.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    /// Number of control ticks in the run.
    pub fn ticks(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Parses a JSON document. Fields left out take the preset of the named
    /// scenario (`walk_full` when no scenario is given).
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let value: Value = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Self::from_value(value, &[])
    }

    /// Like [`from_json`](Self::from_json), then applies `key=value`
    /// overrides with dotted keys such as `gains.hip.kp=50`.
    pub fn from_json_with_overrides(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let value: Value = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Self::from_value(value, overrides)
    }

    fn from_value(user: Value, overrides: &[String]) -> Result<Self, HarnessError> {
        let Value::Object(mut user) = user else {
            return Err(HarnessError::Config("config must be a JSON object".into()));
        };
        for o in overrides {
            apply_override(&mut user, o)?;
        }
        let scenario = match user.get("scenario") {
            None => ScenarioId::WalkFull,
            Some(Value::String(s)) => s.parse()?,
            Some(other) => return Err(HarnessError::Config(format!("scenario must be a string, got {other}"))),
        };
        let mut base = serde_json::to_value(Self::preset(scenario)).expect("preset serialises");
        merge(&mut base, Value::Object(user));
        let config: Self = serde_json::from_value(base).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_json()).map_err(|e| HarnessError::io(path, e))
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(ScenarioId::WalkFull)
    }
}

/// Recursively overlays `over` onto `base`; objects merge, everything else replaces.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Sets `a.b.c=value` inside a JSON object. The value is read as JSON when
/// it parses and as a plain string otherwise.
pub fn apply_override(root: &mut Map<String, Value>, spec: &str) -> Result<(), HarnessError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override `{spec}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!("override key `{key}` is malformed")));
    }
    let mut node = root;
    for p in &parts[..parts.len() - 1] {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = entry
            .as_object_mut()
            .ok_or_else(|| HarnessError::Config(format!("override key `{key}`: `{p}` is not an object")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
