//! Joint-level PD control with a filtered derivative, torso posture
//! correction and Ziegler-Nichols gain rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid controller parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown control type `{0}` (expected classic, piae, some_overshoot or no_overshoot)")]
    UnknownControlType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
}

impl PdGains {
    pub fn new(kp: f64, kd: f64) -> Result<Self, ControlError> {
        if !(kp >= 0.0 && kd >= 0.0) {
            return Err(ControlError::InvalidParameter(format!("gains must be >= 0, got kp={kp} kd={kd}")));
        }
        Ok(Self { kp, kd })
    }
}

/// First-order exponential smoother, one update per control tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowPassState {
    alpha: f64,
    pub y_prev: f64,
}

impl LowPassState {
    pub const DEFAULT_ALPHA: f64 = 0.075;

    pub fn new(alpha: f64) -> Result<Self, ControlError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ControlError::InvalidParameter(format!("alpha = {alpha} must be in (0, 1]")));
        }
        Ok(Self { alpha, y_prev: 0.0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for LowPassState {
    fn default() -> Self {
        Self { alpha: Self::DEFAULT_ALPHA, y_prev: 0.0 }
    }
}

pub fn filter_step(state: LowPassState, sample: f64) -> (LowPassState, f64) {
    let y = (1.0 - state.alpha) * state.y_prev + state.alpha * sample;
    (LowPassState { y_prev: y, ..state }, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdController {
    pub gains: PdGains,
    pub filter: LowPassState,
    torque_limit: f64,
    pub target: f64,
}

impl PdController {
    pub const DEFAULT_TORQUE_LIMIT: f64 = 100.0;

    pub fn new(gains: PdGains, filter: LowPassState, torque_limit: f64) -> Result<Self, ControlError> {
        if !(torque_limit > 0.0) {
            return Err(ControlError::InvalidParameter(format!("torque limit {torque_limit} must be > 0")));
        }
        Ok(Self { gains, filter, torque_limit, target: 0.0 })
    }

    pub fn with_gains(gains: PdGains) -> Self {
        Self { gains, filter: LowPassState::default(), torque_limit: Self::DEFAULT_TORQUE_LIMIT, target: 0.0 }
    }

    pub fn torque_limit(&self) -> f64 {
        self.torque_limit
    }
}

/// `kp (q_d - q) - kd * lowpass(q_dot)`, saturated at the torque limit.
pub fn pd_torque(ctrl: &mut PdController, q: f64, q_dot: f64) -> f64 {
    let (filter, q_dot_f) = filter_step(ctrl.filter, q_dot);
    ctrl.filter = filter;
    let u = ctrl.gains.kp * (ctrl.target - q) - ctrl.gains.kd * q_dot_f;
    u.clamp(-ctrl.torque_limit, ctrl.torque_limit)
}

/// Integrates a desired torso angular velocity into a hip-angle offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureController {
    pub gains: PdGains,
    pub phi_ref: f64,
    pub accumulator: f64,
    pub dt: f64,
}

impl PostureController {
    pub fn new(gains: PdGains, phi_ref: f64, dt: f64) -> Result<Self, ControlError> {
        if !(dt > 0.0) {
            return Err(ControlError::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
        Ok(Self { gains, phi_ref, accumulator: 0.0, dt })
    }
}

pub fn posture_adjust(ctrl: &mut PostureController, phi: f64, phi_dot: f64, q_hip_desired: f64) -> f64 {
    let omega_d = ctrl.gains.kp * (ctrl.phi_ref - phi) - ctrl.gains.kd * phi_dot;
    ctrl.accumulator += omega_d * ctrl.dt;
    q_hip_desired + ctrl.accumulator
}

pub fn reset_on_exchange(ctrl: PostureController) -> PostureController {
    PostureController { accumulator: 0.0, ..ctrl }
}

/// Rows of the Ziegler-Nichols table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZnRule {
    Classic,
    Piae,
    SomeOvershoot,
    NoOvershoot,
}

impl ZnRule {
    pub const ALL: [ZnRule; 4] = [ZnRule::Classic, ZnRule::Piae, ZnRule::SomeOvershoot, ZnRule::NoOvershoot];

    pub fn as_str(&self) -> &'static str {
        match self {
            ZnRule::Classic => "classic",
            ZnRule::Piae => "piae",
            ZnRule::SomeOvershoot => "some_overshoot",
            ZnRule::NoOvershoot => "no_overshoot",
        }
    }
}

impl fmt::Display for ZnRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZnRule {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        ZnRule::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| ControlError::UnknownControlType(s.to_string()))
    }
}

/// Proportional gain with integral and derivative times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZnGains {
    pub kp: f64,
    pub ti: f64,
    pub td: f64,
}

impl ZnGains {
    /// Derivative gain in parallel form, `kp * td`.
    pub fn kd(&self) -> f64 {
        self.kp * self.td
    }

    pub fn pd(&self) -> PdGains {
        PdGains { kp: self.kp, kd: self.kd() }
    }
}

pub fn zn_gains(k_u: f64, t_u: f64, rule: ZnRule) -> Result<ZnGains, ControlError> {
    if !(k_u > 0.0 && t_u > 0.0) {
        return Err(ControlError::InvalidParameter(format!("k_u = {k_u} and t_u = {t_u} must be > 0")));
    }
    let (kp, ti, td) = match rule {
        ZnRule::Classic => (0.6 * k_u, t_u / 2.0, t_u / 8.0),
        ZnRule::Piae => (0.7 * k_u, t_u / 2.5, 3.0 * t_u / 20.0),
        ZnRule::SomeOvershoot => (0.33 * k_u, t_u / 2.0, t_u / 3.0),
        ZnRule::NoOvershoot => (0.2 * k_u, t_u / 2.0, t_u / 3.0),
    };
    Ok(ZnGains { kp, ti, td })
}
