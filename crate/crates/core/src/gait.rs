//! Step-to-step planning: velocity propagation, foot placement and the
//! cubic swing-foot trajectory.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::RobotGeometry;
use crate::lipm::{evolve, time_constant, LipmParams, LipmState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaitError {
    #[error("invalid gait parameter: {0}")]
    InvalidParameter(String),
    #[error("time {t} s is outside the step [0, {t_step}] s")]
    OutOfRange { t: f64, t_step: f64 },
    #[error("placement {distance:.4} m from the hip exceeds reach {limit:.4} m")]
    OutOfReach { distance: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitParams {
    pub t_step: f64,
    pub t_m: f64,
    pub z_fm: f64,
    pub v_d: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self { t_step: 0.4, t_m: 0.2, z_fm: 0.222, v_d: 0.6 }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<(), GaitError> {
        if !(self.t_step > 0.0) {
            return Err(GaitError::InvalidParameter(format!("t_step = {} must be > 0", self.t_step)));
        }
        if !(self.t_m > 0.0 && self.t_m < self.t_step) {
            return Err(GaitError::InvalidParameter(format!(
                "t_m = {} must lie strictly inside (0, {})",
                self.t_m, self.t_step
            )));
        }
        if !(self.z_fm > 0.0) {
            return Err(GaitError::InvalidParameter(format!("z_fm = {} must be > 0", self.z_fm)));
        }
        if !self.v_d.is_finite() {
            return Err(GaitError::InvalidParameter("v_d must be finite".into()));
        }
        Ok(())
    }

    /// Normalised step time `T_step / T_c`.
    pub fn tau_s(&self, params: &LipmParams) -> f64 {
        self.t_step / time_constant(params)
    }
}

/// Boundary conditions of one swing phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepPlan {
    pub x_fs: f64,
    pub x_fe: f64,
    pub z_fs: f64,
    pub z_fe: f64,
    pub z_fm: f64,
    /// Touchdown position relative to the CoM at the end of the step.
    pub p_n: f64,
    pub xdot_s_next: f64,
    pub xdot_e_next: f64,
    pub step_index: u64,
}

/// Feet at the start of a step, in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Footholds {
    pub support_x: f64,
    pub swing: (f64, f64),
    pub ground_z: f64,
    pub step_index: u64,
}

/// End-of-step CoM velocity, which is also the next step's start velocity.
pub fn propagate_step_velocity(state: LipmState, params: &LipmParams, gait: &GaitParams) -> f64 {
    let tc = time_constant(params);
    let tau = gait.tau_s(params);
    state.x / tc * tau.sinh() + state.x_dot * tau.cosh()
}

/// Placement ahead of the CoM that turns start velocity `xdot_s_next` into
/// end velocity `xdot_e_target` over the next step.
pub fn foot_placement(
    xdot_s_next: f64,
    xdot_e_target: f64,
    params: &LipmParams,
    gait: &GaitParams,
) -> Result<f64, GaitError> {
    let tau = gait.tau_s(params);
    if !(tau > 0.0) {
        return Err(GaitError::InvalidParameter(format!("tau_s = {tau} must be > 0")));
    }
    let tc = time_constant(params);
    Ok(tc * xdot_s_next / tau.tanh() - tc * xdot_e_target / tau.sinh())
}

pub fn plan_step(
    state: LipmState,
    params: &LipmParams,
    gait: &GaitParams,
    feet: &Footholds,
    geom: &RobotGeometry,
) -> Result<StepPlan, GaitError> {
    gait.validate()?;
    let xdot_s_next = propagate_step_velocity(state, params, gait);
    let p_n = foot_placement(xdot_s_next, gait.v_d, params, gait)?;

    let distance = p_n.hypot(geom.h_c - geom.h_f);
    let limit = geom.max_reach();
    if !(distance <= limit) {
        return Err(GaitError::OutOfReach { distance, limit });
    }

    let com_end = feet.support_x + evolve(state, params, gait.t_step).x;
    Ok(StepPlan {
        x_fs: feet.swing.0,
        x_fe: com_end + p_n,
        z_fs: feet.swing.1,
        z_fe: feet.ground_z,
        z_fm: gait.z_fm.max(feet.swing.1).max(feet.ground_z),
        p_n,
        xdot_s_next,
        xdot_e_next: gait.v_d,
        step_index: feet.step_index,
    })
}

fn check_time(t: f64, gait: &GaitParams) -> Result<(), GaitError> {
    if !(0.0..=gait.t_step).contains(&t) {
        return Err(GaitError::OutOfRange { t, t_step: gait.t_step });
    }
    Ok(())
}

/// `3s^2 - 2s^3` and its derivative with respect to `s`.
fn smoothstep(s: f64) -> (f64, f64) {
    (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s))
}

pub fn foot_x(t: f64, plan: &StepPlan, gait: &GaitParams) -> Result<f64, GaitError> {
    check_time(t, gait)?;
    let (h, _) = smoothstep(t / gait.t_step);
    Ok(plan.x_fs + (plan.x_fe - plan.x_fs) * h)
}

/// Segment of the height profile active at `t`: start, end, local phase, duration.
fn z_segment(t: f64, plan: &StepPlan, gait: &GaitParams) -> (f64, f64, f64, f64) {
    if t <= gait.t_m {
        (plan.z_fs, plan.z_fm, t / gait.t_m, gait.t_m)
    } else {
        let span = gait.t_step - gait.t_m;
        (plan.z_fm, plan.z_fe, (t - gait.t_m) / span, span)
    }
}

pub fn foot_z(t: f64, plan: &StepPlan, gait: &GaitParams) -> Result<f64, GaitError> {
    check_time(t, gait)?;
    let (a, b, s, _) = z_segment(t, plan, gait);
    Ok(a + (b - a) * smoothstep(s).0)
}

pub fn foot_velocity(t: f64, plan: &StepPlan, gait: &GaitParams) -> Result<(f64, f64), GaitError> {
    check_time(t, gait)?;
    let vx = (plan.x_fe - plan.x_fs) * smoothstep(t / gait.t_step).1 / gait.t_step;
    let (a, b, s, span) = z_segment(t, plan, gait);
    Ok((vx, (b - a) * smoothstep(s).1 / span))
}
