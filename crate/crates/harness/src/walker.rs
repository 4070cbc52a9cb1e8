//! Walking state machine: LIPM reference, swing-foot trajectory, IK and
//! joint PD loops, with support exchange on a timer.

use simbiped_core::control::{
    pd_torque, posture_adjust, reset_on_exchange, LowPassState, PdController, PdGains, PostureController,
};
use simbiped_core::gait::{
    foot_x, foot_z, plan_step, propagate_step_velocity, foot_placement, Footholds, GaitError, GaitParams, StepPlan,
};
use simbiped_core::kinematics::{clamp_joint_limits, ik_support, ik_swing, JointLimits, LegAngles};
use simbiped_core::lipm::{evolve, LipmParams, LipmState};
use simbiped_physics::{Robot, Side};

use crate::config::{DualHipGains, Gains};
use crate::HarnessError;

/// Fraction of the step after which swing-foot touchdown triggers an exchange.
pub const LATE_CONTACT_WINDOW: f64 = 0.8;

/// Largest change of a joint target between two ticks of the same step (rad).
pub const MAX_TARGET_STEP: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnkleMode {
    /// Point feet: no ankle joints.
    Absent,
    /// Ankles servoed to a fixed shin-relative angle (rad).
    Hold(f64),
    /// Ankles follow the level-foot IK solution.
    Track,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerConfig {
    pub gait: GaitParams,
    pub theta_d: f64,
    pub gains: Gains,
    pub dual_hip: DualHipGains,
    pub ankles: AnkleMode,
    pub filter_alpha: f64,
    pub torque_limit: f64,
    pub dt: f64,
    pub limits: JointLimits,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkerEvent {
    Exchange { t: f64, step_index: u64, early: bool },
    /// Swing foot touched down before the exchange window opened.
    EarlyContact { t: f64, step_index: u64 },
    /// Placement exceeded the leg's reach and was clamped.
    ReachClamped { t: f64, step_index: u64, distance: f64 },
    /// IK had no solution; the previous targets were held.
    IkHeld { t: f64, side: Side },
}

/// Joint targets of one leg for the current tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LegTargets {
    pub hip: f64,
    pub knee: f64,
    pub ankle: f64,
}

#[derive(Debug, Clone)]
pub struct WalkerState {
    pub support: Side,
    pub step_index: u64,
    /// Control ticks since the last exchange.
    pub tick_in_step: u64,
    pub plan: StepPlan,
    /// CoM relative to the support ankle at the start of the step.
    pub start: LipmState,
    /// World x of the support ankle.
    pub support_x: f64,
    pub posture: PostureController,
    /// One controller per joint in the robot's joint order.
    pub pds: Vec<PdController>,
    /// Targets fed to the PD loops on the last tick.
    pub targets: [LegTargets; 2],
    /// Last IK solution of each leg before posture and pitch terms.
    pub ik_targets: [LegTargets; 2],
    pub events: Vec<WalkerEvent>,
    pub config: WalkerConfig,
    lipm: LipmParams,
    swing_contact: bool,
}

impl WalkerState {
    pub fn time_in_step(&self) -> f64 {
        self.tick_in_step as f64 * self.config.dt
    }

    pub fn swing(&self) -> Side {
        self.support.other()
    }

    /// Current posture correction added to the support hip (rad).
    pub fn posture_offset(&self) -> f64 {
        self.posture.accumulator
    }
}

/// Joint PD controllers in the robot's joint order.
pub fn joint_controllers(
    robot: &Robot,
    gains: &Gains,
    filter_alpha: f64,
    torque_limit: f64,
) -> Result<Vec<PdController>, HarnessError> {
    let filter = LowPassState::new(filter_alpha).map_err(|e| HarnessError::Config(e.to_string()))?;
    let make = |g: PdGains| PdController::new(g, filter, torque_limit).map_err(|e| HarnessError::Config(e.to_string()));
    let mut pds = Vec::new();
    for leg in &robot.legs {
        pds.push(make(gains.hip)?);
        pds.push(make(gains.knee)?);
        if leg.ankle.is_some() {
            pds.push(make(gains.ankle)?);
        }
    }
    Ok(pds)
}

/// Sole position of a leg, assuming a level foot.
fn sole(robot: &Robot, side: Side) -> (f64, f64) {
    let a = robot.ankle_position(side);
    (a.x, a.y - robot.geometry.h_f)
}

impl WalkerState {
    /// Starts a walk with `robot`'s current pose, supporting on `support`.
    pub fn new(robot: &Robot, support: Side, config: WalkerConfig) -> Result<Self, HarnessError> {
        let lipm = LipmParams::with_height(robot.geometry.h_c).map_err(|e| HarnessError::Config(e.to_string()))?;
        let posture = PostureController::new(config.gains.posture, config.theta_d, config.dt)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let pds = joint_controllers(robot, &config.gains, config.filter_alpha, config.torque_limit)?;
        let mut state = Self {
            support,
            step_index: 0,
            tick_in_step: 0,
            plan: StepPlan::default(),
            start: LipmState::default(),
            support_x: 0.0,
            posture,
            pds,
            targets: [LegTargets::default(); 2],
            ik_targets: [LegTargets::default(); 2],
            events: Vec::new(),
            config,
            lipm,
            swing_contact: true,
        };
        state.begin_step(robot, 0.0);
        Ok(state)
    }

    /// Re-anchors the pendulum on the current support leg and plans the swing.
    fn begin_step(&mut self, robot: &Robot, t: f64) {
        self.support_x = robot.ankle_position(self.support).x;
        let com = robot.world.com_state();
        self.start = LipmState::new(com.x - self.support_x, com.vx);
        let swing = sole(robot, self.swing());
        let feet = Footholds { support_x: self.support_x, swing: (swing.0, swing.1.max(0.0)), ground_z: 0.0, step_index: self.step_index };
        self.plan = match plan_step(self.start, &self.lipm, &self.config.gait, &feet, &robot.geometry) {
            Ok(plan) => plan,
            Err(GaitError::OutOfReach { distance, .. }) => {
                self.events.push(WalkerEvent::ReachClamped { t, step_index: self.step_index, distance });
                self.clamped_plan(&feet, robot)
            }
            Err(e) => panic!("gait parameters were validated: {e}"),
        };
        self.tick_in_step = 0;
        self.swing_contact = true;
    }

    /// Plan with the placement pulled back onto the reach boundary.
    fn clamped_plan(&self, feet: &Footholds, robot: &Robot) -> StepPlan {
        let g = &robot.geometry;
        let gait = &self.config.gait;
        let v_next = propagate_step_velocity(self.start, &self.lipm, gait);
        let p = foot_placement(v_next, gait.v_d, &self.lipm, gait).expect("validated gait");
        let h = g.h_c - g.h_f;
        let p_max = (g.max_reach().powi(2) - h * h).max(0.0).sqrt() * (1.0 - 1e-9);
        let p = p.clamp(-p_max, p_max);
        StepPlan {
            x_fs: feet.swing.0,
            x_fe: feet.support_x + evolve(self.start, &self.lipm, gait.t_step).x + p,
            z_fs: feet.swing.1,
            z_fe: feet.ground_z,
            z_fm: gait.z_fm.max(feet.swing.1).max(feet.ground_z),
            p_n: p,
            xdot_s_next: v_next,
            xdot_e_next: gait.v_d,
            step_index: feet.step_index,
        }
    }

    fn exchange(&mut self, robot: &Robot, t: f64, early: bool) {
        self.support = self.support.other();
        self.step_index += 1;
        self.posture = reset_on_exchange(self.posture);
        self.events.push(WalkerEvent::Exchange { t, step_index: self.step_index, early });
        self.begin_step(robot, t);
    }

    fn leg_targets(&mut self, side: Side, angles: Option<LegAngles>, t: f64) -> LegTargets {
        let Some(a) = angles else {
            self.events.push(WalkerEvent::IkHeld { t, side });
            return self.ik_targets[side.index()];
        };
        let a = clamp_joint_limits(a, &self.config.limits);
        let ankle = match self.config.ankles {
            AnkleMode::Absent => 0.0,
            AnkleMode::Hold(q) => q,
            AnkleMode::Track => a.xi,
        };
        LegTargets { hip: a.gamma, knee: a.theta, ankle }
    }
}

fn slew(prev: LegTargets, next: LegTargets) -> LegTargets {
    let lim = |p: f64, n: f64| n.clamp(p - MAX_TARGET_STEP, p + MAX_TARGET_STEP);
    LegTargets { hip: lim(prev.hip, next.hip), knee: lim(prev.knee, next.knee), ankle: lim(prev.ankle, next.ankle) }
}

/// Exchange rule: the timer always wins; swing touchdown counts once the
/// step is at least [`LATE_CONTACT_WINDOW`] through.
pub fn detect_exchange(time_in_step: f64, swing_contact: bool, gait: &GaitParams) -> bool {
    const EPS: f64 = 1e-9;
    time_in_step >= gait.t_step - EPS || (swing_contact && time_in_step >= LATE_CONTACT_WINDOW * gait.t_step - EPS)
}

/// Fallen when the CoM drops below half the nominal height or the torso
/// touches the ground.
pub fn detect_fall(robot: &Robot) -> bool {
    robot.world.com_state().z < 0.5 * robot.geometry.h_c || robot.world.contacts().touching(robot.torso)
}

/// One control tick: handles exchange, computes joint targets, returns the
/// torque commands in joint order.
pub fn walker_tick(state: &mut WalkerState, robot: &Robot, t: f64) -> Vec<f64> {
    let gait = state.config.gait;
    let contacts = robot.foot_contacts();
    let swing_contact = contacts[state.swing().index()];
    let rising = swing_contact && !state.swing_contact;
    state.swing_contact = swing_contact;
    let phase = state.time_in_step();
    if detect_exchange(phase, swing_contact, &gait) {
        state.exchange(robot, t, phase < gait.t_step - 1e-9);
    } else if rising && phase > 0.0 {
        state.events.push(WalkerEvent::EarlyContact { t, step_index: state.step_index });
    }

    let phase = state.time_in_step().min(gait.t_step);
    let x_t = evolve(state.start, &state.lipm, phase).x;
    let geom = robot.geometry;
    let support = ik_support(x_t, &geom).ok();
    let fx = foot_x(phase, &state.plan, &gait).expect("phase within step");
    let fz = foot_z(phase, &state.plan, &gait).expect("phase within step");
    let swing = ik_swing(x_t, (fx - state.support_x, fz), &geom).ok();

    let (s, w) = (state.support, state.swing());
    let mut st = state.leg_targets(s, support, t);
    let mut sw = state.leg_targets(w, swing, t);
    state.ik_targets[s.index()] = st;
    state.ik_targets[w.index()] = sw;
    let (phi, phi_dot) = robot.torso_pitch();
    st.hip = posture_adjust(&mut state.posture, phi, phi_dot, st.hip);
    // IK angles are from the vertical; the swing hip is read against the torso.
    sw.hip += phi;
    if state.tick_in_step > 0 {
        st = slew(state.targets[s.index()], st);
        sw = slew(state.targets[w.index()], sw);
    }
    state.targets[s.index()] = st;
    state.targets[w.index()] = sw;

    let dual = state.config.dual_hip;
    let mut torques = Vec::with_capacity(state.pds.len());
    let mut k = 0;
    for side in [Side::Left, Side::Right] {
        let leg = robot.leg(side);
        let tg = state.targets[side.index()];
        let mut joints = vec![(leg.hip, tg.hip), (leg.knee, tg.knee)];
        if let Some(a) = leg.ankle {
            joints.push((a, tg.ankle));
        }
        for (i, (joint, target)) in joints.into_iter().enumerate() {
            let pd = &mut state.pds[k];
            if i == 0 && dual.enabled {
                pd.gains = if side == s { dual.support } else { dual.swing };
            }
            pd.target = target;
            let (q, q_dot) = robot.world.joint_readout(joint).expect("robot joint");
            torques.push(pd_torque(pd, q, q_dot));
            k += 1;
        }
    }
    state.tick_in_step += 1;
    torques
}
