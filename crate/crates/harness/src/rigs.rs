//! Joint tuning rigs: the robot with some bodies pinned, one joint type
//! following a sine target and the other joints locked at their pose.
//!
//! Pinning uses static bodies. The upside-down rigs keep the robot upright
//! and flip gravity instead, which is the same load case without a support
//! structure.

use std::f64::consts::PI;

use nalgebra::Vector2;
use simbiped_core::kinematics::{fk_leg, LegAngles, RobotGeometry};
use simbiped_physics::{build_robot, BodyId, FeetKind, JointId, InitialPose, MotorLimits, Robot, Side, WorldConfig};

use crate::config::{ScenarioConfig, ScenarioId};
use crate::HarnessError;

/// Which joint of each leg a rig exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigJoint {
    Hip,
    Knee,
    Ankle,
}

/// Hip height of the rigs that hang in the air (m).
const RIG_HEIGHT: f64 = 3.0;

/// Joint angles a rig holds, and the centre of the sine on the exercised joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigSetup {
    pub joint: RigJoint,
    pub gravity: f64,
    /// Resting angles (hip relative to the torso, knee, ankle).
    pub pose: LegAngles,
    pub sine_centre: f64,
    pub pinned: RigPins,
}

/// Bodies held fixed in a rig.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RigPins {
    pub torso: bool,
    pub thighs: bool,
    pub shins: bool,
    pub feet: bool,
}

pub fn rig_setup(id: ScenarioId) -> Option<RigSetup> {
    let g = 9.81;
    let straight = LegAngles::new(0.0, PI, 0.0);
    let setup = match id {
        ScenarioId::TuneHipAir => RigSetup {
            joint: RigJoint::Hip,
            gravity: 0.0,
            pose: straight,
            sine_centre: 0.0,
            pinned: RigPins { torso: true, thighs: false, shins: false, feet: false },
        },
        ScenarioId::TuneHipGround => RigSetup {
            joint: RigJoint::Hip,
            gravity: -g,
            pose: straight,
            sine_centre: 0.0,
            pinned: RigPins { torso: false, thighs: false, shins: false, feet: true },
        },
        // thighs pointing straight ahead, shins at a right angle to them
        ScenarioId::TuneKnee => RigSetup {
            joint: RigJoint::Knee,
            gravity: g,
            pose: LegAngles::new(PI / 2.0, PI / 2.0, 0.0),
            sine_centre: PI / 2.0,
            pinned: RigPins { torso: true, thighs: true, shins: false, feet: false },
        },
        ScenarioId::TuneAnkle => RigSetup {
            joint: RigJoint::Ankle,
            gravity: g,
            pose: straight,
            sine_centre: 0.0,
            pinned: RigPins { torso: true, thighs: true, shins: true, feet: false },
        },
        _ => return None,
    };
    Some(setup)
}

/// Puts one leg into `angles` hanging from the current hip position.
pub fn pose_leg(robot: &mut Robot, side: Side, angles: &LegAngles) -> Result<(), HarnessError> {
    let geom = robot.geometry;
    let hip = robot.hip_position();
    let pts = fk_leg(angles, &geom, (hip.x, hip.y));
    let mid = |a: (f64, f64), b: (f64, f64)| Vector2::new(0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let leg = *robot.leg(side);
    let mut parts = vec![
        (leg.thigh, mid((hip.x, hip.y), pts.knee), angles.thigh_angle()),
        (leg.shin, mid(pts.knee, pts.ankle), angles.shin_angle()),
    ];
    if let Some(foot) = leg.foot {
        parts.push((foot, mid(pts.ankle, pts.sole), angles.foot_pitch()));
    }
    for (id, pos, angle) in parts {
        let b = robot.world.body_mut(id)?;
        b.position = pos;
        b.angle = angle;
        b.velocity = Vector2::zeros();
        b.omega = 0.0;
    }
    Ok(())
}

/// Joints of one leg with the rig role each plays.
pub fn rig_joints(robot: &Robot, side: Side) -> Vec<(RigJoint, JointId)> {
    let leg = robot.leg(side);
    let mut joints = vec![(RigJoint::Hip, leg.hip), (RigJoint::Knee, leg.knee)];
    if let Some(a) = leg.ankle {
        joints.push((RigJoint::Ankle, a));
    }
    joints
}

fn pin(robot: &mut Robot, id: BodyId) -> Result<(), HarnessError> {
    let b = robot.world.body_mut(id)?;
    *b = b.clone().fixed();
    Ok(())
}

/// Builds the robot for a tuning rig.
pub fn build_rig(config: &ScenarioConfig, setup: &RigSetup) -> Result<Robot, HarnessError> {
    let world = WorldConfig { gravity: setup.gravity, dt: config.dt, ..WorldConfig::default() };
    let geom = RobotGeometry::default();
    let motors = MotorLimits { torque: config.torque_limit, ..MotorLimits::default() };
    let mut robot = build_robot(&geom, FeetKind::Actuated, &InitialPose::default(), world, &motors)?;

    let hip_height = if setup.pinned.feet { 2.0 * geom.leg_length() + geom.h_f } else { RIG_HEIGHT };
    let torso = robot.torso;
    let t = robot.world.body_mut(torso)?;
    t.position = Vector2::new(0.0, hip_height);
    t.angle = 0.0;
    for side in [Side::Left, Side::Right] {
        pose_leg(&mut robot, side, &setup.pose)?;
    }

    for side in [Side::Left, Side::Right] {
        for (kind, id) in rig_joints(&robot, side) {
            if kind != setup.joint {
                let (q, _) = robot.world.joint_readout(id)?;
                let j = robot.world.joint_mut(id)?;
                *j = j.clone().with_limits(q, q);
            }
        }
    }

    let p = setup.pinned;
    if p.torso {
        pin(&mut robot, torso)?;
    }
    for leg in robot.legs {
        for (flag, id) in [(p.thighs, Some(leg.thigh)), (p.shins, Some(leg.shin)), (p.feet, leg.foot)] {
            if let (true, Some(id)) = (flag, id) {
                pin(&mut robot, id)?;
            }
        }
    }
    Ok(robot)
}

/// Sine target at time `t`.
pub fn sine_target(config: &ScenarioConfig, centre: f64, t: f64) -> f64 {
    centre + config.sine.amplitude * (2.0 * PI * config.sine.frequency * t).sin()
}
