use std::f64::consts::PI;

use nalgebra::Vector2;
use simbiped_core::kinematics::{ik_support, ik_swing, LegAngles, RobotGeometry};

use crate::body::{BodyId, RigidBody};
use crate::joint::{JointId, RevoluteJoint};
use crate::world::{World, WorldConfig};
use crate::PhysicsError;

/// Friction coefficient of every robot part.
pub const PART_FRICTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeetKind {
    /// Four joints; the shins touch the ground directly.
    None,
    /// Feet attached through unpowered ankles.
    Passive,
    /// Feet attached through motorised ankles.
    Actuated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorLimits {
    pub torque: f64,
    pub hip_speed: f64,
    pub knee_speed: f64,
    pub ankle_speed: f64,
}

impl Default for MotorLimits {
    fn default() -> Self {
        Self { torque: 100.0, hip_speed: 4.0, knee_speed: 6.0, ankle_speed: 4.0 }
    }
}

/// Standing pose used to place the bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPose {
    /// Hip position ahead of the support ankle (m).
    pub x_init: f64,
    /// Swing-foot sole position relative to the support ankle (m).
    pub swing_x: f64,
    pub support: Side,
}

impl Default for InitialPose {
    fn default() -> Self {
        Self { x_init: 0.173, swing_x: 0.0, support: Side::Left }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegHandles {
    pub thigh: BodyId,
    pub shin: BodyId,
    pub foot: Option<BodyId>,
    pub hip: JointId,
    pub knee: JointId,
    pub ankle: Option<JointId>,
}

impl LegHandles {
    /// Body that meets the ground at the end of the leg.
    pub fn contact_body(&self) -> BodyId {
        self.foot.unwrap_or(self.shin)
    }

    pub fn joints(&self) -> Vec<JointId> {
        let mut j = vec![self.hip, self.knee];
        j.extend(self.ankle);
        j
    }
}

#[derive(Debug, Clone)]
pub struct Robot {
    pub world: World,
    pub torso: BodyId,
    pub legs: [LegHandles; 2],
    pub geometry: RobotGeometry,
    pub feet: FeetKind,
}

impl Robot {
    pub fn leg(&self, side: Side) -> &LegHandles {
        &self.legs[side.index()]
    }

    /// Joints in telemetry order: left hip, knee, ankle, then right.
    pub fn joint_order(&self) -> Vec<JointId> {
        self.legs.iter().flat_map(|l| l.joints()).collect()
    }

    pub fn joint_names(&self) -> Vec<String> {
        self.joint_order().iter().map(|j| self.world.joints()[j.0].name.clone()).collect()
    }

    /// Forward-positive torso pitch.
    pub fn torso_pitch(&self) -> (f64, f64) {
        let t = &self.world.bodies()[self.torso.0];
        (-t.angle, -t.omega)
    }

    pub fn foot_contacts(&self) -> [bool; 2] {
        let c = self.world.contacts();
        [c.touching(self.legs[0].contact_body()), c.touching(self.legs[1].contact_body())]
    }

    /// Ground position of the ankle (or shin tip) of one leg.
    pub fn ankle_position(&self, side: Side) -> Vector2<f64> {
        let shin = &self.world.bodies()[self.leg(side).shin.0];
        shin.world_point(Vector2::new(0.0, -self.geometry.l_shin / 2.0))
    }

    pub fn hip_position(&self) -> Vector2<f64> {
        self.world.bodies()[self.torso.0].position
    }
}

fn direction(angle: f64) -> Vector2<f64> {
    Vector2::new(angle.sin(), -angle.cos())
}

pub fn build_robot(
    geom: &RobotGeometry,
    feet: FeetKind,
    pose: &InitialPose,
    config: WorldConfig,
    motors: &MotorLimits,
) -> Result<Robot, PhysicsError> {
    geom.validate().map_err(|e| PhysicsError::Build(e.to_string()))?;
    let has_feet = feet != FeetKind::None;
    if has_feet != geom.has_feet() {
        return Err(PhysicsError::Build(format!(
            "feet kind {feet:?} does not match foot height h_f = {}",
            geom.h_f
        )));
    }

    let support = ik_support(pose.x_init, geom).map_err(|e| PhysicsError::Build(e.to_string()))?;
    let swing = ik_swing(pose.x_init, (pose.swing_x, 0.0), geom).map_err(|e| PhysicsError::Build(e.to_string()))?;
    let mut angles = [support, swing];
    if pose.support == Side::Right {
        angles.swap(0, 1);
    }

    let hip = Vector2::new(pose.x_init, geom.h_c);
    let mut world = World::new(config)?;
    let m = geom.masses;
    let torso = world.add_body(
        RigidBody::dynamic_box("torso", geom.torso_size, m.torso, hip, 0.0)?.with_friction(PART_FRICTION),
    );

    let mut legs = Vec::with_capacity(2);
    for (side, a) in [Side::Left, Side::Right].into_iter().zip(angles) {
        legs.push(add_leg(&mut world, geom, torso, hip, &a, side, feet, motors)?);
    }

    // Rest the lowest corner exactly on the ground.
    let lowest = world
        .bodies()
        .iter()
        .flat_map(|b| b.local_corners().map(|c| b.world_point(c).y))
        .fold(f64::INFINITY, f64::min);
    for i in 0..world.bodies().len() {
        world.body_mut(BodyId(i))?.position.y -= lowest;
    }

    Ok(Robot { world, torso, legs: [legs[0], legs[1]], geometry: *geom, feet })
}

#[allow(clippy::too_many_arguments)]
fn add_leg(
    world: &mut World,
    geom: &RobotGeometry,
    torso: BodyId,
    hip: Vector2<f64>,
    a: &LegAngles,
    side: Side,
    feet: FeetKind,
    motors: &MotorLimits,
) -> Result<LegHandles, PhysicsError> {
    let m = geom.masses;
    let name = side.name();
    let (l1, l2) = (geom.l_thigh, geom.l_shin);

    let knee_pos = hip + l1 * direction(a.thigh_angle());
    let ankle_pos = knee_pos + l2 * direction(a.shin_angle());
    let thigh = world.add_body(
        RigidBody::dynamic_box(
            format!("{name}_thigh"),
            (geom.thigh_width, l1),
            m.thigh,
            hip + 0.5 * l1 * direction(a.thigh_angle()),
            a.thigh_angle(),
        )?
        .with_friction(PART_FRICTION),
    );
    let shin = world.add_body(
        RigidBody::dynamic_box(
            format!("{name}_shin"),
            (geom.shin_width, l2),
            m.shin,
            knee_pos + 0.5 * l2 * direction(a.shin_angle()),
            a.shin_angle(),
        )?
        .with_friction(PART_FRICTION),
    );

    let hip_joint = world.add_joint(
        RevoluteJoint::new(format!("{name}_hip"), torso, thigh, Vector2::zeros(), Vector2::new(0.0, l1 / 2.0))
            .with_motor(motors.torque, motors.hip_speed),
    )?;
    let knee_joint = world.add_joint(
        RevoluteJoint::new(
            format!("{name}_knee"),
            thigh,
            shin,
            Vector2::new(0.0, -l1 / 2.0),
            Vector2::new(0.0, l2 / 2.0),
        )
        .with_reference(-PI)
        .with_limits(0.1, PI)
        .with_motor(motors.torque, motors.knee_speed),
    )?;

    let (foot, ankle) = if feet == FeetKind::None {
        (None, None)
    } else {
        let hf = geom.h_f;
        let foot = world.add_body(
            RigidBody::dynamic_box(
                format!("{name}_foot"),
                (geom.foot_length, hf),
                m.foot,
                ankle_pos + 0.5 * hf * direction(a.foot_pitch()),
                a.foot_pitch(),
            )?
            .with_friction(PART_FRICTION),
        );
        let mut joint = RevoluteJoint::new(
            format!("{name}_ankle"),
            shin,
            foot,
            Vector2::new(0.0, -l2 / 2.0),
            Vector2::new(0.0, hf / 2.0),
        );
        if feet == FeetKind::Actuated {
            joint = joint.with_motor(motors.torque, motors.ankle_speed);
        }
        (Some(foot), Some(world.add_joint(joint)?))
    };

    Ok(LegHandles { thigh, shin, foot, hip: hip_joint, knee: knee_joint, ankle })
}
