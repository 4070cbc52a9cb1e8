use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::Vector2;
use simbiped_core::kinematics::RobotGeometry;
use simbiped_physics::*;

fn world(gravity: f64) -> World {
    World::new(WorldConfig { gravity, ..WorldConfig::default() }).unwrap()
}

fn resting_box(w: &mut World, x: f64, size: (f64, f64), mass: f64) -> BodyId {
    w.add_body(RigidBody::dynamic_box("box", size, mass, Vector2::new(x, size.1 / 2.0), 0.0).unwrap())
}

fn standing_robot(feet: FeetKind, geom: &RobotGeometry) -> Robot {
    let pose = InitialPose { x_init: 0.0, swing_x: 0.0, support: Side::Left };
    build_robot(geom, feet, &pose, WorldConfig::default(), &MotorLimits::default()).unwrap()
}

#[test]
fn free_fall_single_step() {
    let mut w = world(-9.81);
    let b = w.add_body(RigidBody::dynamic_box("b", (0.2, 0.2), 1.0, Vector2::new(0.0, 5.0), 0.0).unwrap());
    w.step(&[]).unwrap();
    let body = w.body(b).unwrap();
    assert_relative_eq!(body.velocity.y, -9.81 / 60.0, epsilon = 1e-15);
    assert_eq!(body.velocity.x, 0.0);
    assert!(w.contacts().is_empty());
}

#[test]
fn resting_box_stays_put() {
    let mut w = world(-9.81);
    let b = resting_box(&mut w, 0.3, (0.38, 0.0933), 0.5);
    let start = w.body(b).unwrap().clone();
    for _ in 0..600 {
        w.step(&[]).unwrap();
    }
    let end = w.body(b).unwrap();
    assert!((end.position - start.position).norm() < 1e-9, "{:?}", end.position);
    assert!((end.angle - start.angle).abs() < 1e-9);
}

#[test]
fn resting_impulse_balances_weight() {
    let mut w = world(-9.81);
    let b = resting_box(&mut w, 0.0, (0.4, 0.1), 0.7);
    for _ in 0..30 {
        w.step(&[]).unwrap();
    }
    let dt = w.config().dt;
    let sum = w.contacts().total_normal_impulse();
    assert!((sum - 0.7 * 9.81 * dt).abs() < 0.05 * 0.7 * 9.81 * dt, "impulse {sum}");
    assert!(w.contacts().touching(b));
}

#[test]
fn jointed_stance_impulse_balances_weight() {
    // an L-shaped pair welded by a locked joint
    let mut w = world(-9.81);
    let base = resting_box(&mut w, 0.0, (0.4, 0.1), 0.3);
    let post = w.add_body(RigidBody::dynamic_box("post", (0.05, 0.5), 0.2, Vector2::new(0.0, 0.35), 0.0).unwrap());
    w.add_joint(
        RevoluteJoint::new("weld", base, post, Vector2::new(0.0, 0.05), Vector2::new(0.0, -0.25)).with_limits(0.0, 0.0),
    )
    .unwrap();
    for _ in 0..120 {
        w.step(&[]).unwrap();
    }
    let dt = w.config().dt;
    let weight = 0.5 * 9.81 * dt;
    let sum = w.contacts().total_normal_impulse();
    assert!((sum - weight).abs() < 0.05 * weight, "impulse {sum} vs {weight}");
}

#[test]
fn internal_torques_conserve_momentum() {
    let mut w = world(0.0);
    let a = w.add_body(RigidBody::dynamic_box("a", (0.3, 0.3), 0.42, Vector2::new(0.0, 3.0), 0.0).unwrap());
    let b = w.add_body(RigidBody::dynamic_box("b", (0.09, 0.57), 0.05, Vector2::new(0.0, 2.715), 0.0).unwrap());
    w.body_mut(a).unwrap().velocity = Vector2::new(0.3, -0.1);
    w.add_joint(RevoluteJoint::new("j", a, b, Vector2::zeros(), Vector2::new(0.0, 0.285)).with_motor(100.0, 4.0))
        .unwrap();
    let p0 = w.linear_momentum();
    for i in 0..300 {
        let u = 20.0 * (i as f64 * 0.1).sin();
        w.step(&[u]).unwrap();
        assert!((w.linear_momentum() - p0).norm() < 1e-9);
    }
}

#[test]
fn pendulum_energy_drift_is_small() {
    let mut w = world(-9.81);
    let anchor = w.add_body(
        RigidBody::dynamic_box("anchor", (0.1, 0.1), 1.0, Vector2::new(0.0, 2.0), 0.0).unwrap().fixed(),
    );
    let bob = w.add_body(
        RigidBody::dynamic_box("bob", (0.05, 1.0), 1.0, Vector2::new(0.0, 1.5), 0.0).unwrap().without_ground_contact(),
    );
    w.add_joint(RevoluteJoint::new("pivot", anchor, bob, Vector2::zeros(), Vector2::new(0.0, 0.5))).unwrap();
    w.body_mut(bob).unwrap().omega = 2.0;
    w.body_mut(bob).unwrap().velocity = Vector2::new(1.0, 0.0);
    let e0 = w.mechanical_energy();
    let mut worst: f64 = 0.0;
    for _ in 0..600 {
        w.step(&[]).unwrap();
        worst = worst.max((w.mechanical_energy() - e0).abs());
    }
    // measured against the energy above the hanging rest state, not the ground datum
    let swing = e0 - 1.0 * 9.81 * 1.5;
    assert_relative_eq!(swing, 0.5 * 1.0 + 0.5 * (1.0 + 0.05 * 0.05) / 12.0 * 4.0, epsilon = 1e-12);
    assert!(worst / swing < 0.01, "drift {:.4}%", 100.0 * worst / swing);
}

#[test]
fn joint_velocity_matches_angle_difference() {
    // the identity is per integration step, so run without sub-stepping
    let mut w = World::new(WorldConfig { gravity: 0.0, substeps: 1, ..WorldConfig::default() }).unwrap();
    let a = w.add_body(RigidBody::dynamic_box("a", (0.3, 0.3), 0.42, Vector2::new(0.0, 3.0), 0.0).unwrap());
    let b = w.add_body(RigidBody::dynamic_box("b", (0.09, 0.57), 0.05, Vector2::new(0.0, 3.0), 0.0).unwrap());
    let j = w
        .add_joint(RevoluteJoint::new("axle", a, b, Vector2::zeros(), Vector2::zeros()).with_motor(100.0, 6.0))
        .unwrap();
    let dt = w.config().dt;
    let (mut prev, _) = w.joint_readout(j).unwrap();
    for i in 0..200 {
        w.step(&[5.0 * (i as f64 * 0.05).cos()]).unwrap();
        let (angle, vel) = w.joint_readout(j).unwrap();
        assert!(((angle - prev) / dt - vel).abs() < 1e-6);
        prev = angle;
    }
}

#[test]
fn com_velocity_matches_position_difference() {
    let geom = RobotGeometry::default();
    let pose = InitialPose { x_init: 0.1, swing_x: -0.1, support: Side::Left };
    let cfg = WorldConfig { gravity: 0.0, ..WorldConfig::default() };
    let mut robot = build_robot(&geom, FeetKind::Actuated, &pose, cfg, &MotorLimits::default()).unwrap();
    for i in 0..robot.world.bodies().len() {
        robot.world.body_mut(BodyId(i)).unwrap().position.y += 2.0;
    }
    robot.world.body_mut(robot.torso).unwrap().velocity = Vector2::new(0.4, 0.2);
    let dt = robot.world.config().dt;
    let mut prev = robot.world.com_state();
    for i in 0..200 {
        let t = i as f64 * dt;
        robot.world.step(&[10.0 * t.sin(), -5.0, 2.0, -3.0 * t.cos(), 5.0, -1.0]).unwrap();
        let now = robot.world.com_state();
        assert!(((now.x - prev.x) / dt - now.vx).abs() < 1e-6);
        assert!(((now.z - prev.z) / dt - now.vz).abs() < 1e-6);
        prev = now;
    }
    assert!(robot.world.contacts().is_empty());
}

#[test]
fn friction_cone_holds_while_sliding() {
    let mut w = world(-9.81);
    let b = resting_box(&mut w, 0.0, (0.38, 0.0933), 0.5);
    w.body_mut(b).unwrap().velocity = Vector2::new(3.0, 0.0);
    let mu = (PART_FRICTION * 2.5f64).sqrt();
    assert_relative_eq!(mu, 0.5, epsilon = 1e-15);
    let mut slid = false;
    for _ in 0..120 {
        w.step(&[]).unwrap();
        for p in &w.contacts().points {
            assert!(p.normal_impulse >= 0.0);
            assert!(p.tangent_impulse.abs() <= p.friction * p.normal_impulse + 1e-12);
            assert_relative_eq!(p.friction, mu, epsilon = 1e-15);
        }
        slid |= w.body(b).unwrap().position.x > 0.05;
    }
    assert!(slid);
    // kinetic friction deceleration is mu * g
    assert!(w.body(b).unwrap().velocity.x.abs() < 1e-9);
}

#[test]
fn dropped_box_never_sinks_past_slop() {
    let mut w = world(-9.81);
    let b = w.add_body(RigidBody::dynamic_box("b", (0.3, 0.1), 0.4, Vector2::new(0.0, 0.8), 0.3).unwrap());
    let slop = w.config().linear_slop;
    for _ in 0..300 {
        w.step(&[]).unwrap();
        let body = w.body(b).unwrap();
        let lowest = body.local_corners().iter().map(|c| body.world_point(*c).y).fold(f64::INFINITY, f64::min);
        assert!(lowest > -slop - 1e-9, "sank to {lowest}");
        assert!(w.contacts().points.iter().all(|p| p.normal_impulse >= 0.0));
    }
}

#[test]
fn motor_respects_speed_and_torque_limits() {
    let mut w = world(0.0);
    let a = w.add_body(
        RigidBody::dynamic_box("a", (0.3, 0.3), 1.0, Vector2::new(0.0, 3.0), 0.0).unwrap().fixed(),
    );
    let b = w.add_body(RigidBody::dynamic_box("b", (0.09, 0.57), 0.05, Vector2::new(0.0, 3.0), 0.0).unwrap());
    let j = w
        .add_joint(RevoluteJoint::new("m", a, b, Vector2::zeros(), Vector2::zeros()).with_motor(100.0, 4.0))
        .unwrap();
    for _ in 0..120 {
        w.step(&[500.0]).unwrap();
        let (_, vel) = w.joint_readout(j).unwrap();
        assert!(vel <= 4.0 + 1e-9);
        assert!(w.joint(j).unwrap().applied_torque().abs() <= 100.0 + 1e-9);
        assert_eq!(w.joint(j).unwrap().command(), 100.0);
    }
    assert_relative_eq!(w.joint_readout(j).unwrap().1, 4.0, epsilon = 1e-9);

    // spinning faster than the ceiling: the motor brakes, never accelerates
    w.body_mut(b).unwrap().omega = 8.0;
    w.step(&[5.0]).unwrap();
    assert!(w.joint(j).unwrap().applied_torque() <= 0.0);
    assert!(w.joint_readout(j).unwrap().1 < 8.0);
}

#[test]
fn straight_leg_knee_reads_pi() {
    let mut w = world(-9.81);
    let thigh = w.add_body(
        RigidBody::dynamic_box("thigh", (0.09, 0.57), 0.05, Vector2::new(0.0, 1.0), 0.0).unwrap().fixed(),
    );
    let shin = w.add_body(RigidBody::dynamic_box("shin", (0.07, 0.57), 0.04, Vector2::new(0.0, 0.43), 0.0).unwrap());
    let knee = w
        .add_joint(
            RevoluteJoint::new("knee", thigh, shin, Vector2::new(0.0, -0.285), Vector2::new(0.0, 0.285))
                .with_reference(-PI),
        )
        .unwrap();
    let (angle, vel) = w.joint_readout(knee).unwrap();
    assert_relative_eq!(angle, PI, epsilon = 1e-15);
    assert_eq!(vel, 0.0);

    let swapped = w
        .add_joint(
            RevoluteJoint::new("rev", shin, thigh, Vector2::new(0.0, 0.285), Vector2::new(0.0, -0.285))
                .with_reference(PI),
        )
        .unwrap();
    w.body_mut(shin).unwrap().angle = 0.2;
    w.body_mut(shin).unwrap().omega = 0.7;
    let (a1, v1) = w.joint_readout(knee).unwrap();
    let (a2, v2) = w.joint_readout(swapped).unwrap();
    assert_relative_eq!(a1, -a2, epsilon = 1e-15);
    assert_relative_eq!(v1, -v2, epsilon = 1e-15);
    assert!(matches!(w.joint_readout(JointId(9)), Err(PhysicsError::UnknownJoint(9))));
}

#[test]
fn robot_variants() {
    let full = standing_robot(FeetKind::Actuated, &RobotGeometry::default());
    assert_eq!(full.world.joints().len(), 6);
    assert_eq!(
        full.joint_names(),
        ["left_hip", "left_knee", "left_ankle", "right_hip", "right_knee", "right_ankle"]
    );
    let total: f64 = full.world.bodies().iter().map(|b| b.mass()).sum();
    assert_relative_eq!(total, 0.676, epsilon = 1e-12);

    let passive = standing_robot(FeetKind::Passive, &RobotGeometry::default());
    assert_eq!(passive.world.joints().len(), 6);
    assert!(passive.world.joints()[2].motor.is_none());

    let point = standing_robot(FeetKind::None, &RobotGeometry::point_feet());
    assert_eq!(point.world.joints().len(), 4);

    assert!(matches!(
        build_robot(
            &RobotGeometry::point_feet(),
            FeetKind::Actuated,
            &InitialPose::default(),
            WorldConfig::default(),
            &MotorLimits::default()
        ),
        Err(PhysicsError::Build(_))
    ));
}

#[test]
fn robot_pose_matches_kinematics() {
    let geom = RobotGeometry::default();
    let robot = build_robot(&geom, FeetKind::Actuated, &InitialPose::default(), WorldConfig::default(), &MotorLimits::default())
        .unwrap();
    let hip = robot.hip_position();
    assert_relative_eq!(hip.x, 0.173, epsilon = 1e-9);
    assert_relative_eq!(hip.y, geom.h_c, epsilon = 1e-9);
    let ankle = robot.ankle_position(Side::Left);
    assert_relative_eq!(ankle.x, 0.0, epsilon = 1e-9);
    assert_relative_eq!(ankle.y, geom.h_f, epsilon = 1e-9);
    let a = simbiped_core::ik_support(0.173, &geom).unwrap();
    let leg = robot.leg(Side::Left);
    assert_relative_eq!(robot.world.joint_readout(leg.hip).unwrap().0, a.gamma, epsilon = 1e-12);
    assert_relative_eq!(robot.world.joint_readout(leg.knee).unwrap().0, a.theta, epsilon = 1e-12);
    assert_relative_eq!(robot.world.joint_readout(leg.ankle.unwrap()).unwrap().0, a.xi, epsilon = 1e-12);
}

#[test]
fn symmetric_stance_com_under_torso() {
    let geom = RobotGeometry::default();
    let mut robot = standing_robot(FeetKind::Actuated, &geom);
    assert_eq!(robot.foot_contacts(), [true, true]);

    // straighten both legs directly under the hip
    let hip = robot.hip_position();
    let (l1, l2, hf) = (geom.l_thigh, geom.l_shin, geom.h_f);
    for leg in robot.legs {
        let parts = [(leg.thigh, l1 / 2.0), (leg.shin, l1 + l2 / 2.0), (leg.foot.unwrap(), l1 + l2 + hf / 2.0)];
        for (id, depth) in parts {
            let b = robot.world.body_mut(id).unwrap();
            b.position = Vector2::new(hip.x, hip.y - depth);
            b.angle = 0.0;
        }
    }
    let com = robot.world.com_state();
    assert_relative_eq!(com.x, hip.x, epsilon = 1e-12);
    assert!(com.z < hip.y);

    let mut light = RobotGeometry::default();
    light.masses.thigh = 1e-9;
    light.masses.shin = 1e-9;
    light.masses.foot = 1e-9;
    let pose = InitialPose { x_init: 0.2, swing_x: 0.3, support: Side::Left };
    let r = build_robot(&light, FeetKind::Actuated, &pose, WorldConfig::default(), &MotorLimits::default()).unwrap();
    let com = r.world.com_state();
    let t = r.world.body(r.torso).unwrap().position;
    assert!((com.x - t.x).abs() < 1e-6 && (com.z - t.y).abs() < 1e-6);
}

#[test]
fn airborne_robot_has_no_contacts() {
    let mut robot = standing_robot(FeetKind::Actuated, &RobotGeometry::default());
    for i in 0..robot.world.bodies().len() {
        robot.world.body_mut(BodyId(i)).unwrap().position.y += 1.0;
    }
    robot.world.step(&[0.0; 6]).unwrap();
    assert_eq!(robot.foot_contacts(), [false, false]);
    assert!(robot.world.contacts().is_empty());
}

#[test]
fn stepping_is_deterministic() {
    let run = || {
        let mut robot = build_robot(
            &RobotGeometry::default(),
            FeetKind::Actuated,
            &InitialPose::default(),
            WorldConfig::default(),
            &MotorLimits::default(),
        )
        .unwrap();
        let mut trace = Vec::new();
        for i in 0..240 {
            let t = i as f64 / 60.0;
            let u = [3.0 * t.sin(), -2.0, 1.0, -3.0 * t.sin(), 2.0, -1.0];
            robot.world.step(&u).unwrap();
            let c = robot.world.com_state();
            trace.push((c.x.to_bits(), c.z.to_bits(), c.vx.to_bits()));
        }
        trace
    };
    assert_eq!(run(), run());
}

#[test]
fn divergence_is_reported() {
    let mut w = world(0.0);
    let b = w.add_body(RigidBody::dynamic_box("b", (0.1, 0.1), 1.0, Vector2::new(0.0, 5.0), 0.0).unwrap());
    w.body_mut(b).unwrap().velocity = Vector2::new(2e3, 0.0);
    assert!(matches!(w.step(&[]), Err(PhysicsError::Unstable { body: 0, .. })));
    assert!(matches!(w.step(&[f64::NAN]), Err(PhysicsError::InvalidCommand { .. })));
}

#[test]
fn config_is_validated() {
    assert!(World::new(WorldConfig { dt: 0.0, ..WorldConfig::default() }).is_err());
    assert!(World::new(WorldConfig { velocity_iterations: 0, ..WorldConfig::default() }).is_err());
}
