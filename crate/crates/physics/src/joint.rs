use nalgebra::{Matrix2, Vector2};

use crate::body::{cross, cross_sv, rotate, BodyId, RigidBody};

/// Index of a joint inside its [`World`](crate::World).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointId(pub usize);

/// Torque-commanded motor with a speed ceiling.
///
/// A command `u` drives the joint toward `sign(u) * speed_limit` using at
/// most `min(|u|, torque_limit)`. Past the ceiling the same budget brakes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMotor {
    pub torque_limit: f64,
    pub speed_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevoluteJoint {
    pub name: String,
    pub parent: BodyId,
    pub child: BodyId,
    pub anchor_parent: Vector2<f64>,
    pub anchor_child: Vector2<f64>,
    /// Subtracted from `child.angle - parent.angle` in the readout.
    pub reference_angle: f64,
    pub limits: Option<(f64, f64)>,
    pub motor: Option<JointMotor>,
    pub(crate) command: f64,
    pub(crate) point_impulse: Vector2<f64>,
    pub(crate) motor_impulse: f64,
    pub(crate) lower_impulse: f64,
    pub(crate) upper_impulse: f64,
    pub(crate) applied_torque: f64,
}

impl RevoluteJoint {
    pub fn new(
        name: impl Into<String>,
        parent: BodyId,
        child: BodyId,
        anchor_parent: Vector2<f64>,
        anchor_child: Vector2<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            parent,
            child,
            anchor_parent,
            anchor_child,
            reference_angle: 0.0,
            limits: None,
            motor: None,
            command: 0.0,
            point_impulse: Vector2::zeros(),
            motor_impulse: 0.0,
            lower_impulse: 0.0,
            upper_impulse: 0.0,
            applied_torque: 0.0,
        }
    }

    pub fn with_reference(self, reference_angle: f64) -> Self {
        Self { reference_angle, ..self }
    }

    pub fn with_limits(self, lower: f64, upper: f64) -> Self {
        Self { limits: Some((lower, upper)), ..self }
    }

    pub fn with_motor(self, torque_limit: f64, speed_limit: f64) -> Self {
        Self { motor: Some(JointMotor { torque_limit, speed_limit }), ..self }
    }

    /// Last torque command after clamping to the motor limit.
    pub fn command(&self) -> f64 {
        self.command
    }

    /// Torque the motor actually delivered during the last step.
    pub fn applied_torque(&self) -> f64 {
        self.applied_torque
    }
}

/// Per-step solver data for one joint.
pub(crate) struct JointSolver {
    pub a: usize,
    pub b: usize,
    ra: Vector2<f64>,
    rb: Vector2<f64>,
    k: Matrix2<f64>,
    drift_bias: Vector2<f64>,
    axial_mass: f64,
    angle: f64,
    motor_speed: f64,
    max_motor_impulse: f64,
}

fn axial_mass(ia: f64, ib: f64) -> f64 {
    if ia + ib > 0.0 {
        1.0 / (ia + ib)
    } else {
        0.0
    }
}

fn point_mass_matrix(ma: f64, ia: f64, ra: Vector2<f64>, mb: f64, ib: f64, rb: Vector2<f64>) -> Matrix2<f64> {
    Matrix2::new(
        ma + mb + ia * ra.y * ra.y + ib * rb.y * rb.y,
        -ia * ra.x * ra.y - ib * rb.x * rb.y,
        -ia * ra.x * ra.y - ib * rb.x * rb.y,
        ma + mb + ia * ra.x * ra.x + ib * rb.x * rb.x,
    )
}

fn solve2(k: &Matrix2<f64>, rhs: Vector2<f64>) -> Vector2<f64> {
    let det = k.determinant();
    if det == 0.0 {
        return Vector2::zeros();
    }
    let inv = 1.0 / det;
    Vector2::new(inv * (k[(1, 1)] * rhs.x - k[(0, 1)] * rhs.y), inv * (k[(0, 0)] * rhs.y - k[(1, 0)] * rhs.x))
}

fn pair_mut(bodies: &mut [RigidBody], a: usize, b: usize) -> (&mut RigidBody, &mut RigidBody) {
    assert_ne!(a, b, "joint connects a body to itself");
    if a < b {
        let (lo, hi) = bodies.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = bodies.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

const ANGULAR_SLOP: f64 = 2.0 * std::f64::consts::PI / 180.0;
const MAX_ANGULAR_CORRECTION: f64 = 8.0 * std::f64::consts::PI / 180.0;

impl JointSolver {
    pub fn new(joint: &mut RevoluteJoint, bodies: &mut [RigidBody], dt: f64, warm_start: bool) -> Self {
        let (a, b) = (joint.parent.0, joint.child.0);
        let (ba, bb) = pair_mut(bodies, a, b);
        let ra = rotate(ba.angle, joint.anchor_parent);
        let rb = rotate(bb.angle, joint.anchor_child);
        let (ma, ia, mb, ib) = (ba.inv_mass(), ba.inv_inertia(), bb.inv_mass(), bb.inv_inertia());
        let k = point_mass_matrix(ma, ia, ra, mb, ib, rb);
        // Rotating an anchor at constant rate pulls it inward by (w dt)^2 r / 2
        // over the step; aim the relative anchor velocity to cancel that.
        let drift_bias = 0.5 * dt * (bb.omega * bb.omega * rb - ba.omega * ba.omega * ra);

        let (motor_speed, max_motor_impulse) = match joint.motor {
            Some(m) => {
                let speed = if joint.command > 0.0 {
                    m.speed_limit
                } else if joint.command < 0.0 {
                    -m.speed_limit
                } else {
                    0.0
                };
                (speed, joint.command.abs() * dt)
            }
            None => (0.0, 0.0),
        };
        if joint.motor.is_none() {
            joint.motor_impulse = 0.0;
        }
        if joint.limits.is_none() {
            joint.lower_impulse = 0.0;
            joint.upper_impulse = 0.0;
        }

        if warm_start {
            let p = joint.point_impulse;
            let axial = joint.motor_impulse.clamp(-max_motor_impulse, max_motor_impulse)
                + joint.lower_impulse
                - joint.upper_impulse;
            ba.velocity -= ma * p;
            ba.omega -= ia * (cross(ra, p) + axial);
            bb.velocity += mb * p;
            bb.omega += ib * (cross(rb, p) + axial);
            joint.motor_impulse = joint.motor_impulse.clamp(-max_motor_impulse, max_motor_impulse);
        } else {
            joint.point_impulse = Vector2::zeros();
            joint.motor_impulse = 0.0;
            joint.lower_impulse = 0.0;
            joint.upper_impulse = 0.0;
        }

        Self {
            a,
            b,
            ra,
            rb,
            k,
            drift_bias,
            axial_mass: axial_mass(ia, ib),
            angle: bb.angle - ba.angle - joint.reference_angle,
            motor_speed,
            max_motor_impulse,
        }
    }

    pub fn solve_velocity(&self, joint: &mut RevoluteJoint, bodies: &mut [RigidBody], inv_dt: f64) {
        let (ba, bb) = pair_mut(bodies, self.a, self.b);
        let (ma, ia, mb, ib) = (ba.inv_mass(), ba.inv_inertia(), bb.inv_mass(), bb.inv_inertia());

        if joint.motor.is_some() {
            let cdot = bb.omega - ba.omega - self.motor_speed;
            let old = joint.motor_impulse;
            joint.motor_impulse =
                (old - self.axial_mass * cdot).clamp(-self.max_motor_impulse, self.max_motor_impulse);
            let impulse = joint.motor_impulse - old;
            ba.omega -= ia * impulse;
            bb.omega += ib * impulse;
        }

        if let Some((lower, upper)) = joint.limits {
            let c = self.angle - lower;
            let cdot = bb.omega - ba.omega;
            let old = joint.lower_impulse;
            joint.lower_impulse = (old - self.axial_mass * (cdot + c.max(0.0) * inv_dt)).max(0.0);
            let impulse = joint.lower_impulse - old;
            ba.omega -= ia * impulse;
            bb.omega += ib * impulse;

            let c = upper - self.angle;
            let cdot = ba.omega - bb.omega;
            let old = joint.upper_impulse;
            joint.upper_impulse = (old - self.axial_mass * (cdot + c.max(0.0) * inv_dt)).max(0.0);
            let impulse = joint.upper_impulse - old;
            ba.omega += ia * impulse;
            bb.omega -= ib * impulse;
        }

        let cdot = bb.velocity + cross_sv(bb.omega, self.rb) - ba.velocity - cross_sv(ba.omega, self.ra);
        let impulse = solve2(&self.k, self.drift_bias - cdot);
        joint.point_impulse += impulse;
        ba.velocity -= ma * impulse;
        ba.omega -= ia * cross(self.ra, impulse);
        bb.velocity += mb * impulse;
        bb.omega += ib * cross(self.rb, impulse);
    }

    pub fn finish(&self, joint: &mut RevoluteJoint, inv_dt: f64) {
        joint.applied_torque = joint.motor_impulse * inv_dt;
    }
}

/// Nonlinear position correction; returns true when the joint is within slop.
pub(crate) fn solve_joint_position(joint: &RevoluteJoint, bodies: &mut [RigidBody], linear_slop: f64) -> bool {
    let (ba, bb) = pair_mut(bodies, joint.parent.0, joint.child.0);
    let (ma, ia, mb, ib) = (ba.inv_mass(), ba.inv_inertia(), bb.inv_mass(), bb.inv_inertia());
    let mut angular_error = 0.0;

    if let Some((lower, upper)) = joint.limits {
        let angle = bb.angle - ba.angle - joint.reference_angle;
        let c = if (upper - lower).abs() < 2.0 * ANGULAR_SLOP {
            (angle - lower).clamp(-MAX_ANGULAR_CORRECTION, MAX_ANGULAR_CORRECTION)
        } else if angle <= lower {
            (angle - lower + ANGULAR_SLOP).clamp(-MAX_ANGULAR_CORRECTION, 0.0)
        } else if angle >= upper {
            (angle - upper - ANGULAR_SLOP).clamp(0.0, MAX_ANGULAR_CORRECTION)
        } else {
            0.0
        };
        let impulse = -axial_mass(ia, ib) * c;
        ba.angle -= ia * impulse;
        bb.angle += ib * impulse;
        angular_error = c.abs();
    }

    let ra = rotate(ba.angle, joint.anchor_parent);
    let rb = rotate(bb.angle, joint.anchor_child);
    let c = bb.position + rb - ba.position - ra;
    let k = point_mass_matrix(ma, ia, ra, mb, ib, rb);
    let impulse = -solve2(&k, c);
    ba.position -= ma * impulse;
    ba.angle -= ia * cross(ra, impulse);
    bb.position += mb * impulse;
    bb.angle += ib * cross(rb, impulse);

    c.norm() <= linear_slop && angular_error <= ANGULAR_SLOP
}
