use nalgebra::Vector2;

use crate::body::{BodyId, RigidBody};
use crate::contact::{ContactPoint, ContactState, Manifold};
use crate::joint::{solve_joint_position, JointId, JointSolver, RevoluteJoint};
use crate::PhysicsError;

/// Any body faster than this (m/s or rad/s) aborts the step.
pub const MAX_SPEED: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldConfig {
    /// Vertical gravitational acceleration, negative downward.
    pub gravity: f64,
    pub dt: f64,
    pub velocity_iterations: usize,
    pub position_iterations: usize,
    /// Integration sub-steps per `dt`; commands are held across them.
    pub substeps: usize,
    pub ground_friction: f64,
    pub baumgarte: f64,
    pub linear_slop: f64,
    pub max_linear_correction: f64,
    /// Corners closer than this to the ground enter the solver early.
    pub speculative_distance: f64,
    pub warm_starting: bool,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            gravity: -9.81,
            dt: 1.0 / 60.0,
            velocity_iterations: 8,
            position_iterations: 3,
            substeps: 4,
            ground_friction: 2.5,
            baumgarte: 0.2,
            linear_slop: 1e-3,
            max_linear_correction: 0.2,
            speculative_distance: 0.05,
            warm_starting: true,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PhysicsError::InvalidConfig(format!("dt = {} must be > 0", self.dt)));
        }
        if self.velocity_iterations == 0 || self.position_iterations == 0 || self.substeps == 0 {
            return Err(PhysicsError::InvalidConfig("solver iterations must be >= 1".into()));
        }
        if !(self.ground_friction >= 0.0 && self.baumgarte >= 0.0 && self.linear_slop >= 0.0) {
            return Err(PhysicsError::InvalidConfig("friction, baumgarte and slop must be >= 0".into()));
        }
        Ok(())
    }
}

/// Whole-system centre of mass.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComState {
    pub x: f64,
    pub z: f64,
    pub vx: f64,
    pub vz: f64,
}

#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    bodies: Vec<RigidBody>,
    joints: Vec<RevoluteJoint>,
    contact_cache: Vec<[(f64, f64); 4]>,
    contacts: ContactState,
    steps: u64,
}

impl World {
    pub fn new(config: WorldConfig) -> Result<Self, PhysicsError> {
        config.validate()?;
        Ok(Self {
            config,
            bodies: Vec::new(),
            joints: Vec::new(),
            contact_cache: Vec::new(),
            contacts: ContactState::default(),
            steps: 0,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: WorldConfig) -> Result<(), PhysicsError> {
        config.validate()?;
        self.config = config;
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn add_body(&mut self, body: RigidBody) -> BodyId {
        self.bodies.push(body);
        self.contact_cache.push([(0.0, 0.0); 4]);
        BodyId(self.bodies.len() - 1)
    }

    pub fn add_joint(&mut self, joint: RevoluteJoint) -> Result<JointId, PhysicsError> {
        let n = self.bodies.len();
        if joint.parent.0 >= n || joint.child.0 >= n {
            return Err(PhysicsError::UnknownBody(joint.parent.0.max(joint.child.0)));
        }
        if joint.parent == joint.child {
            return Err(PhysicsError::InvalidBody(format!("joint {} connects a body to itself", joint.name)));
        }
        self.joints.push(joint);
        Ok(JointId(self.joints.len() - 1))
    }

    pub fn bodies(&self) -> &[RigidBody] {
        &self.bodies
    }

    pub fn body(&self, id: BodyId) -> Result<&RigidBody, PhysicsError> {
        self.bodies.get(id.0).ok_or(PhysicsError::UnknownBody(id.0))
    }

    pub fn body_mut(&mut self, id: BodyId) -> Result<&mut RigidBody, PhysicsError> {
        self.bodies.get_mut(id.0).ok_or(PhysicsError::UnknownBody(id.0))
    }

    pub fn joints(&self) -> &[RevoluteJoint] {
        &self.joints
    }

    pub fn joint(&self, id: JointId) -> Result<&RevoluteJoint, PhysicsError> {
        self.joints.get(id.0).ok_or(PhysicsError::UnknownJoint(id.0))
    }

    pub fn joint_mut(&mut self, id: JointId) -> Result<&mut RevoluteJoint, PhysicsError> {
        self.joints.get_mut(id.0).ok_or(PhysicsError::UnknownJoint(id.0))
    }

    /// Relative angle and angular velocity `(child - parent)` of a joint.
    pub fn joint_readout(&self, id: JointId) -> Result<(f64, f64), PhysicsError> {
        let j = self.joint(id)?;
        let (a, b) = (&self.bodies[j.parent.0], &self.bodies[j.child.0]);
        Ok((b.angle - a.angle - j.reference_angle, b.omega - a.omega))
    }

    pub fn com_state(&self) -> ComState {
        let mut m = 0.0;
        let (mut p, mut v) = (Vector2::zeros(), Vector2::zeros());
        for b in &self.bodies {
            m += b.mass();
            p += b.mass() * b.position;
            v += b.mass() * b.velocity;
        }
        if m == 0.0 {
            return ComState::default();
        }
        ComState { x: p.x / m, z: p.y / m, vx: v.x / m, vz: v.y / m }
    }

    pub fn linear_momentum(&self) -> Vector2<f64> {
        self.bodies.iter().filter(|b| !b.is_static()).map(|b| b.mass() * b.velocity).sum()
    }

    /// Kinetic plus gravitational potential energy of the dynamic bodies.
    pub fn mechanical_energy(&self) -> f64 {
        self.bodies
            .iter()
            .filter(|b| !b.is_static())
            .map(|b| b.kinetic_energy() - b.mass() * self.config.gravity * b.position.y)
            .sum()
    }

    /// Ground contacts from the last step, or the current geometry before
    /// the first step.
    pub fn contacts(&self) -> ContactState {
        if self.steps > 0 {
            return self.contacts.clone();
        }
        let mut state = ContactState::default();
        for (i, b) in self.bodies.iter().enumerate() {
            if !b.collides_with_ground || b.is_static() {
                continue;
            }
            for (corner, local) in b.local_corners().into_iter().enumerate() {
                let point = b.world_point(local);
                if point.y <= self.config.linear_slop {
                    state.points.push(ContactPoint {
                        body: BodyId(i),
                        corner,
                        point,
                        separation: point.y,
                        normal_impulse: 0.0,
                        tangent_impulse: 0.0,
                        friction: (b.friction * self.config.ground_friction).sqrt(),
                        touching: true,
                    });
                }
            }
        }
        state
    }

    /// Advances the world by one fixed step of `config.dt`.
    ///
    /// `torques[i]` commands joint `i`; joints without a motor ignore it and
    /// missing entries count as zero.
    pub fn step(&mut self, torques: &[f64]) -> Result<(), PhysicsError> {
        if let Some((i, t)) = torques.iter().enumerate().find(|(_, t)| !t.is_finite()) {
            return Err(PhysicsError::InvalidCommand { joint: i, value: *t });
        }
        for (i, joint) in self.joints.iter_mut().enumerate() {
            let u = torques.get(i).copied().unwrap_or(0.0);
            joint.command = match joint.motor {
                Some(m) => u.clamp(-m.torque_limit, m.torque_limit),
                None => 0.0,
            };
        }
        let mut applied = vec![0.0; self.joints.len()];
        let mut merged: Vec<ContactPoint> = Vec::new();
        let n = self.config.substeps;
        let result = (|| {
            for _ in 0..n {
                let report = self.substep(self.config.dt / n as f64)?;
                for (a, j) in applied.iter_mut().zip(&self.joints) {
                    *a += j.applied_torque / n as f64;
                }
                merge_contacts(&mut merged, report);
            }
            Ok(())
        })();
        for (a, j) in applied.into_iter().zip(self.joints.iter_mut()) {
            j.applied_torque = a;
        }
        merged.sort_by_key(|p| (p.body, p.corner));
        self.contacts = ContactState { points: merged };
        self.steps += 1;
        result
    }

    /// One integration sub-step; returns the contacts it resolved.
    fn substep(&mut self, dt: f64) -> Result<Vec<ContactPoint>, PhysicsError> {
        let inv_dt = 1.0 / dt;

        for b in self.bodies.iter_mut().filter(|b| !b.is_static()) {
            b.velocity.y += self.config.gravity * dt;
        }

        let warm = self.config.warm_starting;
        let mut joint_solvers: Vec<JointSolver> = self
            .joints
            .iter_mut()
            .map(|j| JointSolver::new(j, &mut self.bodies, dt, warm))
            .collect();
        let mut manifolds = Vec::new();
        for (i, body) in self.bodies.iter_mut().enumerate() {
            let cache = if warm { self.contact_cache[i] } else { [(0.0, 0.0); 4] };
            if let Some(m) = Manifold::collect(
                i,
                body,
                &cache,
                self.config.ground_friction,
                self.config.speculative_distance,
                inv_dt,
            ) {
                manifolds.push(m);
            }
        }

        for _ in 0..self.config.velocity_iterations {
            for (s, j) in joint_solvers.iter_mut().zip(self.joints.iter_mut()) {
                s.solve_velocity(j, &mut self.bodies, inv_dt);
            }
            for m in &mut manifolds {
                m.solve_velocity(&mut self.bodies[m.body]);
            }
        }

        for (s, j) in joint_solvers.iter_mut().zip(self.joints.iter_mut()) {
            s.finish(j, inv_dt);
        }
        for cache in &mut self.contact_cache {
            *cache = [(0.0, 0.0); 4];
        }
        let mut report = Vec::new();
        for m in &manifolds {
            m.store(&mut self.contact_cache[m.body]);
            m.report(self.config.linear_slop, &mut report);
        }

        for b in self.bodies.iter_mut().filter(|b| !b.is_static()) {
            b.position += b.velocity * dt;
            b.angle += b.omega * dt;
        }

        let c = self.config;
        for _ in 0..c.position_iterations {
            let mut min_sep: f64 = 0.0;
            for m in &manifolds {
                let s = m.solve_position(&mut self.bodies[m.body], c.baumgarte, c.linear_slop, c.max_linear_correction);
                min_sep = min_sep.min(s);
            }
            let mut joints_ok = true;
            for j in &self.joints {
                joints_ok &= solve_joint_position(j, &mut self.bodies, c.linear_slop);
            }
            if min_sep >= -3.0 * c.linear_slop && joints_ok {
                break;
            }
        }

        for (i, b) in self.bodies.iter().enumerate() {
            let speed = b.velocity.norm().max(b.omega.abs());
            if !(speed <= MAX_SPEED) {
                return Err(PhysicsError::Unstable { body: i, speed, time: self.time() });
            }
        }
        Ok(report)
    }
}

/// Sums impulses of the same corner across sub-steps, keeping the latest geometry.
fn merge_contacts(into: &mut Vec<ContactPoint>, report: Vec<ContactPoint>) {
    for p in report {
        match into.iter_mut().find(|q| q.body == p.body && q.corner == p.corner) {
            Some(q) => {
                q.normal_impulse += p.normal_impulse;
                q.tangent_impulse += p.tangent_impulse;
                q.point = p.point;
                q.separation = p.separation;
                q.touching |= p.touching;
            }
            None => into.push(p),
        }
    }
}
