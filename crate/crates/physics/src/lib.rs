//! Deterministic planar rigid-body engine.
//!
//! Boxes move in the x-z plane (stored as `Vector2` with `y` meaning height)
//! above a flat ground at `z = 0`. Revolute joints and ground contacts are
//! resolved with sequential impulses, warm starting, and a nonlinear
//! position pass, at a fixed step.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod body;
mod contact;
mod joint;
mod robot;
mod world;

use thiserror::Error;

pub use body::{BodyId, RigidBody};
pub use contact::{ContactPoint, ContactState};
pub use joint::{JointId, JointMotor, RevoluteJoint};
pub use robot::{build_robot, FeetKind, InitialPose, LegHandles, MotorLimits, Robot, Side, PART_FRICTION};
pub use world::{ComState, World, WorldConfig, MAX_SPEED};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("invalid world configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("robot build failed: {0}")]
    Build(String),
    #[error("unknown body id {0}")]
    UnknownBody(usize),
    #[error("unknown joint id {0}")]
    UnknownJoint(usize),
    #[error("non-finite torque command {value} for joint {joint}")]
    InvalidCommand { joint: usize, value: f64 },
    #[error("solver diverged at t = {time:.4} s: body {body} moving at {speed:.3e}")]
    Unstable { body: usize, speed: f64, time: f64 },
}
