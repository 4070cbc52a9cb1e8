//! Pendulum dynamics, gait planning, leg kinematics and joint control for a
//! planar biped.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod gait;
pub mod kinematics;
pub mod lipm;

pub use control::{
    filter_step, pd_torque, posture_adjust, reset_on_exchange, zn_gains, ControlError, LowPassState,
    PdController, PdGains, PostureController, ZnGains, ZnRule,
};
pub use gait::{
    foot_placement, foot_velocity, foot_x, foot_z, plan_step, propagate_step_velocity, Footholds, GaitError,
    GaitParams, StepPlan,
};
pub use kinematics::{
    clamp_joint_limits, fk_leg, ik_support, ik_swing, IkError, JointLimits, LegAngles, LegPoints, PartMasses,
    RobotGeometry,
};
pub use lipm::{
    accel_from_zmp, evolve, evolve_3d, hyperbola_residual, orbital_energy, orbital_energy_rotated,
    principal_angle, sloped_dynamics_accel, time_constant, zmp_from_torque, zmp_from_trajectory, ConstraintLine,
    ConstraintPlane, Lipm3dState, LipmError, LipmParams, LipmState, OrbitalEnergyPair,
};
