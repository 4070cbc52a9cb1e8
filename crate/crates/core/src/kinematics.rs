//! Planar leg kinematics.
//!
//! Frame: x forward, z up. Absolute segment angles are measured from the
//! downward vertical, counter-clockwise positive, so a segment with angle
//! `a` points along `(sin a, -cos a)`. With the torso upright:
//!
//! * thigh angle = `gamma`
//! * shin angle = `gamma - (pi - theta)` (a straight knee reads `theta = pi`)
//! * foot pitch = shin angle + `xi` (zero when the sole is level)

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of full extension the virtual leg may reach.
pub const REACH_MARGIN: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IkError {
    #[error("target out of reach: virtual leg {length:.6} m exceeds {limit:.6} m")]
    OutOfReach { length: f64, limit: f64 },
    #[error("invalid leg geometry: {0}")]
    Geometry(String),
}

/// Masses of each rigid part (kg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartMasses {
    pub torso: f64,
    pub thigh: f64,
    pub shin: f64,
    pub foot: f64,
}

impl Default for PartMasses {
    fn default() -> Self {
        Self { torso: 0.42, thigh: 0.05, shin: 0.04, foot: 0.038 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotGeometry {
    pub l_thigh: f64,
    pub l_shin: f64,
    /// Sole-to-ankle height. Zero for the point-foot robot.
    pub h_f: f64,
    pub torso_size: (f64, f64),
    pub thigh_width: f64,
    pub shin_width: f64,
    pub foot_length: f64,
    pub masses: PartMasses,
    /// Commanded CoM (hip) height above the ground.
    pub h_c: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            l_thigh: 0.57,
            l_shin: 0.57,
            h_f: 0.0933,
            torso_size: (0.29, 0.29),
            thigh_width: 0.09,
            shin_width: 0.07,
            foot_length: 0.38,
            masses: PartMasses::default(),
            h_c: 1.11,
        }
    }
}

impl RobotGeometry {
    /// Four-joint robot without feet; CoM height kept at 0.9 of the leg.
    pub fn point_feet() -> Self {
        let base = Self::default();
        Self { h_f: 0.0, h_c: 0.9 * (base.l_thigh + base.l_shin), ..base }
    }

    pub fn validate(&self) -> Result<(), IkError> {
        let positive = [
            ("l_thigh", self.l_thigh),
            ("l_shin", self.l_shin),
            ("torso width", self.torso_size.0),
            ("torso height", self.torso_size.1),
            ("thigh_width", self.thigh_width),
            ("shin_width", self.shin_width),
            ("foot_length", self.foot_length),
            ("h_c", self.h_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(IkError::Geometry(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.h_f >= 0.0 && self.h_f.is_finite()) {
            return Err(IkError::Geometry(format!("h_f must be >= 0, got {}", self.h_f)));
        }
        if (self.l_thigh - self.l_shin).abs() > 1e-12 {
            return Err(IkError::Geometry("thigh and shin must have equal length".into()));
        }
        if self.h_c <= self.h_f {
            return Err(IkError::Geometry(format!("h_c {} must exceed h_f {}", self.h_c, self.h_f)));
        }
        if self.h_c >= self.l_thigh + self.l_shin + self.h_f {
            return Err(IkError::Geometry("h_c is not below full leg length".into()));
        }
        Ok(())
    }

    /// Segment length `L`.
    pub fn leg_length(&self) -> f64 {
        self.l_thigh
    }

    /// Longest admissible hip-to-ankle distance.
    pub fn max_reach(&self) -> f64 {
        2.0 * self.leg_length() * (1.0 - REACH_MARGIN)
    }

    pub fn has_feet(&self) -> bool {
        self.h_f > 0.0
    }

    pub fn total_mass(&self) -> f64 {
        let m = &self.masses;
        let feet = if self.has_feet() { m.foot } else { 0.0 };
        m.torso + 2.0 * (m.thigh + m.shin + feet)
    }
}

/// Hip, knee and ankle angles of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LegAngles {
    pub gamma: f64,
    pub theta: f64,
    pub xi: f64,
}

impl LegAngles {
    pub fn new(gamma: f64, theta: f64, xi: f64) -> Self {
        Self { gamma, theta, xi }
    }

    pub fn thigh_angle(&self) -> f64 {
        self.gamma
    }

    pub fn shin_angle(&self) -> f64 {
        self.gamma - (PI - self.theta)
    }

    pub fn foot_pitch(&self) -> f64 {
        self.shin_angle() + self.xi
    }
}

/// Knee angle of an isosceles two-link leg spanning `lv`.
pub fn knee_for_span(lv: f64, l: f64) -> f64 {
    let c = (2.0 * l * l - lv * lv) / (2.0 * l * l);
    c.clamp(-1.0, 1.0).acos()
}

fn check_reach(lv: f64, geom: &RobotGeometry) -> Result<(), IkError> {
    let limit = geom.max_reach();
    if lv > limit {
        return Err(IkError::OutOfReach { length: lv, limit });
    }
    Ok(())
}

/// Stance-leg angles holding the hip at `h_c` with the CoM `x_t` ahead of
/// the support ankle. The foot is kept level.
pub fn ik_support(x_t: f64, geom: &RobotGeometry) -> Result<LegAngles, IkError> {
    let h = geom.h_c - geom.h_f;
    if h <= 0.0 {
        return Err(IkError::Geometry(format!("h_c - h_f = {h} must be > 0")));
    }
    let lv = x_t.hypot(h);
    check_reach(lv, geom)?;
    let theta = knee_for_span(lv, geom.leg_length());
    let gamma = (PI - theta) / 2.0 - (x_t / h).atan();
    Ok(LegAngles { gamma, theta, xi: (PI - theta) - gamma })
}

/// Swing-leg angles placing the sole at `(x_ft, z_ft)` while the hip sits at
/// `(x_t, h_c)`. The ankle is `h_f` above the sole and the foot is kept level.
pub fn ik_swing(x_t: f64, foot: (f64, f64), geom: &RobotGeometry) -> Result<LegAngles, IkError> {
    let (x_ft, z_ft) = foot;
    let h = geom.h_c - z_ft - geom.h_f;
    if h <= 0.0 {
        return Err(IkError::Geometry(format!("ankle target {h} m above the hip")));
    }
    let dx = x_ft - x_t;
    let lv = dx.hypot(h);
    check_reach(lv, geom)?;
    let theta = knee_for_span(lv, geom.leg_length());
    let gamma = (PI - theta) / 2.0 + (dx / h).atan();
    Ok(LegAngles { gamma, theta, xi: (PI - theta) - gamma })
}

/// Nested stance-ankle expression as printed in the source derivation.
///
/// Equals `(pi - theta) + gamma`; it tilts the foot by `2 gamma`, so
/// [`ik_support`] uses the level-foot angle instead.
pub fn support_ankle_printed(theta: f64, gamma: f64) -> f64 {
    PI / 2.0 - (PI / 2.0 - (PI - theta) - gamma)
}

/// Nested swing-ankle expression as printed in the source derivation.
///
/// Measures the foot from the perpendicular of the virtual leg, so it is
/// offset from the shin-relative angle used by [`ik_swing`].
pub fn swing_ankle_printed(theta: f64, lv2: f64, h: f64) -> f64 {
    PI / 2.0 - (PI - ((PI - theta) / 2.0 + (PI / 2.0 - (h / lv2).asin())))
}

/// Positions of the knee, ankle and sole for a leg hanging from `hip`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPoints {
    pub knee: (f64, f64),
    pub ankle: (f64, f64),
    pub sole: (f64, f64),
}

fn along(from: (f64, f64), angle: f64, len: f64) -> (f64, f64) {
    (from.0 + len * angle.sin(), from.1 - len * angle.cos())
}

pub fn fk_leg(angles: &LegAngles, geom: &RobotGeometry, hip: (f64, f64)) -> LegPoints {
    let knee = along(hip, angles.thigh_angle(), geom.l_thigh);
    let ankle = along(knee, angles.shin_angle(), geom.l_shin);
    let sole = along(ankle, angles.foot_pitch(), geom.h_f);
    LegPoints { knee, ankle, sole }
}

/// Per-joint angle ranges (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointLimits {
    pub hip: (f64, f64),
    pub knee: (f64, f64),
    pub ankle: (f64, f64),
}

impl Default for JointLimits {
    fn default() -> Self {
        Self { hip: (-1.5, 1.5), knee: (0.4, PI), ankle: (-1.2, 1.2) }
    }
}

/// Clamps each angle into its range; the knee is additionally capped at `pi`.
pub fn clamp_joint_limits(angles: LegAngles, limits: &JointLimits) -> LegAngles {
    let knee_hi = limits.knee.1.min(PI);
    LegAngles {
        gamma: angles.gamma.clamp(limits.hip.0, limits.hip.1),
        theta: angles.theta.clamp(limits.knee.0.min(knee_hi), knee_hi),
        xi: angles.xi.clamp(limits.ankle.0, limits.ankle.1),
    }
}
