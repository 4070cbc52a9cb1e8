//! Linear inverted pendulum dynamics.
//!
//! The point mass moves on a horizontal (or sloped) constraint so the
//! horizontal dynamics reduce to `x'' = (g / z_c) x`. All states here are
//! expressed relative to the support point, which sits at the origin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard gravity used when no other value is supplied.
pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Energies with magnitude below this are treated as a degenerate orbit.
pub const DEGENERATE_ENERGY: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LipmError {
    #[error("invalid pendulum parameter `{name}` = {value} (must be > 0)")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("degenerate orbit: orbital energy {energy:e} is too close to zero")]
    DegenerateOrbit { energy: f64 },
}

/// Constraint height, gravity and point mass of the pendulum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipmParams {
    z_c: f64,
    g: f64,
    mass: f64,
}

impl LipmParams {
    pub fn new(z_c: f64, g: f64, mass: f64) -> Result<Self, LipmError> {
        for (name, value) in [("z_c", z_c), ("g", g), ("mass", mass)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LipmError::InvalidParameter { name, value });
            }
        }
        Ok(Self { z_c, g, mass })
    }

    /// Unit-mass pendulum at height `z_c` under standard gravity.
    pub fn with_height(z_c: f64) -> Result<Self, LipmError> {
        Self::new(z_c, DEFAULT_GRAVITY, 1.0)
    }

    pub fn z_c(&self) -> f64 {
        self.z_c
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `g / z_c`, the squared natural frequency of the unstable mode.
    pub fn omega_sq(&self) -> f64 {
        self.g / self.z_c
    }
}

/// Time constant `T_c = sqrt(z_c / g)`.
pub fn time_constant(params: &LipmParams) -> f64 {
    (params.z_c / params.g).sqrt()
}

/// Horizontal CoM position and velocity relative to the support point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LipmState {
    pub x: f64,
    pub x_dot: f64,
}

impl LipmState {
    pub fn new(x: f64, x_dot: f64) -> Self {
        Self { x, x_dot }
    }
}

/// Closed-form propagation of the planar pendulum by `t` seconds.
///
/// Negative `t` runs the motion backwards in time.
pub fn evolve(state: LipmState, params: &LipmParams, t: f64) -> LipmState {
    let tc = time_constant(params);
    let (sh, ch) = ((t / tc).sinh(), (t / tc).cosh());
    LipmState {
        x: state.x * ch + tc * state.x_dot * sh,
        x_dot: state.x / tc * sh + state.x_dot * ch,
    }
}

/// Orbital energy `-(g / 2 z_c) x^2 + x_dot^2 / 2`, conserved along [`evolve`].
pub fn orbital_energy(state: LipmState, params: &LipmParams) -> f64 {
    -0.5 * params.omega_sq() * state.x * state.x + 0.5 * state.x_dot * state.x_dot
}

/// Sloped constraint line `z = k x + y_c` for the planar pendulum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintLine {
    k: f64,
    y_c: f64,
}

impl ConstraintLine {
    pub fn new(k: f64, y_c: f64) -> Result<Self, LipmError> {
        if !(y_c > 0.0 && y_c.is_finite()) {
            return Err(LipmError::InvalidParameter { name: "y_c", value: y_c });
        }
        Ok(Self { k, y_c })
    }

    pub fn slope(&self) -> f64 {
        self.k
    }

    pub fn intercept(&self) -> f64 {
        self.y_c
    }

    /// Height of the constraint at horizontal position `x`.
    pub fn height_at(&self, x: f64) -> f64 {
        self.k * x + self.y_c
    }
}

/// Horizontal acceleration on a sloped constraint line.
///
/// The slope cancels out: only the intercept acts as the pendulum height.
pub fn sloped_dynamics_accel(x: f64, line: &ConstraintLine, g: f64) -> f64 {
    g / line.y_c * x
}

/// Constraint plane `z = k_x x + k_y y + z_c` for the 3-D pendulum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintPlane {
    pub k_x: f64,
    pub k_y: f64,
    z_c: f64,
}

impl ConstraintPlane {
    pub fn new(k_x: f64, k_y: f64, z_c: f64) -> Result<Self, LipmError> {
        if !(z_c > 0.0 && z_c.is_finite()) {
            return Err(LipmError::InvalidParameter { name: "z_c", value: z_c });
        }
        Ok(Self { k_x, k_y, z_c })
    }

    pub fn horizontal(z_c: f64) -> Result<Self, LipmError> {
        Self::new(0.0, 0.0, z_c)
    }

    pub fn z_c(&self) -> f64 {
        self.z_c
    }
}

/// CoM state of the 3-D pendulum together with the virtual input torques
/// about the x and y axes, held constant over an integration step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Lipm3dState {
    pub x: f64,
    pub y: f64,
    pub x_dot: f64,
    pub y_dot: f64,
    pub u_x: f64,
    pub u_y: f64,
}

impl Lipm3dState {
    pub fn torque_free(x: f64, y: f64, x_dot: f64, y_dot: f64) -> Self {
        Self { x, y, x_dot, y_dot, u_x: 0.0, u_y: 0.0 }
    }

    /// Planar state of the x (sagittal) component.
    pub fn sagittal(&self) -> LipmState {
        LipmState::new(self.x, self.x_dot)
    }

    /// Planar state of the y (lateral) component.
    pub fn lateral(&self) -> LipmState {
        LipmState::new(self.y, self.y_dot)
    }
}

/// Orbital energies of the 3-D pendulum in a frame rotated by `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalEnergyPair {
    pub e_x: f64,
    pub e_y: f64,
    pub theta: f64,
}

pub fn orbital_energy_rotated(
    state: &Lipm3dState,
    plane: &ConstraintPlane,
    theta: f64,
    g: f64,
) -> OrbitalEnergyPair {
    let (s, c) = theta.sin_cos();
    let w2 = g / plane.z_c;
    let (xr, yr) = (c * state.x + s * state.y, -s * state.x + c * state.y);
    let (vxr, vyr) = (c * state.x_dot + s * state.y_dot, -s * state.x_dot + c * state.y_dot);
    OrbitalEnergyPair {
        e_x: -0.5 * w2 * xr * xr + 0.5 * vxr * vxr,
        e_y: -0.5 * w2 * yr * yr + 0.5 * vyr * vyr,
        theta,
    }
}

/// Frame rotation in which the trajectory's hyperbola is axis aligned.
///
/// In that frame the cross term `(g/z_c) x y - x_dot y_dot` vanishes, which
/// is the stationarity condition of the rotated energies. The cross term is
/// conserved along torque-free motion, so the angle is too.
pub fn principal_angle(state: &Lipm3dState, plane: &ConstraintPlane, g: f64) -> f64 {
    let w2 = g / plane.z_c;
    let num = 2.0 * (state.x_dot * state.y_dot - w2 * state.x * state.y);
    let den = w2 * (state.y * state.y - state.x * state.x)
        - (state.y_dot * state.y_dot - state.x_dot * state.x_dot);
    0.5 * num.atan2(den)
}

/// Residual of `(g / 2 z_c E_x) x^2 + (g / 2 z_c E_y) y^2 + 1`.
///
/// Zero on a torque-free trajectory when `(x, y)` and the energies are taken
/// in the frame returned by [`principal_angle`].
pub fn hyperbola_residual(
    x: f64,
    y: f64,
    energies: &OrbitalEnergyPair,
    plane: &ConstraintPlane,
    g: f64,
) -> Result<f64, LipmError> {
    for energy in [energies.e_x, energies.e_y] {
        if energy.abs() < DEGENERATE_ENERGY {
            return Err(LipmError::DegenerateOrbit { energy });
        }
    }
    let a = g / (2.0 * plane.z_c);
    Ok(a / energies.e_x * x * x + a / energies.e_y * y * y + 1.0)
}

fn accel_3d(s: &Lipm3dState, z_c: f64, g: f64, mass: f64) -> (f64, f64) {
    let w2 = g / z_c;
    (
        w2 * s.x + s.u_y / (mass * z_c),
        w2 * s.y - s.u_x / (mass * z_c),
    )
}

/// One classical RK4 step of the 3-D pendulum with the torques held fixed.
pub fn evolve_3d(
    state: &Lipm3dState,
    plane: &ConstraintPlane,
    params: &LipmParams,
    dt: f64,
) -> Lipm3dState {
    let (z_c, g, m) = (plane.z_c, params.g, params.mass);
    let shifted = |base: &Lipm3dState, d: [f64; 4], h: f64| Lipm3dState {
        x: base.x + h * d[0],
        y: base.y + h * d[1],
        x_dot: base.x_dot + h * d[2],
        y_dot: base.y_dot + h * d[3],
        ..*base
    };
    let deriv = |s: &Lipm3dState| {
        let (ax, ay) = accel_3d(s, z_c, g, m);
        [s.x_dot, s.y_dot, ax, ay]
    };

    let k1 = deriv(state);
    let k2 = deriv(&shifted(state, k1, 0.5 * dt));
    let k3 = deriv(&shifted(state, k2, 0.5 * dt));
    let k4 = deriv(&shifted(state, k3, dt));
    let mut d = [0.0; 4];
    for i in 0..4 {
        d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    shifted(state, d, dt)
}

/// ZMP on a horizontal floor produced by the virtual torques.
pub fn zmp_from_torque(u_x: f64, u_y: f64, params: &LipmParams) -> (f64, f64) {
    let mg = params.mass * params.g;
    (-u_y / mg, u_x / mg)
}

/// ZMP implied by a CoM position and its acceleration along one axis.
pub fn zmp_from_trajectory(x: f64, x_ddot: f64, params: &LipmParams) -> f64 {
    x - params.z_c / params.g * x_ddot
}

/// CoM acceleration produced by holding the ZMP at `p`.
pub fn accel_from_zmp(x: f64, p: f64, params: &LipmParams) -> f64 {
    params.omega_sq() * (x - p)
}
