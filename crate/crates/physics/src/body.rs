use nalgebra::Vector2;

use crate::PhysicsError;

/// Index of a body inside its [`World`](crate::World).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BodyId(pub usize);

/// Rotates `v` counter-clockwise by `angle`.
pub(crate) fn rotate(angle: f64, v: Vector2<f64>) -> Vector2<f64> {
    let (s, c) = angle.sin_cos();
    Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// 2-D cross product of two vectors.
pub(crate) fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Cross product of a scalar angular velocity with a vector.
pub(crate) fn cross_sv(w: f64, r: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-w * r.y, w * r.x)
}

/// Rectangular rigid body in the x-z plane. `position.y` is the height.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBody {
    pub name: String,
    pub position: Vector2<f64>,
    pub angle: f64,
    pub velocity: Vector2<f64>,
    pub omega: f64,
    pub half_extents: Vector2<f64>,
    pub friction: f64,
    pub collides_with_ground: bool,
    mass: f64,
    inertia: f64,
    inv_mass: f64,
    inv_inertia: f64,
}

impl RigidBody {
    /// Dynamic box of the given full size with uniform density.
    pub fn dynamic_box(
        name: impl Into<String>,
        size: (f64, f64),
        mass: f64,
        position: Vector2<f64>,
        angle: f64,
    ) -> Result<Self, PhysicsError> {
        let name = name.into();
        if !(size.0 > 0.0 && size.1 > 0.0) {
            return Err(PhysicsError::InvalidBody(format!("{name}: size must be positive")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(PhysicsError::InvalidBody(format!("{name}: mass must be > 0")));
        }
        let inertia = mass * (size.0 * size.0 + size.1 * size.1) / 12.0;
        Ok(Self {
            name,
            position,
            angle,
            velocity: Vector2::zeros(),
            omega: 0.0,
            half_extents: Vector2::new(size.0 / 2.0, size.1 / 2.0),
            friction: 0.1,
            collides_with_ground: true,
            mass,
            inertia,
            inv_mass: 1.0 / mass,
            inv_inertia: 1.0 / inertia,
        })
    }

    /// Immovable body. Its nominal mass still counts toward the CoM.
    pub fn fixed(self) -> Self {
        Self { inv_mass: 0.0, inv_inertia: 0.0, velocity: Vector2::zeros(), omega: 0.0, ..self }
    }

    pub fn with_friction(self, friction: f64) -> Self {
        Self { friction, ..self }
    }

    pub fn without_ground_contact(self) -> Self {
        Self { collides_with_ground: false, ..self }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn inv_mass(&self) -> f64 {
        self.inv_mass
    }

    pub fn inv_inertia(&self) -> f64 {
        self.inv_inertia
    }

    pub fn is_static(&self) -> bool {
        self.inv_mass == 0.0
    }

    /// World position of a point given in body coordinates.
    pub fn world_point(&self, local: Vector2<f64>) -> Vector2<f64> {
        self.position + rotate(self.angle, local)
    }

    /// Velocity of a body-fixed point at world offset `r` from the centre.
    pub fn point_velocity(&self, r: Vector2<f64>) -> Vector2<f64> {
        self.velocity + cross_sv(self.omega, r)
    }

    /// Corners in body coordinates, counter-clockwise from bottom left.
    pub fn local_corners(&self) -> [Vector2<f64>; 4] {
        let h = self.half_extents;
        [
            Vector2::new(-h.x, -h.y),
            Vector2::new(h.x, -h.y),
            Vector2::new(h.x, h.y),
            Vector2::new(-h.x, h.y),
        ]
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity.norm_squared() + 0.5 * self.inertia * self.omega * self.omega
    }
}
