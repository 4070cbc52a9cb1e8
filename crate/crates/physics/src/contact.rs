use nalgebra::{Matrix2, Vector2};

use crate::body::{cross, BodyId, RigidBody};

const NORMAL: Vector2<f64> = Vector2::new(0.0, 1.0);
const TANGENT: Vector2<f64> = Vector2::new(1.0, 0.0);
/// Upper bound on the condition number accepted by the two-point solver.
const MAX_CONDITION: f64 = 1000.0;

/// One box corner touching (or about to touch) the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    pub body: BodyId,
    pub corner: usize,
    /// World position at the start of the step.
    pub point: Vector2<f64>,
    pub separation: f64,
    pub normal_impulse: f64,
    pub tangent_impulse: f64,
    pub friction: f64,
    /// Geometrically touching or carrying load.
    pub touching: bool,
}

/// Ground contacts produced by the last step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContactState {
    pub points: Vec<ContactPoint>,
}

impl ContactState {
    pub fn touching(&self, body: BodyId) -> bool {
        self.points.iter().any(|p| p.body == body && p.touching)
    }

    pub fn normal_impulse(&self, body: BodyId) -> f64 {
        self.points.iter().filter(|p| p.body == body).map(|p| p.normal_impulse).sum()
    }

    pub fn total_normal_impulse(&self) -> f64 {
        self.points.iter().map(|p| p.normal_impulse).sum()
    }

    pub fn is_empty(&self) -> bool {
        !self.points.iter().any(|p| p.touching)
    }
}

struct PointSolver {
    corner: usize,
    local: Vector2<f64>,
    r: Vector2<f64>,
    normal_mass: f64,
    tangent_mass: f64,
    velocity_bias: f64,
    normal_impulse: f64,
    tangent_impulse: f64,
    start_point: Vector2<f64>,
}

/// All ground contacts of one body.
pub(crate) struct Manifold {
    pub body: usize,
    friction: f64,
    points: Vec<PointSolver>,
    block: Option<(Matrix2<f64>, Matrix2<f64>)>,
}

fn inverse2(k: &Matrix2<f64>) -> Matrix2<f64> {
    let det = k.determinant();
    let inv = if det != 0.0 { 1.0 / det } else { 0.0 };
    Matrix2::new(inv * k[(1, 1)], -inv * k[(0, 1)], -inv * k[(1, 0)], inv * k[(0, 0)])
}

impl Manifold {
    /// Collects corners within `margin` of the ground and applies warm starts.
    pub fn collect(
        body_index: usize,
        body: &mut RigidBody,
        cache: &[(f64, f64); 4],
        ground_friction: f64,
        margin: f64,
        inv_dt: f64,
    ) -> Option<Self> {
        if !body.collides_with_ground || body.is_static() {
            return None;
        }
        let (m, i) = (body.inv_mass(), body.inv_inertia());
        let mut points = Vec::new();
        for (corner, local) in body.local_corners().into_iter().enumerate() {
            let p = body.world_point(local);
            let sep = p.y;
            if sep >= margin {
                continue;
            }
            let r = p - body.position;
            let rn = cross(r, NORMAL);
            let rt = cross(r, TANGENT);
            let kn = m + i * rn * rn;
            let kt = m + i * rt * rt;
            points.push(PointSolver {
                corner,
                local,
                r,
                normal_mass: if kn > 0.0 { 1.0 / kn } else { 0.0 },
                tangent_mass: if kt > 0.0 { 1.0 / kt } else { 0.0 },
                velocity_bias: -sep.max(0.0) * inv_dt,
                normal_impulse: cache[corner].0,
                tangent_impulse: cache[corner].1,
                start_point: p,
            });
        }
        if points.is_empty() {
            return None;
        }

        let block = if points.len() == 2 {
            let (rn1, rn2) = (cross(points[0].r, NORMAL), cross(points[1].r, NORMAL));
            let k11 = m + i * rn1 * rn1;
            let k22 = m + i * rn2 * rn2;
            let k12 = m + i * rn1 * rn2;
            if k11 * k11 < MAX_CONDITION * (k11 * k22 - k12 * k12) {
                let k = Matrix2::new(k11, k12, k12, k22);
                Some((k, inverse2(&k)))
            } else {
                None
            }
        } else {
            None
        };

        let friction = (body.friction * ground_friction).sqrt();
        let manifold = Self { body: body_index, friction, points, block };
        for p in &manifold.points {
            let impulse = p.normal_impulse * NORMAL + p.tangent_impulse * TANGENT;
            body.velocity += m * impulse;
            body.omega += i * cross(p.r, impulse);
        }
        Some(manifold)
    }

    pub fn solve_velocity(&mut self, body: &mut RigidBody) {
        let (m, i) = (body.inv_mass(), body.inv_inertia());

        match self.block {
            Some((k, normal_mass)) => self.solve_block(body, &k, &normal_mass),
            None => {
                for p in &mut self.points {
                    let vn = body.point_velocity(p.r).dot(&NORMAL);
                    let old = p.normal_impulse;
                    p.normal_impulse = (old - p.normal_mass * (vn - p.velocity_bias)).max(0.0);
                    let impulse = (p.normal_impulse - old) * NORMAL;
                    body.velocity += m * impulse;
                    body.omega += i * cross(p.r, impulse);
                }
            }
        }

        for p in &mut self.points {
            let vt = body.point_velocity(p.r).dot(&TANGENT);
            let max = self.friction * p.normal_impulse;
            let old = p.tangent_impulse;
            p.tangent_impulse = (old - p.tangent_mass * vt).clamp(-max, max);
            let impulse = (p.tangent_impulse - old) * TANGENT;
            body.velocity += m * impulse;
            body.omega += i * cross(p.r, impulse);
        }
    }

    /// Exact two-point normal solve by enumerating the complementarity cases.
    fn solve_block(&mut self, body: &mut RigidBody, k: &Matrix2<f64>, normal_mass: &Matrix2<f64>) {
        let (m, i) = (body.inv_mass(), body.inv_inertia());
        let (p1, p2) = (&self.points[0], &self.points[1]);
        let a = Vector2::new(p1.normal_impulse, p2.normal_impulse);
        let vn1 = body.point_velocity(p1.r).dot(&NORMAL);
        let vn2 = body.point_velocity(p2.r).dot(&NORMAL);
        let b = Vector2::new(vn1 - p1.velocity_bias, vn2 - p2.velocity_bias) - k * a;

        // both active; second resting; first resting; both separating
        let x1 = -(normal_mass * b);
        let x2 = Vector2::new(-p1.normal_mass * b.x, 0.0);
        let x3 = Vector2::new(0.0, -p2.normal_mass * b.y);
        let cases = [
            (x1, x1.x >= 0.0 && x1.y >= 0.0),
            (x2, x2.x >= 0.0 && k[(1, 0)] * x2.x + b.y >= 0.0),
            (x3, x3.y >= 0.0 && k[(0, 1)] * x3.y + b.x >= 0.0),
            (Vector2::zeros(), b.x >= 0.0 && b.y >= 0.0),
        ];
        for (x, feasible) in cases {
            if !feasible {
                continue;
            }
            let d = x - a;
            let (r1, r2) = (self.points[0].r, self.points[1].r);
            let (i1, i2) = (d.x * NORMAL, d.y * NORMAL);
            body.velocity += m * (i1 + i2);
            body.omega += i * (cross(r1, i1) + cross(r2, i2));
            self.points[0].normal_impulse = x.x;
            self.points[1].normal_impulse = x.y;
            return;
        }
    }

    pub fn store(&self, cache: &mut [(f64, f64); 4]) {
        *cache = [(0.0, 0.0); 4];
        for p in &self.points {
            cache[p.corner] = (p.normal_impulse, p.tangent_impulse);
        }
    }

    pub fn report(&self, slop: f64, out: &mut Vec<ContactPoint>) {
        for p in &self.points {
            let separation = p.start_point.y;
            out.push(ContactPoint {
                body: BodyId(self.body),
                corner: p.corner,
                point: p.start_point,
                separation,
                normal_impulse: p.normal_impulse,
                tangent_impulse: p.tangent_impulse,
                friction: self.friction,
                touching: p.normal_impulse > 0.0 || separation <= slop,
            });
        }
    }

    /// Pushes penetrating corners out; returns the deepest remaining separation.
    pub fn solve_position(&self, body: &mut RigidBody, baumgarte: f64, slop: f64, max_correction: f64) -> f64 {
        let (m, i) = (body.inv_mass(), body.inv_inertia());
        let mut min_sep = f64::INFINITY;
        for p in &self.points {
            let point = body.world_point(p.local);
            let sep = point.y;
            min_sep = min_sep.min(sep);
            let r = point - body.position;
            let rn = cross(r, NORMAL);
            let k = m + i * rn * rn;
            let c = (baumgarte * (sep + slop)).clamp(-max_correction, 0.0);
            let impulse = if k > 0.0 { -c / k } else { 0.0 };
            body.position += m * impulse * NORMAL;
            body.angle += i * rn * impulse;
        }
        min_sep
    }
}
