//! Geometric primitives and predicates: vectors, rigid transforms, convex
//! polyhedra, axis-aligned and oriented boxes, capsules ("cigars"), exact
//! distance queries and boolean intersection tests.
//!
//! All predicates use closed-set semantics: shapes that merely touch count as
//! intersecting. Distance comparisons against a radius or against zero use
//! [`DIST_TOL`] so that exact tangency is classified as contact.

mod gjk;
mod obb;

pub use gjk::{convex_convex_distance, gjk_distance};
pub use obb::approx_min_obb;

use serde::{Deserialize, Serialize};



/// Tolerance for orthonormality and rigidity checks.
pub const ORTHO_TOL: f64 = 1e-9;
/// Tolerance for distance-based predicates (touching counts as contact).
pub const DIST_TOL: f64 = 1e-9;

/// A point or direction in workspace coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            Vec3::ZERO
        } else {
            self / n
        }
    }

    pub fn component_min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn component_max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// A proper rigid motion: rotation (orthonormal, det +1) plus translation.
///
/// The rotation is stored as a row-major 3x3 matrix; `apply` computes
/// `R * p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: Vec3::ZERO,
        }
    }

    pub fn from_translation(t: Vec3) -> Self {
        RigidTransform { translation: t, ..Self::identity() }
    }

    /// Rotation by `angle` radians about a unit `axis` (Rodrigues), no
    /// translation.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let u = axis.normalized();
        let (s, c) = angle.sin_cos();
        let ic = 1.0 - c;
        let (x, y, z) = (u.x, u.y, u.z);
        RigidTransform {
            rotation: [
                [c + x * x * ic, x * y * ic - z * s, x * z * ic + y * s],
                [y * x * ic + z * s, c + y * y * ic, y * z * ic - x * s],
                [z * x * ic - y * s, z * y * ic + x * s, c + z * z * ic],
            ],
            translation: Vec3::ZERO,
        }
    }

    pub fn rotate(self, p: Vec3) -> Vec3 {
        let r = &self.rotation;
        Vec3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z,
        )
    }

    pub fn apply(self, p: Vec3) -> Vec3 {
        self.rotate(p) + self.translation
    }

    /// Composition: `(a.compose(b)).apply(p) == a.apply(b.apply(p))`.
    pub fn compose(self, o: RigidTransform) -> RigidTransform {
        let a = &self.rotation;
        let b = &o.rotation;
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        RigidTransform { rotation: r, translation: self.apply(o.translation) }
    }

    pub fn inverse(self) -> RigidTransform {
        let r = &self.rotation;
        let rt = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        let inv = RigidTransform { rotation: rt, translation: Vec3::ZERO };
        let t = inv.rotate(self.translation);
        RigidTransform { rotation: rt, translation: -t }
    }

    /// Checks orthonormality and determinant +1 within [`ORTHO_TOL`].
    pub fn is_proper(&self) -> bool {
        let r = &self.rotation;
        let rows = [
            Vec3::new(r[0][0], r[0][1], r[0][2]),
            Vec3::new(r[1][0], r[1][1], r[1][2]),
            Vec3::new(r[2][0], r[2][1], r[2][2]),
        ];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                if (rows[i].dot(rows[j]) - want).abs() > ORTHO_TOL {
                    return false;
                }
            }
        }
        let det = rows[0].dot(rows[1].cross(rows[2]));
        (det - 1.0).abs() <= ORTHO_TOL
    }
}

/// Axis-aligned bounding box, `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb { min, max }
    }

    pub fn from_points<I: IntoIterator<Item = Vec3>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Aabb { min: first, max: first };
        for p in it {
            b.min = b.min.component_min(p);
            b.max = b.max.component_max(p);
        }
        Some(b)
    }

    pub fn union(self, o: Aabb) -> Aabb {
        Aabb { min: self.min.component_min(o.min), max: self.max.component_max(o.max) }
    }

    /// Closed-set overlap test: shared faces count.
    pub fn intersects(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x
            && o.min.x <= self.max.x
            && self.min.y <= o.max.y
            && o.min.y <= self.max.y
            && self.min.z <= o.max.z
            && o.min.z <= self.max.z
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, o: &Aabb) -> bool {
        self.contains(o.min) && self.contains(o.max)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// Index of the longest axis (ties broken toward x, then y).
    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (lo, hi) = (self.min, self.max);
        [
            Vec3::new(lo.x, lo.y, lo.z),
            Vec3::new(hi.x, lo.y, lo.z),
            Vec3::new(lo.x, hi.y, lo.z),
            Vec3::new(hi.x, hi.y, lo.z),
            Vec3::new(lo.x, lo.y, hi.z),
            Vec3::new(hi.x, lo.y, hi.z),
            Vec3::new(lo.x, hi.y, hi.z),
            Vec3::new(hi.x, hi.y, hi.z),
        ]
    }

    /// Exact distance from a point to this (closed) box.
    pub fn distance_to_point(&self, p: Vec3) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        let dz = (self.min.z - p.z).max(0.0).max(p.z - self.max.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// A convex polyhedron as its hull vertices in a local frame plus a pose.
///
/// Vertices are expected to be extreme points (no interior vertices); the
/// intersection tests operate on the convex hull of the vertex set either
/// way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolyhedron {
    pub vertices: Vec<Vec3>,
    pub pose: RigidTransform,
}

impl ConvexPolyhedron {
    pub fn new(vertices: Vec<Vec3>, pose: RigidTransform) -> Self {
        debug_assert!(!vertices.is_empty());
        ConvexPolyhedron { vertices, pose }
    }

    /// Axis-aligned box with the given half extents, centered at the local
    /// origin.
    pub fn box_shape(half: Vec3) -> Self {
        let b = Aabb::new(-half, half);
        ConvexPolyhedron::new(b.corners().to_vec(), RigidTransform::identity())
    }

    /// Box spanning `[min, max]` in the local frame.
    pub fn box_from_corners(min: Vec3, max: Vec3) -> Self {
        ConvexPolyhedron::new(Aabb::new(min, max).corners().to_vec(), RigidTransform::identity())
    }

    pub fn world_vertices(&self) -> Vec<Vec3> {
        self.vertices.iter().map(|&v| self.pose.apply(v)).collect()
    }
}

/// Box with arbitrary orientation. `axes` are orthonormal; `half_extents`
/// are sorted descending so `axes[0]` is the long axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Vec3,
    pub axes: [Vec3; 3],
    pub half_extents: [f64; 3],
}

impl Obb {
    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents[0] * self.half_extents[1] * self.half_extents[2]
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::ZERO; 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *c = self.center
                + self.axes[0] * (sx * self.half_extents[0])
                + self.axes[1] * (sy * self.half_extents[1])
                + self.axes[2] * (sz * self.half_extents[2]);
        }
        out
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        let d = p - self.center;
        (0..3).all(|i| d.dot(self.axes[i]).abs() <= self.half_extents[i] + tol)
    }
}

/// Capsule: the Minkowski sum of a segment and a ball. A degenerate segment
/// makes it a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cigar {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Cigar {
    pub fn new(a: Vec3, b: Vec3, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Cigar { a, b, radius }
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        point_segment_distance(p, self.a, self.b) <= self.radius + tol
    }
}

/// Shapes with a finite axis-aligned bound.
pub trait Bounded {
    fn aabb(&self) -> Aabb;
}

impl Bounded for ConvexPolyhedron {
    /// Tight: min/max of the world-frame vertices.
    fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().map(|&v| self.pose.apply(v)))
            .expect("polyhedron has at least one vertex")
    }
}

impl Bounded for Cigar {
    /// Tight: segment extent inflated by the radius on each axis.
    fn aabb(&self) -> Aabb {
        let r = Vec3::new(self.radius, self.radius, self.radius);
        Aabb {
            min: self.a.component_min(self.b) - r,
            max: self.a.component_max(self.b) + r,
        }
    }
}

impl Bounded for Obb {
    fn aabb(&self) -> Aabb {
        Aabb::from_points(self.corners()).expect("eight corners")
    }
}

impl Bounded for Aabb {
    fn aabb(&self) -> Aabb {
        *self
    }
}

/// Re-poses a polyhedron: the result has pose `t ∘ p.pose`, same local
/// vertices.
pub fn apply_transform(t: RigidTransform, p: &ConvexPolyhedron) -> ConvexPolyhedron {
    ConvexPolyhedron { vertices: p.vertices.clone(), pose: t.compose(p.pose) }
}

/// Exact distance between a point and a closed segment.
pub fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Exact minimum distance between two closed segments.
///
/// Clamped closest-point computation on the two segment parameters; handles
/// degenerate (point) segments and the parallel case.
pub fn segment_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(r);

    let (s, t);
    if a == 0.0 && e == 0.0 {
        return (p1 - p2).norm();
    }
    if a == 0.0 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e == 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s_ = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm()
}

/// Exact distance from a closed segment to a closed axis-aligned box.
pub fn segment_aabb_distance(a: Vec3, b: Vec3, box_: &Aabb) -> f64 {
    if box_.contains(a) || box_.contains(b) {
        return 0.0;
    }
    let corners = box_.corners();
    gjk_distance(&[a, b], &corners)
}

/// Closed-set intersection of two convex polyhedra: true iff the hulls of
/// the world-frame vertex sets come within [`DIST_TOL`].
pub fn intersect_convex_convex(a: &ConvexPolyhedron, b: &ConvexPolyhedron) -> bool {
    convex_convex_distance(a, b) <= DIST_TOL
}

/// Closed-set intersection of a cigar and an axis-aligned box: exact, via
/// the segment-box distance.
pub fn intersect_cigar_aabb(c: &Cigar, b: &Aabb) -> bool {
    segment_aabb_distance(c.a, c.b, b) <= c.radius + DIST_TOL
}

/// Closed-set intersection of a cigar and a convex polyhedron.
pub fn intersect_cigar_convex(c: &Cigar, p: &ConvexPolyhedron) -> bool {
    let verts = p.world_vertices();
    gjk_distance(&[c.a, c.b], &verts) <= c.radius + DIST_TOL
}

/// Smallest-cigar cover of an oriented box.
///
/// The axis is fixed to the box's longest axis through its center. For half
/// extents `(a, b, c)` (sorted descending) and capsule half length
/// `h ∈ [0, a]`, the radius `r(h) = sqrt((a-h)^2 + b^2 + c^2)` covers every
/// box point, so the capsule volume `V(h) = pi r^2 (2h) + 4/3 pi r^3` is
/// minimized over `h` on a one-dimensional grid with local refinement. The
/// result never exceeds the baseline candidate `h = a, r = sqrt(b^2+c^2)`.
pub fn enclosing_cigar_of_obb(box_: &Obb) -> Cigar {
    let [a, b, c] = box_.half_extents;
    let r_of = |h: f64| ((a - h).max(0.0).powi(2) + b * b + c * c).sqrt();
    let vol = |h: f64| {
        let r = r_of(h);
        std::f64::consts::PI * r * r * (2.0 * h) + 4.0 / 3.0 * std::f64::consts::PI * r.powi(3)
    };

    // Coarse scan including both endpoints, then bisection-style refinement.
    let mut best_h = a;
    let mut best_v = vol(a);
    let steps = 128;
    for i in 0..=steps {
        let h = a * i as f64 / steps as f64;
        let v = vol(h);
        if v < best_v {
            best_v = v;
            best_h = h;
        }
    }
    let mut step = a / steps as f64;
    while step > 1e-9 * (a + 1.0) {
        for cand in [best_h - step * 0.5, best_h + step * 0.5] {
            let h = cand.clamp(0.0, a);
            let v = vol(h);
            if v < best_v {
                best_v = v;
                best_h = h;
            }
        }
        step *= 0.5;
    }

    let axis = box_.axes[0];
    Cigar::new(
        box_.center - axis * best_h,
        box_.center + axis * best_h,
        r_of(best_h),
    )
}

/// Builds an [`Obb`] from a frame (three orthonormal axes) and the points it
/// must contain; extents are the exact min/max along each axis.
pub(crate) fn obb_from_frame(axes: [Vec3; 3], points: &[Vec3]) -> Obb {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &p in points {
        for i in 0..3 {
            let d = p.dot(axes[i]);
            lo[i] = lo[i].min(d);
            hi[i] = hi[i].max(d);
        }
    }
    let mut center = Vec3::ZERO;
    let mut half = [0.0; 3];
    for i in 0..3 {
        center = center + axes[i] * ((lo[i] + hi[i]) * 0.5);
        half[i] = (hi[i] - lo[i]) * 0.5;
    }
    // Sort extents descending, permuting axes along, then restore a
    // right-handed frame.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| half[j].partial_cmp(&half[i]).unwrap());
    let axes = [axes[order[0]], axes[order[1]], axes[order[2]]];
    let half = [half[order[0]], half[order[1]], half[order[2]]];
    let mut axes = axes;
    if axes[0].dot(axes[1].cross(axes[2])) < 0.0 {
        axes[2] = -axes[2];
    }
    Obb { center, axes, half_extents: half }
}
