//! Robot models, configuration space, forward kinematics, interpolation and
//! the fine-grained collision checks used by every updater and planner.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::Error;
use crate::geom::{
    intersect_convex_convex, Aabb, Bounded, ConvexPolyhedron, RigidTransform, Vec3,
};
use crate::stats;
use crate::Result;

/// One degree of freedom: translational or angular, with an optional bounded
/// range and a metric weight.
///
/// Angular values wrap on `[-pi, pi)`; a bounded angular DOF restricts
/// sampling but distances stay wrap-aware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofSpec {
    pub kind: DofKind,
    pub range: Option<(f64, f64)>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofKind {
    Translational,
    Angular,
}

impl DofSpec {
    pub fn translational(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        DofSpec { kind: DofKind::Translational, range: Some((lo, hi)), weight: 1.0 }
    }

    pub fn angular() -> Self {
        DofSpec { kind: DofKind::Angular, range: None, weight: 1.0 }
    }

    pub fn with_weight(mut self, w: f64) -> Self {
        debug_assert!(w > 0.0);
        self.weight = w;
        self
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if w >= std::f64::consts::PI {
        w = -std::f64::consts::PI;
    }
    w
}

/// Shortest signed angular difference `b - a`, in `[-pi, pi)`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(b - a)
}

/// A revolute joint of a serial chain: a fixed offset from the parent frame
/// followed by a rotation about `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub axis: Vec3,
    pub origin: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RobotKind {
    /// A rigid body set moved as one: 3 translational DOFs plus 0..=3
    /// rotation angles (applied about the world z, y, x axes in that order).
    FreeFlyer,
    /// A chain of revolute joints, one body per link. `joints[i]` places
    /// link `i` relative to link `i-1`.
    SerialChain { joints: Vec<Joint> },
}

/// Kinematic description: bodies in their local frames plus the DOF list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub kind: RobotKind,
    pub bodies: Vec<ConvexPolyhedron>,
    pub dofs: Vec<DofSpec>,
}

impl RobotModel {
    /// Free flyer with the given bodies and per-axis translation ranges;
    /// `angular` adds that many rotation DOFs (0..=3).
    pub fn free_flyer(bodies: Vec<ConvexPolyhedron>, bounds: &Aabb, angular: usize) -> Self {
        assert!(!bodies.is_empty());
        assert!(angular <= 3);
        let mut dofs = vec![
            DofSpec::translational(bounds.min.x, bounds.max.x),
            DofSpec::translational(bounds.min.y, bounds.max.y),
            DofSpec::translational(bounds.min.z, bounds.max.z),
        ];
        let reach = max_body_radius(&bodies).max(1e-6);
        for _ in 0..angular {
            dofs.push(DofSpec::angular().with_weight(reach));
        }
        RobotModel { kind: RobotKind::FreeFlyer, bodies, dofs }
    }

    /// Serial chain with one angular DOF per joint; bodies are per-link.
    pub fn serial_chain(bodies: Vec<ConvexPolyhedron>, joints: Vec<Joint>) -> Self {
        assert_eq!(bodies.len(), joints.len(), "one body per link");
        assert!(!bodies.is_empty());
        let reach = chain_reach(&bodies, &joints).max(1e-6);
        let dofs = vec![DofSpec::angular().with_weight(reach); joints.len()];
        RobotModel { kind: RobotKind::SerialChain { joints }, bodies, dofs }
    }

    pub fn dof_count(&self) -> usize {
        self.dofs.len()
    }

    fn check_dims(&self, c: &Configuration) -> Result<()> {
        if c.values.len() != self.dof_count() {
            return Err(Error::DimensionMismatch {
                expected: self.dof_count(),
                got: c.values.len(),
            });
        }
        Ok(())
    }
}

fn max_body_radius(bodies: &[ConvexPolyhedron]) -> f64 {
    bodies
        .iter()
        .flat_map(|b| b.vertices.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

fn chain_reach(bodies: &[ConvexPolyhedron], joints: &[Joint]) -> f64 {
    let offsets: f64 = joints.iter().map(|j| j.origin.translation.norm()).sum();
    offsets + max_body_radius(bodies)
}

/// A point of the configuration space: one value per DOF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub values: Vec<f64>,
}

impl Configuration {
    pub fn new(values: Vec<f64>) -> Self {
        Configuration { values }
    }
}

/// Identifier of an obstacle: its index in the environment's obstacle list.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ObstacleId(pub u32);

/// A posed obstacle: a set of convex bodies sharing one rigid pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub name: String,
    pub bodies: Vec<ConvexPolyhedron>,
    pub pose: RigidTransform,
}

impl Obstacle {
    /// World-frame AABB over all bodies at the current pose.
    pub fn aabb(&self) -> Aabb {
        self.bodies
            .iter()
            .map(|b| crate::geom::apply_transform(self.pose, b).aabb())
            .reduce(|a, b| a.union(b))
            .expect("obstacle has at least one body")
    }

    pub fn posed_bodies(&self) -> Vec<ConvexPolyhedron> {
        self.bodies
            .iter()
            .map(|b| crate::geom::apply_transform(self.pose, b))
            .collect()
    }
}

/// The workspace: a bounding box and the posed obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bounds: Aabb,
    pub obstacles: Vec<Obstacle>,
}

impl Environment {
    pub fn new(bounds: Aabb, obstacles: Vec<Obstacle>) -> Self {
        let mut names = BTreeSet::new();
        for o in &obstacles {
            assert!(names.insert(o.name.clone()), "duplicate obstacle name {:?}", o.name);
            if !bounds.contains_box(&o.aabb()) {
                log::warn!("obstacle {:?} extends outside the environment bounds", o.name);
            }
        }
        Environment { bounds, obstacles }
    }

    pub fn obstacle(&self, id: ObstacleId) -> Result<&Obstacle> {
        self.obstacles.get(id.0 as usize).ok_or(Error::UnknownObstacle(id.0))
    }

    pub fn obstacle_mut(&mut self, id: ObstacleId) -> Result<&mut Obstacle> {
        self.obstacles.get_mut(id.0 as usize).ok_or(Error::UnknownObstacle(id.0))
    }

    pub fn obstacle_ids(&self) -> impl Iterator<Item = ObstacleId> + '_ {
        (0..self.obstacles.len() as u32).map(ObstacleId)
    }
}

/// Restricts collision checks to a subset of obstacles; `All` matches the
/// static-environment case, `Only` the "changed obstacles only" case.
#[derive(Debug, Clone, Copy)]
pub enum ObstacleFilter<'a> {
    All,
    Only(&'a BTreeSet<ObstacleId>),
    Single(ObstacleId),
}

impl ObstacleFilter<'_> {
    pub fn admits(&self, id: ObstacleId) -> bool {
        match self {
            ObstacleFilter::All => true,
            ObstacleFilter::Only(set) => set.contains(&id),
            ObstacleFilter::Single(s) => *s == id,
        }
    }
}

/// Uniform random configuration inside the DOF ranges; unbounded angular
/// DOFs draw from `[-pi, pi)`.
pub fn sample_config(r: &RobotModel, rng: &mut impl rand::Rng) -> Configuration {
    let mut values = Vec::with_capacity(r.dof_count());
    for dof in &r.dofs {
        let v = match (dof.kind, dof.range) {
            (_, Some((lo, hi))) => rng.random_range(lo..hi),
            (DofKind::Angular, None) => {
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
            }
            (DofKind::Translational, None) => rng.random_range(-1.0..1.0),
        };
        values.push(v);
    }
    Configuration::new(values)
}

/// Poses every robot body for configuration `c`.
///
/// Free flyers apply one rigid transform to all bodies; serial chains
/// compose `origin_i * rot(axis_i, q_i)` down the chain, attaching body `i`
/// to joint frame `i`.
pub fn forward_kinematics(r: &RobotModel, c: &Configuration) -> Result<Vec<ConvexPolyhedron>> {
    r.check_dims(c)?;
    match &r.kind {
        RobotKind::FreeFlyer => {
            let t = free_flyer_transform(r, c);
            Ok(r.bodies.iter().map(|b| crate::geom::apply_transform(t, b)).collect())
        }
        RobotKind::SerialChain { joints } => {
            let mut frame = RigidTransform::identity();
            let mut out = Vec::with_capacity(r.bodies.len());
            for (i, joint) in joints.iter().enumerate() {
                let rot = RigidTransform::from_axis_angle(joint.axis, c.values[i]);
                frame = frame.compose(joint.origin).compose(rot);
                out.push(crate::geom::apply_transform(frame, &r.bodies[i]));
            }
            Ok(out)
        }
    }
}

fn free_flyer_transform(r: &RobotModel, c: &Configuration) -> RigidTransform {
    let mut t = RigidTransform::from_translation(Vec3::new(
        c.values[0],
        c.values[1],
        c.values[2],
    ));
    let axes = [
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
    ];
    for (k, &axis) in axes.iter().enumerate().take(r.dofs.len() - 3) {
        t = t.compose(RigidTransform::from_axis_angle(axis, c.values[3 + k]));
    }
    t
}

/// Weighted Euclidean configuration-space metric; angular differences are
/// wrap-aware.
pub fn config_distance(r: &RobotModel, p: &Configuration, q: &Configuration) -> Result<f64> {
    r.check_dims(p)?;
    r.check_dims(q)?;
    let mut sum = 0.0;
    for (i, dof) in r.dofs.iter().enumerate() {
        let d = match dof.kind {
            DofKind::Translational => q.values[i] - p.values[i],
            DofKind::Angular => angle_diff(p.values[i], q.values[i]),
        };
        let wd = dof.weight * d;
        sum += wd * wd;
    }
    Ok(sum.sqrt())
}

/// `ceil(distance / resolution) + 1` evenly spaced configurations from `p`
/// to `q`, endpoints included, shortest-arc on angular DOFs. Coincident
/// endpoints produce the single configuration `[p]`.
pub fn interpolate(
    r: &RobotModel,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
) -> Result<Vec<Configuration>> {
    debug_assert!(resolution > 0.0);
    let dist = config_distance(r, p, q)?;
    let n = (dist / resolution).ceil() as usize;
    if n == 0 {
        return Ok(vec![p.clone()]);
    }
    let mut out = Vec::with_capacity(n + 1);
    for step in 0..=n {
        let t = step as f64 / n as f64;
        let mut values = Vec::with_capacity(p.values.len());
        for (i, dof) in r.dofs.iter().enumerate() {
            let v = match dof.kind {
                DofKind::Translational => p.values[i] + (q.values[i] - p.values[i]) * t,
                DofKind::Angular => {
                    wrap_angle(p.values[i] + angle_diff(p.values[i], q.values[i]) * t)
                }
            };
            values.push(v);
        }
        out.push(Configuration::new(values));
    }
    Ok(out)
}

/// Number of interpolation steps (`N`) an edge between `p` and `q` uses;
/// the sample count is `N + 1`.
pub fn interpolation_steps(
    r: &RobotModel,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
) -> Result<usize> {
    let dist = config_distance(r, p, q)?;
    Ok((dist / resolution).ceil() as usize)
}

/// Exact collision test of one posed robot against one obstacle, with an
/// AABB pre-filter per body pair. Counts one `config_check`.
fn posed_robot_hits_obstacle(posed: &[(ConvexPolyhedron, Aabb)], obstacle: &Obstacle) -> bool {
    stats::count_config_check();
    let obs_bodies: Vec<(ConvexPolyhedron, Aabb)> = obstacle
        .posed_bodies()
        .into_iter()
        .map(|b| {
            let bb = b.aabb();
            (b, bb)
        })
        .collect();
    for (rb, rbb) in posed {
        for (ob, obb) in &obs_bodies {
            if rbb.intersects(obb) && intersect_convex_convex(rb, ob) {
                return true;
            }
        }
    }
    false
}

fn pose_with_bounds(r: &RobotModel, c: &Configuration) -> Result<Vec<(ConvexPolyhedron, Aabb)>> {
    Ok(forward_kinematics(r, c)?
        .into_iter()
        .map(|b| {
            let bb = b.aabb();
            (b, bb)
        })
        .collect())
}

/// Which filtered obstacles collide with the robot at `c`. The returned set
/// is empty iff the configuration is valid with respect to the filter.
pub fn check_config(
    r: &RobotModel,
    env: &Environment,
    c: &Configuration,
    filter: ObstacleFilter,
) -> Result<(bool, BTreeSet<ObstacleId>)> {
    let posed = pose_with_bounds(r, c)?;
    let mut colliding = BTreeSet::new();
    for id in env.obstacle_ids() {
        if !filter.admits(id) {
            continue;
        }
        if posed_robot_hits_obstacle(&posed, &env.obstacles[id.0 as usize]) {
            colliding.insert(id);
        }
    }
    Ok((colliding.is_empty(), colliding))
}

/// Union of [`check_config`] over all interpolated configurations of the
/// edge; valid iff every intermediate is valid. An obstacle already found
/// colliding is not re-tested at later intermediates.
pub fn check_edge(
    r: &RobotModel,
    env: &Environment,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
    filter: ObstacleFilter,
) -> Result<(bool, BTreeSet<ObstacleId>)> {
    let mut colliding = BTreeSet::new();
    let mut remaining: Vec<ObstacleId> =
        env.obstacle_ids().filter(|&id| filter.admits(id)).collect();
    for c in interpolate(r, p, q, resolution)? {
        if remaining.is_empty() {
            break;
        }
        let posed = pose_with_bounds(r, &c)?;
        remaining.retain(|&id| {
            if posed_robot_hits_obstacle(&posed, &env.obstacles[id.0 as usize]) {
                colliding.insert(id);
                false
            } else {
                true
            }
        });
    }
    Ok((colliding.is_empty(), colliding))
}

/// True iff the robot at `c` collides with the single obstacle. Early-out
/// boolean used by the update engines.
pub fn config_blocked_by(
    r: &RobotModel,
    env: &Environment,
    c: &Configuration,
    id: ObstacleId,
) -> Result<bool> {
    let posed = pose_with_bounds(r, c)?;
    Ok(posed_robot_hits_obstacle(&posed, env.obstacle(id)?))
}

/// True iff any interpolated configuration of the edge collides with the
/// single obstacle; stops at the first hit.
pub fn edge_blocked_by(
    r: &RobotModel,
    env: &Environment,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
    id: ObstacleId,
) -> Result<bool> {
    let obstacle = env.obstacle(id)?;
    for c in interpolate(r, p, q, resolution)? {
        let posed = pose_with_bounds(r, &c)?;
        if posed_robot_hits_obstacle(&posed, obstacle) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True iff every interpolated configuration is collision free against the
/// filtered obstacles; stops at the first colliding intermediate. Used by
/// planners that only need a boolean.
pub fn is_edge_valid(
    r: &RobotModel,
    env: &Environment,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
    filter: ObstacleFilter,
) -> Result<bool> {
    for c in interpolate(r, p, q, resolution)? {
        let posed = pose_with_bounds(r, &c)?;
        for id in env.obstacle_ids() {
            if filter.admits(id)
                && posed_robot_hits_obstacle(&posed, &env.obstacles[id.0 as usize])
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
