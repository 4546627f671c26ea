//! Scenario generators: the single-obstacle update benchmark over nine
//! obstacle shapes, the three-walls mobile-robot scenario and the
//! manipulator-in-a-shelf scenario, each with a deterministic seeded
//! schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spite::geom::{Aabb, ConvexPolyhedron, RigidTransform, Vec3};
use spite::roadmap::{
    full_revalidate, lattice_build, prm_build, shortest_path, Roadmap, ValidityMode,
};
use spite::robot::{
    config_distance, forward_kinematics, Configuration, DofSpec, Environment, Joint, Obstacle,
    ObstacleFilter, ObstacleId, RobotModel,
};

use crate::scene::Scene;

/// One scheduled obstacle relocation: the obstacle and the rigid transform
/// to compose onto its current pose.
pub type Move = (ObstacleId, RigidTransform);

// ------------------------------------------------------- update benchmark

/// One obstacle shape variant of the update benchmark with its seeded
/// placement sequence.
#[derive(Debug, Clone)]
pub struct UpdateVariant {
    pub scene: Scene,
    /// Absolute target centers, one per scheduled relocation.
    pub placements: Vec<Vec3>,
}

impl UpdateVariant {
    /// Converts the absolute placements into pose-composable moves,
    /// starting from the scene's initial pose.
    pub fn moves(&self) -> Vec<Move> {
        let mut current = self.obstacle_center();
        self.placements
            .iter()
            .map(|&target| {
                let t = RigidTransform::from_translation(target - current);
                current = target;
                (ObstacleId(0), t)
            })
            .collect()
    }

    fn obstacle_center(&self) -> Vec3 {
        self.scene.obstacles[0].pose.translation
    }
}

/// The nine obstacle shapes: cubes of side 2, 5 and 20, and six elongated
/// prisms, named by their full dimensions.
pub fn update_bench_shapes() -> Vec<(String, Vec3)> {
    [
        ("cube_2x2x2", Vec3::new(1.0, 1.0, 1.0)),
        ("cube_5x5x5", Vec3::new(2.5, 2.5, 2.5)),
        ("prism_20x20x1", Vec3::new(10.0, 10.0, 0.5)),
        ("prism_20x1x1", Vec3::new(10.0, 0.5, 0.5)),
        ("prism_20x20x2", Vec3::new(10.0, 10.0, 1.0)),
        ("prism_20x2x2", Vec3::new(10.0, 1.0, 1.0)),
        ("prism_20x5x5", Vec3::new(10.0, 2.5, 2.5)),
        ("prism_20x20x5", Vec3::new(10.0, 10.0, 2.5)),
        ("cube_20x20x20", Vec3::new(10.0, 10.0, 10.0)),
    ]
    .into_iter()
    .map(|(n, h)| (n.to_string(), h))
    .collect()
}

/// Update benchmark: a `[-16, 16]^3` workspace, a 6-DOF free-flying
/// rectangular prism robot, one axis-aligned prism obstacle per shape
/// variant and `n_moves` uniformly random placements (axis-aligned
/// translations keeping the obstacle inside the bounds) per variant.
pub fn gen_update_bench(seed: u64, n_moves: usize) -> Vec<UpdateVariant> {
    let bounds = Aabb::new(Vec3::new(-16.0, -16.0, -16.0), Vec3::new(16.0, 16.0, 16.0));
    let robot = RobotModel::free_flyer(
        vec![ConvexPolyhedron::box_shape(Vec3::new(1.5, 0.75, 0.5))],
        &bounds,
        3,
    );
    update_bench_shapes()
        .into_iter()
        .enumerate()
        .map(|(vi, (name, half))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(vi as u64 * 0x9e37));
            let place = |rng: &mut ChaCha8Rng| {
                Vec3::new(
                    rng.random_range(bounds.min.x + half.x..=bounds.max.x - half.x),
                    rng.random_range(bounds.min.y + half.y..=bounds.max.y - half.y),
                    rng.random_range(bounds.min.z + half.z..=bounds.max.z - half.z),
                )
            };
            let initial = place(&mut rng);
            let placements = (0..n_moves).map(|_| place(&mut rng)).collect();
            let scene = Scene::new(
                &format!("update_{name}"),
                bounds,
                0.25,
                seed,
                robot.clone(),
                vec![Obstacle {
                    name: name.clone(),
                    bodies: vec![ConvexPolyhedron::box_shape(half)],
                    pose: RigidTransform::from_translation(initial),
                }],
            );
            UpdateVariant { scene, placements }
        })
        .collect()
}

// ----------------------------------------------------------- walls scenario

/// Geometry constants of the walls scenario. Three walls across the arena,
/// each with a square passage in one of two vertical slots; the robot is a
/// translational cube with side a quarter of the passage.
pub struct WallsLayout {
    pub arena: Aabb,
    pub wall_xs: [f64; 3],
    pub wall_half_thickness: f64,
    pub passage: f64,
    pub slot_shift: f64,
}

impl Default for WallsLayout {
    fn default() -> Self {
        WallsLayout {
            arena: Aabb::new(Vec3::ZERO, Vec3::new(8.0, 3.0, 3.0)),
            wall_xs: [2.0, 4.0, 6.0],
            wall_half_thickness: 0.25,
            passage: 1.0,
            slot_shift: 1.0,
        }
    }
}

/// One iteration of the walls experiment: which walls flip their passage
/// slot, and the start/goal pair on opposite sides of the arena.
#[derive(Debug, Clone)]
pub struct WallsIteration {
    pub flips: [bool; 3],
    pub start: Configuration,
    pub goal: Configuration,
}

#[derive(Debug, Clone)]
pub struct WallsBench {
    pub scene: Scene,
    /// Lattice region and spacing for the provided roadmap.
    pub lattice_region: Aabb,
    pub lattice_spacing: f64,
    pub iterations: Vec<WallsIteration>,
    /// Current slot state is encoded in obstacle poses; a flip composes
    /// this translation (its own inverse modulo direction).
    pub slot_shift: f64,
}

impl WallsBench {
    /// Moves for one iteration given the current slot states (true = moved
    /// to the second slot). Applies the toggles and returns the transforms.
    pub fn apply_flips(&self, slots: &mut [bool; 3], flips: &[bool; 3]) -> Vec<Move> {
        let mut moves = Vec::new();
        for w in 0..3 {
            if flips[w] {
                let dir = if slots[w] { -1.0 } else { 1.0 };
                slots[w] = !slots[w];
                moves.push((
                    ObstacleId(w as u32),
                    RigidTransform::from_translation(Vec3::new(0.0, dir * self.slot_shift, 0.0)),
                ));
            }
        }
        moves
    }
}

fn wall_obstacle(layout: &WallsLayout, index: usize) -> Obstacle {
    let t = layout.wall_half_thickness;
    let arena = &layout.arena;
    // Local frame: the wall spans the arena cross-section oversized by the
    // slot shift on every side, with the passage hole at the first slot.
    let margin = layout.slot_shift;
    let y_lo = arena.min.y - margin;
    let y_hi = arena.max.y + margin;
    let z_lo = arena.min.z - margin;
    let z_hi = arena.max.z + margin;
    // First slot: hole centered at y = 1.0, z mid-height.
    let hole_y = (0.5, 0.5 + layout.passage);
    let z_mid = (arena.min.z + arena.max.z) * 0.5;
    let hole_z = (z_mid - layout.passage * 0.5, z_mid + layout.passage * 0.5);
    let slab = |min: Vec3, max: Vec3| ConvexPolyhedron::box_from_corners(min, max);
    let bodies = vec![
        // below the hole
        slab(Vec3::new(-t, y_lo, z_lo), Vec3::new(t, y_hi, hole_z.0)),
        // above the hole
        slab(Vec3::new(-t, y_lo, hole_z.1), Vec3::new(t, y_hi, z_hi)),
        // left of the hole
        slab(Vec3::new(-t, y_lo, hole_z.0), Vec3::new(t, hole_y.0, hole_z.1)),
        // right of the hole
        slab(Vec3::new(-t, hole_y.1, hole_z.0), Vec3::new(t, y_hi, hole_z.1)),
    ];
    Obstacle {
        name: format!("wall_{index}"),
        bodies,
        pose: RigidTransform::from_translation(Vec3::new(layout.wall_xs[index], 0.0, 0.0)),
    }
}

/// Walls scenario: three walls with two passage slots each, a translational
/// cube robot a quarter the passage size, and a seeded iteration schedule
/// of Bernoulli(1/2) per-wall slot flips with random start/goal pairs on
/// opposite sides. The accompanying lattice roadmap is asserted connected
/// through every slot assignment.
pub fn gen_walls(seed: u64, iterations: usize) -> WallsBench {
    let layout = WallsLayout::default();
    let arena = layout.arena;
    let robot_half = layout.passage / 8.0;
    let robot = RobotModel::free_flyer(
        vec![ConvexPolyhedron::box_shape(Vec3::new(robot_half, robot_half, robot_half))],
        &arena,
        0,
    );
    let obstacles: Vec<Obstacle> = (0..3).map(|i| wall_obstacle(&layout, i)).collect();
    let scene = Scene::new("walls", arena, 0.25, seed, robot, obstacles);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_side = |rng: &mut ChaCha8Rng, x_lo: f64, x_hi: f64| {
        Configuration::new(vec![
            rng.random_range(x_lo..x_hi),
            rng.random_range(arena.min.y + 0.3..arena.max.y - 0.3),
            rng.random_range(arena.min.z + 0.3..arena.max.z - 0.3),
        ])
    };
    let iterations = (0..iterations)
        .map(|_| WallsIteration {
            flips: [rng.random_bool(0.5), rng.random_bool(0.5), rng.random_bool(0.5)],
            start: sample_side(&mut rng, arena.min.x + 0.3, arena.min.x + 1.3),
            goal: sample_side(&mut rng, arena.max.x - 1.3, arena.max.x - 0.3),
        })
        .collect();

    WallsBench {
        scene,
        lattice_region: Aabb::new(
            arena.min + Vec3::new(0.25, 0.25, 0.25),
            arena.max - Vec3::new(0.25, 0.25, 0.25),
        ),
        lattice_spacing: 0.25,
        iterations,
        slot_shift: layout.slot_shift,
    }
}

/// Builds the walls lattice roadmap and asserts it contains a valid
/// cross-arena path under every one of the eight slot assignments.
pub fn walls_roadmap(bench: &WallsBench) -> spite::Result<Roadmap> {
    let robot = &bench.scene.robot;
    let env = bench.scene.environment();
    let mut rm = lattice_build(
        robot,
        &env,
        &bench.lattice_region,
        bench.lattice_spacing,
        bench.scene.resolution,
    )?;

    // Connectivity guarantee: for all 8 slot assignments, a path exists
    // between fixed probes on the two sides.
    let probe_a = nearest_node(&rm, robot, &Configuration::new(vec![0.5, 1.5, 1.5]))?;
    let probe_b = nearest_node(&rm, robot, &Configuration::new(vec![7.5, 1.5, 1.5]))?;
    for mask in 0..8u32 {
        let mut env = bench.scene.environment();
        for w in 0..3 {
            if mask & (1 << w) != 0 {
                env.obstacles[w].pose = RigidTransform::from_translation(Vec3::new(
                    0.0,
                    bench.slot_shift,
                    0.0,
                ))
                .compose(env.obstacles[w].pose);
            }
        }
        full_revalidate(&mut rm, robot, &env, ObstacleFilter::All)?;
        let path = shortest_path(&rm, probe_a, probe_b, ValidityMode::RespectLabels);
        if path.is_none() {
            return Err(spite::Error::Invalid(format!(
                "walls lattice not connected under slot assignment {mask:03b}"
            )));
        }
    }
    // Leave labels matching the scene's initial poses.
    let env = bench.scene.environment();
    full_revalidate(&mut rm, robot, &env, ObstacleFilter::All)?;
    Ok(rm)
}

fn nearest_node(
    rm: &Roadmap,
    robot: &RobotModel,
    c: &Configuration,
) -> spite::Result<usize> {
    let mut best = (f64::INFINITY, 0usize);
    for (i, n) in rm.nodes.iter().enumerate() {
        let d = config_distance(robot, c, &n.config)?;
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(best.1)
}

// ----------------------------------------------------------- shelf scenario

/// One iteration of the shelf experiment: whether each movable object sits
/// on the top shelf (true) or the bottom shelf.
#[derive(Debug, Clone)]
pub struct ShelfIteration {
    pub on_top: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct ShelfBench {
    pub scene: Scene,
    pub start: Configuration,
    pub goal: Configuration,
    pub iterations: Vec<ShelfIteration>,
    /// Vertical lift from the bottom-shelf pose to the top-shelf pose.
    pub shelf_lift: f64,
    /// Ids of the two movable objects (the shelf itself is obstacle 0).
    pub movable: [ObstacleId; 2],
}

impl ShelfBench {
    /// Moves for one iteration given the current object placements.
    pub fn apply_placements(&self, on_top: &mut [bool; 2], want: &[bool; 2]) -> Vec<Move> {
        let mut moves = Vec::new();
        for i in 0..2 {
            if on_top[i] != want[i] {
                let dir = if want[i] { 1.0 } else { -1.0 };
                on_top[i] = want[i];
                moves.push((
                    self.movable[i],
                    RigidTransform::from_translation(Vec3::new(0.0, 0.0, dir * self.shelf_lift)),
                ));
            }
        }
        moves
    }
}

struct ShelfLayout {
    board_half: Vec3,
    board_centers: [Vec3; 3],
    side_half: Vec3,
    side_centers: [Vec3; 2],
    bottom_z: f64,
    lift: f64,
}

fn shelf_layout() -> ShelfLayout {
    // Shelf in front of the robot along +x: three boards make two stories.
    let board_half = Vec3::new(0.15, 0.4, 0.015);
    let x_mid = 0.6;
    ShelfLayout {
        board_half,
        board_centers: [
            Vec3::new(x_mid, 0.0, 0.35),
            Vec3::new(x_mid, 0.0, 0.70),
            Vec3::new(x_mid, 0.0, 1.05),
        ],
        side_half: Vec3::new(0.15, 0.015, 0.38),
        side_centers: [Vec3::new(x_mid, -0.415, 0.70), Vec3::new(x_mid, 0.415, 0.70)],
        bottom_z: 0.365,
        lift: 0.35,
    }
}

fn shelf_robot() -> RobotModel {
    let z = Vec3::new(0.0, 0.0, 1.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    let joints = vec![
        Joint { axis: z, origin: RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.05)) },
        Joint { axis: y, origin: RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.25)) },
        Joint { axis: y, origin: RigidTransform::from_translation(Vec3::new(0.35, 0.0, 0.0)) },
        Joint { axis: y, origin: RigidTransform::from_translation(Vec3::new(0.30, 0.0, 0.0)) },
        Joint { axis: z, origin: RigidTransform::from_translation(Vec3::new(0.12, 0.0, 0.0)) },
    ];
    let bodies = vec![
        // base column
        ConvexPolyhedron::box_from_corners(
            Vec3::new(-0.06, -0.06, -0.02),
            Vec3::new(0.06, 0.06, 0.22),
        ),
        // upper arm
        ConvexPolyhedron::box_from_corners(
            Vec3::new(0.0, -0.05, -0.05),
            Vec3::new(0.35, 0.05, 0.05),
        ),
        // forearm
        ConvexPolyhedron::box_from_corners(
            Vec3::new(0.0, -0.04, -0.04),
            Vec3::new(0.30, 0.04, 0.04),
        ),
        // wrist
        ConvexPolyhedron::box_from_corners(
            Vec3::new(0.0, -0.035, -0.035),
            Vec3::new(0.12, 0.035, 0.035),
        ),
        // hand
        ConvexPolyhedron::box_from_corners(
            Vec3::new(0.0, -0.03, -0.03),
            Vec3::new(0.10, 0.03, 0.03),
        ),
    ];
    let mut r = RobotModel::serial_chain(bodies, joints);
    // Joint ranges keep sampling in the useful front quadrant.
    r.dofs[0].range = Some((-1.4, 1.4));
    r.dofs[1].range = Some((-1.6, 0.4));
    r.dofs[2].range = Some((-0.4, 2.4));
    r.dofs[3].range = Some((-2.0, 2.0));
    r.dofs[4].range = Some((-1.5, 1.5));
    r
}

fn shelf_obstacles(layout: &ShelfLayout, can_top: bool, box_top: bool) -> Vec<Obstacle> {
    let mut shelf_bodies = Vec::new();
    for c in layout.board_centers {
        let mut b = ConvexPolyhedron::box_shape(layout.board_half);
        b.pose = RigidTransform::from_translation(c);
        shelf_bodies.push(b);
    }
    for c in layout.side_centers {
        let mut b = ConvexPolyhedron::box_shape(layout.side_half);
        b.pose = RigidTransform::from_translation(c);
        shelf_bodies.push(b);
    }
    let object_z = |top: bool, half_h: f64| {
        layout.bottom_z + half_h + if top { layout.lift } else { 0.0 }
    };
    vec![
        Obstacle {
            name: "shelf".into(),
            bodies: shelf_bodies,
            pose: RigidTransform::identity(),
        },
        Obstacle {
            name: "can".into(),
            bodies: vec![ConvexPolyhedron::box_shape(Vec3::new(0.04, 0.04, 0.13))],
            pose: RigidTransform::from_translation(Vec3::new(
                0.55,
                -0.12,
                object_z(can_top, 0.13),
            )),
        },
        Obstacle {
            name: "box".into(),
            bodies: vec![ConvexPolyhedron::box_shape(Vec3::new(0.08, 0.06, 0.06))],
            pose: RigidTransform::from_translation(Vec3::new(
                0.55,
                0.12,
                object_z(box_top, 0.06),
            )),
        },
    ]
}

/// Hand tip position for a configuration (the far end of the last body).
pub fn shelf_hand_tip(robot: &RobotModel, c: &Configuration) -> Vec3 {
    let posed = forward_kinematics(robot, c).expect("matching dims");
    posed.last().unwrap().pose.apply(Vec3::new(0.10, 0.0, 0.0))
}

/// Shelf scenario: a 5-joint serial arm in front of a two-story shelf, two
/// movable objects each on the top or bottom shelf with probability 1/2
/// per iteration, and a single fixed start/goal pair whose hand sits at
/// opposite back corners of the upper shelf.
pub fn gen_shelf(seed: u64, iterations: usize) -> ShelfBench {
    let layout = shelf_layout();
    let robot = shelf_robot();
    let bounds = Aabb::new(Vec3::new(-1.2, -1.2, -0.1), Vec3::new(1.2, 1.2, 1.5));
    // Initial placement: both objects on the bottom shelf.
    let scene = Scene::new(
        "shelf",
        bounds,
        0.15,
        seed,
        robot,
        shelf_obstacles(&layout, false, false),
    );

    // Fixed start/goal: hand reaching into the upper story, near the back
    // right and back left corners.
    let start = Configuration::new(vec![-0.55, -0.35, 1.25, -0.90, 0.0]);
    let goal = Configuration::new(vec![0.55, -0.35, 1.25, -0.90, 0.0]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iterations = (0..iterations)
        .map(|_| ShelfIteration { on_top: [rng.random_bool(0.5), rng.random_bool(0.5)] })
        .collect();

    ShelfBench {
        scene,
        start,
        goal,
        iterations,
        shelf_lift: layout.lift,
        movable: [ObstacleId(1), ObstacleId(2)],
    }
}

/// Builds the shelf roadmap: a descent-and-swing backbone joining start and
/// goal outside the shelf plus uniform samples, connected k-nearest. The
/// returned roadmap is asserted to contain a valid start-goal path under
/// all four object placements.
pub fn shelf_roadmap(bench: &ShelfBench, n_nodes: usize, k: usize) -> spite::Result<Roadmap> {
    let robot = &bench.scene.robot;
    let env = bench.scene.environment();

    // Backbone: retract from the start pose, swing the base across, extend
    // into the goal pose. All of it clears the shelf front.
    let s = &bench.start;
    let g = &bench.goal;
    let retracted_s = Configuration::new(vec![s.values[0], -1.35, 2.2, -0.85, 0.0]);
    let retracted_g = Configuration::new(vec![g.values[0], -1.35, 2.2, -0.85, 0.0]);
    let mut backbone = vec![s.clone(), retracted_s.clone()];
    let swing_steps = 6;
    for i in 1..swing_steps {
        let t = i as f64 / swing_steps as f64;
        backbone.push(Configuration::new(vec![
            s.values[0] + (g.values[0] - s.values[0]) * t,
            -1.35,
            2.2,
            -0.85,
            0.0,
        ]));
    }
    backbone.push(retracted_g);
    backbone.push(g.clone());

    let mut rm = prm_with_waypoints(
        robot,
        &env,
        &backbone,
        n_nodes.saturating_sub(backbone.len()),
        k,
        bench.scene.resolution,
        bench.scene.seed,
    )?;

    // The guarantee: a valid start-goal path under every object placement.
    for mask in 0..4u32 {
        let mut env = bench.scene.environment();
        for (i, &oid) in bench.movable.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let o = env.obstacle_mut(oid)?;
                o.pose = RigidTransform::from_translation(Vec3::new(0.0, 0.0, bench.shelf_lift))
                    .compose(o.pose);
            }
        }
        full_revalidate(&mut rm, robot, &env, ObstacleFilter::All)?;
        let path = shortest_path(&rm, 0, backbone.len() - 1, ValidityMode::RespectLabels);
        if path.is_none() {
            return Err(spite::Error::Invalid(format!(
                "shelf roadmap not connected under placement {mask:02b}"
            )));
        }
    }
    let env = bench.scene.environment();
    full_revalidate(&mut rm, robot, &env, ObstacleFilter::All)?;
    Ok(rm)
}

/// PRM whose first nodes are the given waypoints (connected consecutively)
/// plus `extra` uniform samples, all k-nearest connected and labeled.
fn prm_with_waypoints(
    robot: &RobotModel,
    env: &Environment,
    waypoints: &[Configuration],
    extra: usize,
    k: usize,
    resolution: f64,
    seed: u64,
) -> spite::Result<Roadmap> {
    // Sample with the library PRM, then merge the waypoint chain in front
    // and re-run the k-nearest connection over the union.
    let sampled = prm_build(robot, env, extra.max(1), k, resolution, seed)?;
    use spite::roadmap::{Edge, Node, ValidityState};
    use spite::robot::interpolation_steps;

    let mut configs: Vec<Configuration> = waypoints.to_vec();
    configs.extend(sampled.nodes.iter().map(|n| n.config.clone()));

    let mut pairs: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    for i in 0..waypoints.len().saturating_sub(1) {
        pairs.insert((i as u32, i as u32 + 1));
    }
    let n = configs.len();
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (config_distance(robot, &configs[i], &configs[j]).unwrap(), j))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in dists.iter().take(k) {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            pairs.insert((a as u32, b as u32));
        }
    }

    let mut rm = Roadmap::empty(resolution);
    for c in &configs {
        rm.nodes.push(Node { config: c.clone(), static_ok: true, state: ValidityState::clean(true) });
    }
    for (a, b) in pairs {
        let (pa, pb) = (&configs[a as usize], &configs[b as usize]);
        let length = config_distance(robot, pa, pb)?;
        let steps = interpolation_steps(robot, pa, pb, resolution)? as u32;
        rm.edges.push(Edge {
            a,
            b,
            length,
            steps,
            static_ok: true,
            state: ValidityState::clean(true),
        });
    }
    full_revalidate(&mut rm, robot, env, ObstacleFilter::All)?;
    Ok(rm)
}

#[cfg(test)]
mod tests;
