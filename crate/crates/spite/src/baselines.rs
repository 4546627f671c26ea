//! Comparison updaters: the uniform workspace grid and the brute-force
//! revalidator. Both produce label states identical to the capsule index;
//! only candidate retrieval differs.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use crate::geom::{gjk_distance, Aabb, Vec3, DIST_TOL};
use crate::roadmap::{full_revalidate, ChangeReport, ElementId, Roadmap};
use crate::robot::{
    forward_kinematics, interpolate, Environment, ObstacleFilter, ObstacleId, RobotModel,
};
use crate::sweep::{incidence_from_roadmap, relabel_candidates};
use crate::Result;

/// Uniform cubic partition of the workspace with a per-cell list of the
/// roadmap elements whose swept volume intersects that cell.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    pub cell_size: f64,
    pub origin: Vec3,
    pub dims: [usize; 3],
    /// Element list per linear cell index; sorted, deduplicated.
    pub cell_lists: Vec<Vec<ElementId>>,
    pub obstacle_incidence: BTreeMap<ObstacleId, BTreeSet<ElementId>>,
    /// Exact body-vs-cell tests performed during preprocessing (a
    /// deterministic proxy for preprocessing work).
    pub refine_checks: u64,
    pub preprocess_time: Duration,
}

impl UniformGrid {
    fn linear(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    fn cell_box(&self, i: usize, j: usize, k: usize) -> Aabb {
        let lo = self.origin
            + Vec3::new(
                i as f64 * self.cell_size,
                j as f64 * self.cell_size,
                k as f64 * self.cell_size,
            );
        Aabb::new(
            lo,
            lo + Vec3::new(self.cell_size, self.cell_size, self.cell_size),
        )
    }

    /// Cell index ranges overlapped by `b`, clamped to the grid; `None`
    /// when the box lies entirely outside.
    fn cell_range(&self, b: &Aabb) -> Option<[(usize, usize); 3]> {
        let mut out = [(0usize, 0usize); 3];
        for axis in 0..3 {
            let lo = (b.min.axis(axis) - self.origin.axis(axis)) / self.cell_size;
            let hi = (b.max.axis(axis) - self.origin.axis(axis)) / self.cell_size;
            let max_idx = self.dims[axis] as isize - 1;
            let lo_i = (lo.floor() as isize).clamp(0, max_idx);
            let hi_i = (hi.floor() as isize).clamp(0, max_idx);
            if (hi.floor() as isize) < 0 || (lo.floor() as isize) > max_idx {
                return None;
            }
            out[axis] = (lo_i as usize, hi_i as usize);
        }
        Some(out)
    }
}

/// Builds the grid: every interpolated configuration of every element is
/// posed, each body's AABB selects candidate cells, and the element is
/// listed in each candidate cell its body exactly intersects. Validity is
/// initialized the same way as the capsule index (full revalidation).
pub fn grid_preprocess(
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &Environment,
    cell_size: f64,
) -> Result<UniformGrid> {
    assert!(cell_size > 0.0);
    let start = Instant::now();
    let bounds = env.bounds;
    let dims = [0, 1, 2].map(|axis| {
        ((bounds.extent().axis(axis) / cell_size).ceil() as usize).max(1)
    });
    let mut grid = UniformGrid {
        cell_size,
        origin: bounds.min,
        dims,
        cell_lists: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
        obstacle_incidence: BTreeMap::new(),
        refine_checks: 0,
        preprocess_time: Duration::ZERO,
    };

    let rasterize = |grid: &mut UniformGrid, e: ElementId, configs: &[crate::robot::Configuration]| -> Result<()> {
        for c in configs {
            for body in forward_kinematics(r, c)? {
                let verts = body.world_vertices();
                let bb = Aabb::from_points(verts.iter().copied()).expect("non-empty body");
                let Some(range) = grid.cell_range(&bb) else {
                    continue;
                };
                for i in range[0].0..=range[0].1 {
                    for j in range[1].0..=range[1].1 {
                        for k in range[2].0..=range[2].1 {
                            let cell = grid.linear(i, j, k);
                            // Already listed for this element: every cell
                            // list grows in element order.
                            if grid.cell_lists[cell].last() == Some(&e) {
                                continue;
                            }
                            grid.refine_checks += 1;
                            let corners = grid.cell_box(i, j, k).corners();
                            if gjk_distance(&verts, &corners) <= DIST_TOL {
                                grid.cell_lists[cell].push(e);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    };

    for i in 0..rm.nodes.len() {
        let config = rm.nodes[i].config.clone();
        rasterize(&mut grid, ElementId::Node(i as u32), &[config])?;
    }
    for i in 0..rm.edges.len() {
        let (p, q) = rm.edge_configs(i as u32);
        let configs = interpolate(r, p, q, rm.resolution)?;
        rasterize(&mut grid, ElementId::Edge(i as u32), &configs)?;
    }

    full_revalidate(rm, r, env, ObstacleFilter::All)?;
    grid.obstacle_incidence = incidence_from_roadmap(rm, env);
    grid.preprocess_time = start.elapsed();
    Ok(grid)
}

/// Moves obstacle `o` by `t` and relabels: invalidation candidates are the
/// union of the cell lists over every cell the obstacle's new bounding box
/// overlaps; revalidation candidates come from the incidence snapshot, and
/// the re-check/relabel tail is shared with the capsule index.
pub fn grid_update(
    grid: &mut UniformGrid,
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &mut Environment,
    o: ObstacleId,
    t: crate::geom::RigidTransform,
) -> Result<ChangeReport> {
    let obstacle = env.obstacle_mut(o)?;
    obstacle.pose = t.compose(obstacle.pose);
    let rev_candidates: Vec<ElementId> = grid
        .obstacle_incidence
        .get(&o)
        .map(|s| s.iter().copied().collect())
        .unwrap_or_default();

    let mut inv_candidates: BTreeSet<ElementId> = BTreeSet::new();
    if let Some(range) = grid.cell_range(&env.obstacle(o)?.aabb()) {
        for i in range[0].0..=range[0].1 {
            for j in range[1].0..=range[1].1 {
                for k in range[2].0..=range[2].1 {
                    inv_candidates.extend(&grid.cell_lists[grid.linear(i, j, k)]);
                }
            }
        }
    }

    relabel_candidates(rm, r, env, o, &inv_candidates, rev_candidates, &mut grid.obstacle_incidence)
}

/// Moves obstacle `o` by `t` and re-validates every node and edge against
/// it, with no retrieval and no early-out: the reference for both speed
/// comparisons and label ground truth.
pub fn brute_force_update(
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &mut Environment,
    o: ObstacleId,
    t: crate::geom::RigidTransform,
) -> Result<ChangeReport> {
    let obstacle = env.obstacle_mut(o)?;
    obstacle.pose = t.compose(obstacle.pose);
    full_revalidate(rm, r, env, ObstacleFilter::Single(o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{ConvexPolyhedron, RigidTransform};
    use crate::roadmap::prm_build;
    use crate::robot::{Configuration, Obstacle};
    use crate::stats;
    use crate::sweep::{preprocess, update};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bounds() -> Aabb {
        Aabb::new(Vec3::new(-10.0, -10.0, -10.0), Vec3::new(10.0, 10.0, 10.0))
    }

    fn cube_robot() -> RobotModel {
        RobotModel::free_flyer(
            vec![ConvexPolyhedron::box_shape(Vec3::new(0.5, 0.5, 0.5))],
            &bounds(),
            0,
        )
    }

    fn obstacle_cube(name: &str, center: Vec3, half: f64) -> Obstacle {
        Obstacle {
            name: name.to_string(),
            bodies: vec![ConvexPolyhedron::box_shape(Vec3::new(half, half, half))],
            pose: RigidTransform::from_translation(center),
        }
    }

    #[test]
    fn single_node_lands_in_few_cells() {
        let r = cube_robot();
        let env = Environment::new(bounds(), vec![]);
        let mut rm = Roadmap::empty(0.25);
        rm.nodes.push(crate::roadmap::Node {
            config: Configuration::new(vec![0.1, 0.1, 0.1]),
            static_ok: true,
            state: crate::roadmap::ValidityState::clean(true),
        });
        // Robot cube of side 1 inside cells of side 2: overlaps 1..=8 cells.
        let grid = grid_preprocess(&mut rm, &r, &env, 2.0).unwrap();
        let listed: usize = grid.cell_lists.iter().map(|l| l.len()).sum();
        assert!((1..=8).contains(&listed), "listed in {listed} cells");
    }

    #[test]
    fn whole_environment_cell_lists_everything() {
        let r = cube_robot();
        let env = Environment::new(bounds(), vec![]);
        let mut rm = prm_build(&r, &env, 30, 3, 0.5, 41).unwrap();
        let grid = grid_preprocess(&mut rm, &r, &env, 20.0).unwrap();
        assert_eq!(grid.dims, [1, 1, 1]);
        let expected = rm.nodes.len() + rm.edges.len();
        assert_eq!(grid.cell_lists[0].len(), expected, "every element in the single cell");
    }

    #[test]
    fn finer_cells_mean_more_preprocessing_work() {
        let r = cube_robot();
        let env = Environment::new(bounds(), vec![]);
        let rm = prm_build(&r, &env, 40, 4, 0.5, 42).unwrap();
        let mut last = 0;
        for cell in [8.0, 4.0, 2.0, 1.0] {
            let grid = grid_preprocess(&mut rm.clone(), &r, &env, cell).unwrap();
            assert!(
                grid.refine_checks > last,
                "cell {cell}: work {} did not grow past {last}",
                grid.refine_checks
            );
            last = grid.refine_checks;
        }
    }

    #[test]
    fn grid_conservativity_no_retrieval_false_negatives() {
        let r = cube_robot();
        let env = Environment::new(bounds(), vec![]);
        let mut rm = prm_build(&r, &env, 60, 4, 0.5, 43).unwrap();
        let grid = grid_preprocess(&mut rm, &r, &env, 2.0).unwrap();

        // Any element genuinely blocked by a probe obstacle must be listed
        // in at least one cell the probe's AABB overlaps.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let center = Vec3::new(
                rng.random_range(-8.0..8.0),
                rng.random_range(-8.0..8.0),
                rng.random_range(-8.0..8.0),
            );
            let probe_env = Environment::new(
                bounds(),
                vec![obstacle_cube("probe", center, rng.random_range(0.5..2.5))],
            );
            let mut probe_rm = rm.clone();
            crate::roadmap::full_revalidate(
                &mut probe_rm,
                &r,
                &probe_env,
                ObstacleFilter::All,
            )
            .unwrap();
            let mut union: BTreeSet<ElementId> = BTreeSet::new();
            if let Some(range) = grid.cell_range(&probe_env.obstacles[0].aabb()) {
                for i in range[0].0..=range[0].1 {
                    for j in range[1].0..=range[1].1 {
                        for k in range[2].0..=range[2].1 {
                            union.extend(&grid.cell_lists[grid.linear(i, j, k)]);
                        }
                    }
                }
            }
            for e in probe_rm.element_ids() {
                if !probe_rm.state(e).unwrap().blockers().is_empty() {
                    assert!(union.contains(&e), "blocked element {e:?} not retrieved");
                }
            }
        }
    }

    #[test]
    fn obstacle_outside_grid_coverage_reports_nothing() {
        let r = cube_robot();
        let mut env = Environment::new(
            bounds(),
            vec![obstacle_cube("far", Vec3::new(8.0, 8.0, 8.0), 0.5)],
        );
        let mut rm = prm_build(&r, &env, 30, 3, 0.5, 45).unwrap();
        let mut grid = grid_preprocess(&mut rm, &r, &env, 2.0).unwrap();
        // Push it far outside the bounds.
        let t = RigidTransform::from_translation(Vec3::new(100.0, 0.0, 0.0));
        let report = grid_update(&mut grid, &mut rm, &r, &mut env, ObstacleId(0), t).unwrap();
        assert!(report.newly_invalid.is_empty());
    }

    #[test]
    fn brute_force_identity_move_is_empty_and_counts_exactly() {
        let r = cube_robot();
        let mut env = Environment::new(
            bounds(),
            vec![obstacle_cube("o", Vec3::new(1.0, 1.0, 1.0), 1.0)],
        );
        let mut rm = prm_build(&r, &env, 40, 4, 0.5, 46).unwrap();
        let expected_cd: u64 = rm.nodes.len() as u64
            + rm.edges.iter().map(|e| e.steps as u64 + 1).sum::<u64>();
        for _ in 0..3 {
            let before = stats::snapshot();
            let report = brute_force_update(
                &mut rm,
                &r,
                &mut env,
                ObstacleId(0),
                RigidTransform::identity(),
            )
            .unwrap();
            let after = stats::snapshot();
            assert!(report.is_empty(), "identity move must not flip labels");
            assert_eq!(
                after.config_checks - before.config_checks,
                expected_cd,
                "brute-force CD count must be nodes + edge samples, always"
            );
        }
    }

    #[test]
    fn three_updaters_agree_on_seeded_sequences() {
        let r = cube_robot();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..6 {
            let start_env = Environment::new(
                bounds(),
                vec![
                    obstacle_cube("m0", Vec3::new(1.5, -0.5, 0.0), 1.2),
                    obstacle_cube("m1", Vec3::new(-4.0, 3.0, 2.0), 1.8),
                ],
            );
            let mut rm = prm_build(&r, &start_env, 50, 4, 0.5, 300 + trial).unwrap();
            crate::roadmap::full_revalidate(&mut rm, &r, &start_env, ObstacleFilter::All)
                .unwrap();

            let mut spite_rm = rm.clone();
            let mut spite_env = start_env.clone();
            let mut index = preprocess(&mut spite_rm, &r, &spite_env, 0.1, 8).unwrap();

            let mut grid_rm = rm.clone();
            let mut grid_env = start_env.clone();
            let mut grid = grid_preprocess(&mut grid_rm, &r, &grid_env, 2.0).unwrap();

            let mut brute_rm = rm.clone();
            let mut brute_env = start_env.clone();

            for step in 0..10 {
                let o = ObstacleId(rng.random_range(0..2));
                let t = RigidTransform::from_translation(Vec3::new(
                    rng.random_range(-4.0..4.0),
                    rng.random_range(-4.0..4.0),
                    rng.random_range(-4.0..4.0),
                ));

                let (rs, spite_cd) = stats::measure(|| {
                    update(&mut index, &mut spite_rm, &r, &mut spite_env, o, t).unwrap()
                });
                let (rg, grid_cd) = stats::measure(|| {
                    grid_update(&mut grid, &mut grid_rm, &r, &mut grid_env, o, t).unwrap()
                });
                let (rb, brute_cd) = stats::measure(|| {
                    brute_force_update(&mut brute_rm, &r, &mut brute_env, o, t).unwrap()
                });

                assert_eq!(rs, rb, "trial {trial} step {step}: spite vs brute report");
                assert_eq!(rg, rb, "trial {trial} step {step}: grid vs brute report");
                assert_eq!(spite_rm, brute_rm, "trial {trial} step {step}: spite state");
                assert_eq!(grid_rm, brute_rm, "trial {trial} step {step}: grid state");

                // Retrieval only ever prunes work.
                assert!(brute_cd.config_checks >= grid_cd.config_checks);
                assert!(brute_cd.config_checks >= spite_cd.config_checks);
            }
        }
    }
}
