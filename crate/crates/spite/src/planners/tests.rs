use super::*;
use crate::geom::{Aabb, ConvexPolyhedron, RigidTransform, Vec3};
use crate::roadmap::{prm_build, ElementId};
use crate::robot::{check_edge, Obstacle, ObstacleId};
use std::collections::BTreeSet;

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

fn obstacle_cube(name: &str, center: Vec3, half: Vec3) -> Obstacle {
    Obstacle {
        name: name.to_string(),
        bodies: vec![ConvexPolyhedron::box_shape(half)],
        pose: RigidTransform::from_translation(center),
    }
}

/// Independent audit: endpoints plus every consecutive pair at full
/// resolution against all obstacles.
fn audit_path(
    r: &RobotModel,
    env: &Environment,
    path: &[Configuration],
    resolution: f64,
) -> bool {
    if path.is_empty() {
        return false;
    }
    for w in path.windows(2) {
        let (ok, _) = check_edge(r, env, &w[0], &w[1], resolution, ObstacleFilter::All).unwrap();
        if !ok {
            return false;
        }
    }
    let (ok, _) = check_config(r, env, &path[0], ObstacleFilter::All).unwrap();
    ok
}

#[test]
fn roadmap_query_trivial_and_blocked_endpoint() {
    let r = cube_robot();
    let env = Environment::new(bounds(), vec![]);
    let rm = prm_build(&r, &env, 60, 5, 0.5, 50).unwrap();
    let s = Configuration::new(vec![0.0, 0.0, 0.0]);
    let res = roadmap_query(&rm, &r, &env, &s, &s, 6).unwrap();
    assert_eq!(res.status, QueryStatus::Success);
    assert_eq!(res.path.len(), 1);

    let blocked_env = Environment::new(
        bounds(),
        vec![obstacle_cube("cover", Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0))],
    );
    let res = roadmap_query(&rm, &r, &blocked_env, &s, &s, 6).unwrap();
    assert_eq!(res.status, QueryStatus::InvalidQuery);
}

#[test]
fn roadmap_query_success_no_stored_element_cd() {
    let r = cube_robot();
    let env = Environment::new(
        bounds(),
        vec![obstacle_cube("side", Vec3::new(5.0, 5.0, 5.0), Vec3::new(1.0, 1.0, 1.0))],
    );
    let mut rm = prm_build(&r, &env, 120, 6, 0.5, 51).unwrap();
    crate::roadmap::full_revalidate(&mut rm, &r, &env, ObstacleFilter::All).unwrap();
    let s = Configuration::new(vec![-8.0, -8.0, -8.0]);
    let t = Configuration::new(vec![8.0, -8.0, 8.0]);

    let before = crate::stats::snapshot();
    let res = roadmap_query(&rm, &r, &env, &s, &t, 6).unwrap();
    let after = crate::stats::snapshot();
    assert_eq!(res.status, QueryStatus::Success);
    assert!(audit_path(&r, &env, &res.path, rm.resolution));
    assert_eq!(res.path.first(), Some(&s));
    assert_eq!(res.path.last(), Some(&t));
    assert_eq!(
        after.element_checks, before.element_checks,
        "roadmap query must not re-check stored elements"
    );
}

#[test]
fn roadmap_query_respects_invalid_bridge() {
    // Build a tiny roadmap where the only route crosses one edge, then
    // invalidate that edge by label only: the query must fail even though
    // space is actually free (labels are the contract).
    use crate::roadmap::{Edge, Node, Roadmap, ValidityState};
    let r = cube_robot();
    let env = Environment::new(bounds(), vec![]);
    let mut rm = Roadmap::empty(0.5);
    let mk = |x: f64| Configuration::new(vec![x, 0.0, 0.0]);
    for x in [-6.0, 0.0, 6.0] {
        rm.nodes.push(Node { config: mk(x), static_ok: true, state: ValidityState::clean(true) });
    }
    for (a, b) in [(0u32, 1u32), (1, 2)] {
        let length = crate::robot::config_distance(
            &r,
            &rm.nodes[a as usize].config,
            &rm.nodes[b as usize].config,
        )
        .unwrap();
        rm.edges.push(Edge {
            a,
            b,
            length,
            steps: 12,
            static_ok: true,
            state: ValidityState::clean(true),
        });
    }
    rm.add_blocker(ElementId::Edge(1), ObstacleId(7));

    let s = mk(-6.0);
    let t = mk(6.0);
    let res = roadmap_query(&rm, &r, &env, &s, &t, 1).unwrap();
    assert_eq!(res.status, QueryStatus::NoPath);
}

#[test]
fn lazy_prm_finds_path_and_spends_less_than_full_validation() {
    let r = cube_robot();
    let env = Environment::new(
        bounds(),
        vec![obstacle_cube("mid", Vec3::ZERO, Vec3::new(1.5, 4.0, 4.0))],
    );
    let mut rm = prm_build(&r, &env, 150, 6, 0.5, 52).unwrap();
    // Stale labels on purpose: lazy ignores them.
    crate::roadmap::full_revalidate(&mut rm, &r, &env, ObstacleFilter::All).unwrap();
    let s = Configuration::new(vec![-8.0, 0.0, 0.0]);
    let t = Configuration::new(vec![8.0, 0.0, 0.0]);

    let (res, spent) = crate::stats::measure(|| lazy_prm_query(&rm, &r, &env, &s, &t, 6).unwrap());
    assert_eq!(res.status, QueryStatus::Success);
    assert!(audit_path(&r, &env, &res.path, rm.resolution), "lazy success must audit clean");

    // Full-roadmap validation cost: every node and every edge sample.
    let full_cost: u64 =
        rm.nodes.len() as u64 + rm.edges.iter().map(|e| e.steps as u64 + 1).sum::<u64>();
    assert!(
        spent.config_checks < full_cost,
        "lazy spent {} checks, full validation would be {full_cost}",
        spent.config_checks
    );
}

#[test]
fn lazy_prm_no_path_when_sealed() {
    let r = cube_robot();
    // A wall with no opening separates left from right completely.
    let env = Environment::new(
        bounds(),
        vec![obstacle_cube("wall", Vec3::ZERO, Vec3::new(0.8, 10.0, 10.0))],
    );
    let rm = prm_build(&r, &env, 80, 5, 0.5, 53).unwrap();
    let s = Configuration::new(vec![-8.0, 0.0, 0.0]);
    let t = Configuration::new(vec![8.0, 0.0, 0.0]);
    let res = lazy_prm_query(&rm, &r, &env, &s, &t, 6).unwrap();
    assert_eq!(res.status, QueryStatus::NoPath);

    // Brute-force reachability oracle agrees: no sequence of valid
    // elements joins the two sides, because every configuration with
    // x in the wall slab collides.
    let mut oracle_rm = rm.clone();
    crate::roadmap::full_revalidate(&mut oracle_rm, &r, &env, ObstacleFilter::All).unwrap();
    for (i, n) in oracle_rm.nodes.iter().enumerate() {
        let x = n.config.values[0];
        if x.abs() <= 1.3 - 1e-9 {
            assert!(
                !n.state.is_valid(),
                "node {i} at x={x} should be blocked by the sealed wall"
            );
        }
    }
}

#[test]
fn lazy_prm_coarse_pass_rejects_before_fine() {
    // An edge whose 27-stride samples already collide must be excluded at
    // the coarse pass; instrument by counting checks spent on that edge.
    let r = cube_robot();
    let env = Environment::new(
        bounds(),
        vec![obstacle_cube("mid", Vec3::ZERO, Vec3::new(2.0, 2.0, 2.0))],
    );
    use crate::roadmap::{Edge, Node, Roadmap, ValidityState};
    let mut rm = Roadmap::empty(0.1);
    let mk = |x: f64| Configuration::new(vec![x, 0.0, 0.0]);
    rm.nodes.push(Node { config: mk(-8.0), static_ok: true, state: ValidityState::clean(true) });
    rm.nodes.push(Node { config: mk(8.0), static_ok: true, state: ValidityState::clean(true) });
    let length = 16.0;
    rm.edges.push(Edge {
        a: 0,
        b: 1,
        length,
        steps: 160,
        static_ok: true,
        state: ValidityState::clean(true),
    });

    let s = mk(-8.0);
    let t = mk(8.0);
    let (res, spent) = crate::stats::measure(|| lazy_prm_query(&rm, &r, &env, &s, &t, 1).unwrap());
    assert_eq!(res.status, QueryStatus::NoPath);
    // Endpoint checks (2) + two node validations (coincident attach nodes)
    // + coarse stride samples of the one edge. The 161-sample edge at
    // stride 27 means at most 7 samples before the middle collision is
    // found; far fewer than the 161 a full validation would spend.
    assert!(
        spent.config_checks < 30,
        "coarse pass should reject cheaply, spent {}",
        spent.config_checks
    );
}

#[test]
fn rrt_trivial_and_seeded_straight_line() {
    let r = cube_robot();
    let env = Environment::new(bounds(), vec![]);
    let s = Configuration::new(vec![-5.0, 0.0, 0.0]);
    let t = Configuration::new(vec![5.0, 2.0, -1.0]);

    let res = rrt_query(&r, &env, &s, &s, &RrtParams::default(), 0.25).unwrap();
    assert_eq!(res.status, QueryStatus::Success);
    assert_eq!(res.path.len(), 1);

    let params = RrtParams { seed: 7, ..Default::default() };
    let res = rrt_query(&r, &env, &s, &t, &params, 0.25).unwrap();
    assert_eq!(res.status, QueryStatus::Success);
    assert!(audit_path(&r, &env, &res.path, 0.25));
    assert_eq!(res.path.first(), Some(&s));
    assert_eq!(res.path.last(), Some(&t));

    // Determinism under the seed.
    let res2 = rrt_query(&r, &env, &s, &t, &params, 0.25).unwrap();
    assert_eq!(res.stats.iterations, res2.stats.iterations);
    assert_eq!(res.path.len(), res2.path.len());
    for (a, b) in res.path.iter().zip(&res2.path) {
        assert_eq!(a.values, b.values);
    }
}

#[test]
fn rrt_timeout_in_sealed_scene() {
    let r = cube_robot();
    let env = Environment::new(
        bounds(),
        vec![obstacle_cube("wall", Vec3::ZERO, Vec3::new(0.8, 10.0, 10.0))],
    );
    let s = Configuration::new(vec![-8.0, 0.0, 0.0]);
    let t = Configuration::new(vec![8.0, 0.0, 0.0]);
    let params = RrtParams {
        time_cap: Duration::from_millis(150),
        seed: 11,
        ..Default::default()
    };
    let res = rrt_query(&r, &env, &s, &t, &params, 0.25).unwrap();
    assert_eq!(res.status, QueryStatus::Timeout);
    assert!(res.path.is_empty());
    assert!(res.stats.iterations > 0, "partial stats expected");
    assert!(res.stats.wall >= Duration::from_millis(150));
}

#[test]
fn rrt_invalid_endpoints() {
    let r = cube_robot();
    let env = Environment::new(
        bounds(),
        vec![obstacle_cube("block", Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0))],
    );
    let s = Configuration::new(vec![0.0, 0.0, 0.0]);
    let t = Configuration::new(vec![8.0, 0.0, 0.0]);
    let res = rrt_query(&r, &env, &s, &t, &RrtParams::default(), 0.25).unwrap();
    assert_eq!(res.status, QueryStatus::InvalidQuery);
}

#[test]
fn all_planners_return_auditable_paths_on_seeded_scenes() {
    use rand::{Rng, SeedableRng};
    let r = cube_robot();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(60);
    for trial in 0..5 {
        let env = Environment::new(
            bounds(),
            vec![
                obstacle_cube(
                    "a",
                    Vec3::new(
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                    ),
                    Vec3::new(1.5, 1.5, 1.5),
                ),
                obstacle_cube(
                    "b",
                    Vec3::new(
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                    ),
                    Vec3::new(1.0, 2.5, 1.0),
                ),
            ],
        );
        let mut rm = prm_build(&r, &env, 150, 6, 0.5, 400 + trial).unwrap();
        crate::roadmap::full_revalidate(&mut rm, &r, &env, ObstacleFilter::All).unwrap();
        let s = Configuration::new(vec![-8.5, -8.5, -8.5]);
        let t = Configuration::new(vec![8.5, 8.5, 8.5]);

        let res = roadmap_query(&rm, &r, &env, &s, &t, 6).unwrap();
        if res.status == QueryStatus::Success {
            assert!(audit_path(&r, &env, &res.path, rm.resolution), "roadmap path audit");
        }
        let res = lazy_prm_query(&rm, &r, &env, &s, &t, 6).unwrap();
        if res.status == QueryStatus::Success {
            assert!(audit_path(&r, &env, &res.path, rm.resolution), "lazy path audit");
        }
        let params = RrtParams { seed: 500 + trial, time_cap: Duration::from_secs(20), ..Default::default() };
        let res = rrt_query(&r, &env, &s, &t, &params, rm.resolution).unwrap();
        if res.status == QueryStatus::Success {
            assert!(audit_path(&r, &env, &res.path, rm.resolution), "rrt path audit");
        }
    }
}

#[test]
fn lazy_never_succeeds_on_invalid_path() {
    // Laziness soundness: when lazy reports success, a full-resolution
    // audit agrees. Run over several seeds with obstacles near the line.
    use rand::{Rng, SeedableRng};
    let r = cube_robot();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
    for trial in 0..8 {
        let env = Environment::new(
            bounds(),
            vec![obstacle_cube(
                "near",
                Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0),
                Vec3::new(1.2, 3.0, 2.0),
            )],
        );
        let rm = prm_build(&r, &env, 100, 5, 0.5, 700 + trial).unwrap();
        let s = Configuration::new(vec![-8.0, 0.0, 0.0]);
        let t = Configuration::new(vec![8.0, 0.0, 0.0]);
        let res = lazy_prm_query(&rm, &r, &env, &s, &t, 6).unwrap();
        if res.status == QueryStatus::Success {
            assert!(audit_path(&r, &env, &res.path, rm.resolution), "trial {trial}");
        }
    }
}

#[test]
fn check_edge_full_filter_equals_union_of_singles_on_path() {
    // Sanity for the audit helper itself.
    let r = cube_robot();
    let env = Environment::new(
        bounds(),
        vec![
            obstacle_cube("a", Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0)),
            obstacle_cube("b", Vec3::new(3.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0)),
        ],
    );
    let p = Configuration::new(vec![-6.0, 0.0, 0.0]);
    let q = Configuration::new(vec![6.0, 0.0, 0.0]);
    let (_, full) = check_edge(&r, &env, &p, &q, 0.25, ObstacleFilter::All).unwrap();
    let mut union = BTreeSet::new();
    for id in env.obstacle_ids() {
        let (_, part) = check_edge(&r, &env, &p, &q, 0.25, ObstacleFilter::Single(id)).unwrap();
        union.extend(part);
    }
    assert_eq!(full, union);
}
