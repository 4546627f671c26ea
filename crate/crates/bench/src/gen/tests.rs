use super::*;
use spite::robot::check_config;

#[test]
fn update_bench_emits_nine_variants_with_exact_move_counts() {
    let variants = gen_update_bench(5, 100);
    assert_eq!(variants.len(), 9);
    let names: Vec<&str> = variants.iter().map(|v| v.scene.obstacles[0].name.as_str()).collect();
    assert!(names.contains(&"cube_2x2x2"));
    assert!(names.contains(&"cube_5x5x5"));
    assert!(names.contains(&"cube_20x20x20"));
    assert!(names.contains(&"prism_20x20x1"));
    assert!(names.contains(&"prism_20x20x5"));
    for v in &variants {
        assert_eq!(v.placements.len(), 100);
        assert_eq!(v.moves().len(), 100);
        // Placements keep the obstacle inside the bounds.
        let half = {
            let b = v.scene.obstacles[0].bodies[0].aabb();
            b.extent() * 0.5
        };
        for &p in &v.placements {
            assert!(v.scene.bounds.contains_box(&Aabb::new(p - half, p + half)));
        }
    }
}

#[test]
fn update_bench_deterministic_under_seed() {
    let a = gen_update_bench(5, 40);
    let b = gen_update_bench(5, 40);
    for (va, vb) in a.iter().zip(&b) {
        assert_eq!(va.placements, vb.placements);
        assert_eq!(va.scene, vb.scene);
    }
    let c = gen_update_bench(6, 40);
    assert_ne!(a[0].placements, c[0].placements);
}

#[test]
fn walls_flip_realization_reproducible_and_balanced() {
    let a = gen_walls(11, 100);
    let b = gen_walls(11, 100);
    for (x, y) in a.iterations.iter().zip(&b.iterations) {
        assert_eq!(x.flips, y.flips);
        assert_eq!(x.start.values, y.start.values);
        assert_eq!(x.goal.values, y.goal.values);
    }
    // Binomial bound: ~50 +- 15 flips per wall over 100 iterations.
    for w in 0..3 {
        let flips = a.iterations.iter().filter(|it| it.flips[w]).count();
        assert!(
            (35..=65).contains(&flips),
            "wall {w}: {flips} flips outside the binomial bound"
        );
    }
}

#[test]
fn walls_lattice_connected_through_all_assignments() {
    let bench = gen_walls(11, 10);
    let rm = walls_roadmap(&bench).expect("connected lattice");
    // Node count on the order of the reference graph (thousands).
    assert!(
        (2000..=8000).contains(&rm.nodes.len()),
        "unexpected lattice size {}",
        rm.nodes.len()
    );
    // Start/goal samples sit in free space on both sides.
    let env = bench.scene.environment();
    for it in &bench.iterations {
        let (ok_s, _) =
            check_config(&bench.scene.robot, &env, &it.start, ObstacleFilter::All).unwrap();
        let (ok_g, _) =
            check_config(&bench.scene.robot, &env, &it.goal, ObstacleFilter::All).unwrap();
        assert!(ok_s && ok_g);
        assert!(it.start.values[0] < 2.0 && it.goal.values[0] > 6.0, "opposite sides");
    }
}

#[test]
fn shelf_schedule_shape() {
    let bench = gen_shelf(3, 100);
    assert_eq!(bench.iterations.len(), 100);
    let again = gen_shelf(3, 100);
    for (a, b) in bench.iterations.iter().zip(&again.iterations) {
        assert_eq!(a.on_top, b.on_top);
    }
    // The start/goal pair is part of the bench, fixed across iterations by
    // construction; both must be valid in all four placements.
    for mask in 0..4u32 {
        let mut env = bench.scene.environment();
        for (i, &oid) in bench.movable.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let o = env.obstacle_mut(oid).unwrap();
                o.pose =
                    RigidTransform::from_translation(Vec3::new(0.0, 0.0, bench.shelf_lift))
                        .compose(o.pose);
            }
        }
        let (ok_s, ids) =
            check_config(&bench.scene.robot, &env, &bench.start, ObstacleFilter::All).unwrap();
        assert!(ok_s, "start collides under placement {mask:02b}: {ids:?}");
        let (ok_g, ids) =
            check_config(&bench.scene.robot, &env, &bench.goal, ObstacleFilter::All).unwrap();
        assert!(ok_g, "goal collides under placement {mask:02b}: {ids:?}");
    }
}

#[test]
fn shelf_hand_reaches_into_upper_story_corners() {
    let bench = gen_shelf(3, 1);
    let tip_s = shelf_hand_tip(&bench.scene.robot, &bench.start);
    let tip_g = shelf_hand_tip(&bench.scene.robot, &bench.goal);
    println!("start tip {tip_s:?}");
    println!("goal tip {tip_g:?}");
    // Upper story: between the middle and top boards, inside the shelf
    // footprint, on opposite y sides.
    for (tip, y_sign) in [(tip_s, -1.0), (tip_g, 1.0)] {
        assert!(tip.z > 0.72 && tip.z < 1.03, "tip z {} outside upper story", tip.z);
        assert!(tip.x > 0.45, "tip x {} not inside the shelf footprint", tip.x);
        assert!(tip.y * y_sign > 0.1, "tip y {} on the wrong side", tip.y);
    }
}

#[test]
fn shelf_roadmap_connected_under_all_placements() {
    let bench = gen_shelf(3, 1);
    let rm = shelf_roadmap(&bench, 250, 6).expect("connected shelf roadmap");
    assert!(rm.nodes.len() >= 240);
}
