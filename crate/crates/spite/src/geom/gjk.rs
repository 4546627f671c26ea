//! GJK distance between convex hulls of point sets.
//!
//! Works on the Minkowski difference A - B and tracks the simplex vertex
//! nearest the origin. Returns 0 when the hulls overlap (the origin is
//! enclosed), otherwise the separation distance. Support points are taken
//! over explicit vertex lists, so any convex shape given by its extreme
//! points (polyhedron, segment, box corners) can be queried.

use super::{ConvexPolyhedron, Vec3};

const MAX_ITERS: usize = 128;
const REL_TOL: f64 = 1e-12;
const ZERO_TOL: f64 = 1e-24;

fn support(points: &[Vec3], dir: Vec3) -> Vec3 {
    let mut best = points[0];
    let mut best_d = best.dot(dir);
    for &p in &points[1..] {
        let d = p.dot(dir);
        if d > best_d {
            best_d = d;
            best = p;
        }
    }
    best
}

/// Closest point to the origin on segment `ab`, plus the supporting feature.
fn closest_on_segment(a: Vec3, b: Vec3) -> (Vec3, Vec<Vec3>) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (a, vec![a]);
    }
    let t = (-a).dot(ab) / len2;
    if t <= 0.0 {
        (a, vec![a])
    } else if t >= 1.0 {
        (b, vec![b])
    } else {
        (a + ab * t, vec![a, b])
    }
}

/// Closest point to the origin on triangle `abc` (Voronoi-region walk), plus
/// the supporting feature.
fn closest_on_triangle(a: Vec3, b: Vec3, c: Vec3) -> (Vec3, Vec<Vec3>) {
    let ab = b - a;
    let ac = c - a;
    let ap = -a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, vec![a]);
    }

    let bp = -b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, vec![b]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (a + ab * t, vec![a, b]);
    }

    let cp = -c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, vec![c]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (a + ac * t, vec![a, c]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * t, vec![b, c]);
    }

    let denom = va + vb + vc;
    if denom.abs() < f64::MIN_POSITIVE || !denom.is_finite() {
        // Degenerate triangle: fall back to the best edge.
        let cands = [closest_on_segment(a, b), closest_on_segment(a, c), closest_on_segment(b, c)];
        return cands
            .into_iter()
            .min_by(|x, y| x.0.norm_squared().partial_cmp(&y.0.norm_squared()).unwrap())
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    (a + ab * v + ac * w, vec![a, b, c])
}

/// Closest point to the origin on tetrahedron `abcd`; `None` means the
/// origin is inside.
fn closest_on_tetrahedron(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Option<(Vec3, Vec<Vec3>)> {
    // The origin is outside a face if it lies on the opposite side of the
    // face plane from the remaining vertex.
    let outside = |p: Vec3, q: Vec3, r: Vec3, other: Vec3| -> bool {
        let n = (q - p).cross(r - p);
        let sign_origin = n.dot(-p);
        let sign_other = n.dot(other - p);
        sign_origin * sign_other < 0.0 || sign_other == 0.0
    };

    let faces = [
        (a, b, c, d),
        (a, b, d, c),
        (a, c, d, b),
        (b, c, d, a),
    ];
    let mut best: Option<(Vec3, Vec<Vec3>)> = None;
    let mut inside = true;
    for (p, q, r, other) in faces {
        if outside(p, q, r, other) {
            inside = false;
            let cand = closest_on_triangle(p, q, r);
            if best
                .as_ref()
                .map(|b| cand.0.norm_squared() < b.0.norm_squared())
                .unwrap_or(true)
            {
                best = Some(cand);
            }
        }
    }
    if inside {
        None
    } else {
        best
    }
}

fn closest_on_simplex(simplex: &[Vec3]) -> Option<(Vec3, Vec<Vec3>)> {
    match simplex.len() {
        1 => Some((simplex[0], vec![simplex[0]])),
        2 => Some(closest_on_segment(simplex[0], simplex[1])),
        3 => Some(closest_on_triangle(simplex[0], simplex[1], simplex[2])),
        4 => closest_on_tetrahedron(simplex[0], simplex[1], simplex[2], simplex[3]),
        _ => unreachable!("simplex has 1..=4 vertices"),
    }
}

/// Distance between the convex hulls of two point sets; 0 when they overlap.
pub fn gjk_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    debug_assert!(!a.is_empty() && !b.is_empty());
    let minkowski_support =
        |dir: Vec3| -> Vec3 { support(a, dir) - support(b, -dir) };

    let mut dir = a[0] - b[0];
    if dir.norm_squared() == 0.0 {
        dir = Vec3::new(1.0, 0.0, 0.0);
    }
    let w0 = minkowski_support(-dir);
    let mut simplex = vec![w0];
    let mut v = w0;

    for _ in 0..MAX_ITERS {
        let v2 = v.norm_squared();
        if v2 <= ZERO_TOL {
            return 0.0;
        }
        let w = minkowski_support(-v);
        // No point of the difference can be closer than v·w / |v|; when
        // that bound meets |v| the distance is settled.
        if v2 - v.dot(w) <= REL_TOL * v2 {
            return v2.sqrt();
        }
        // A repeated support vertex cannot improve the simplex.
        if simplex.iter().any(|&s| (s - w).norm_squared() <= ZERO_TOL) {
            return v2.sqrt();
        }
        simplex.push(w);
        match closest_on_simplex(&simplex) {
            None => return 0.0,
            Some((nv, reduced)) => {
                // Guard against numerical stalls: the distance must shrink.
                if nv.norm_squared() >= v2 {
                    return v2.sqrt();
                }
                v = nv;
                simplex = reduced;
            }
        }
    }
    v.norm()
}

/// Distance between two posed convex polyhedra (hulls of their world
/// vertices); 0 when they overlap.
pub fn convex_convex_distance(a: &ConvexPolyhedron, b: &ConvexPolyhedron) -> f64 {
    let va = a.world_vertices();
    let vb = b.world_vertices();
    gjk_distance(&va, &vb)
}
