//! Approximate minimum-volume oriented bounding box of a point cloud.
//!
//! Candidate frames are the axis-aligned frame and the cloud's PCA frame;
//! the better one is refined by coordinate descent over rotations about the
//! current frame axes with a shrinking angular step. The returned box always
//! contains every input point (extents are exact min/max in the chosen
//! frame) and its volume never exceeds the better starting candidate, so it
//! is within `1 + epsilon` of `min(axis-aligned volume, PCA-frame volume)`
//! for any `epsilon >= 0`.

use super::{obb_from_frame, Obb, RigidTransform, Vec3};
use crate::error::Error;

/// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix. Returns the
/// eigenvectors as rows; deterministic for a given input.
fn jacobi_eigenvectors(m: [[f64; 3]; 3]) -> [Vec3; 3] {
    let mut a = m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..32 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= 1e-30 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() <= 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // Apply the Givens rotation to both sides of `a` and accumulate
            // into `v`.
            let mut rot = [[1.0_f64, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            rot[p][p] = c;
            rot[q][q] = c;
            rot[p][q] = s;
            rot[q][p] = -s;
            let mut at = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    at[i][j] = (0..3).map(|k| rot[k][i] * a[k][j]).sum();
                }
            }
            let mut an = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    an[i][j] = (0..3).map(|k| at[i][k] * rot[k][j]).sum();
                }
            }
            a = an;
            let mut vn = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    vn[i][j] = (0..3).map(|k| v[i][k] * rot[k][j]).sum();
                }
            }
            v = vn;
        }
    }
    [
        Vec3::new(v[0][0], v[1][0], v[2][0]).normalized(),
        Vec3::new(v[0][1], v[1][1], v[2][1]).normalized(),
        Vec3::new(v[0][2], v[1][2], v[2][2]).normalized(),
    ]
}

fn pca_frame(points: &[Vec3]) -> [Vec3; 3] {
    let n = points.len() as f64;
    let mut mean = Vec3::ZERO;
    for &p in points {
        mean = mean + p;
    }
    mean = mean / n;
    let mut cov = [[0.0; 3]; 3];
    for &p in points {
        let d = p - mean;
        let c = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += c[i] * c[j] / n;
            }
        }
    }
    let axes = jacobi_eigenvectors(cov);
    orthonormalize(axes)
}

/// Gram-Schmidt cleanup; falls back to completing a right-handed frame when
/// the input is rank deficient.
fn orthonormalize(axes: [Vec3; 3]) -> [Vec3; 3] {
    let mut u0 = axes[0];
    if u0.norm_squared() < 1e-18 {
        u0 = Vec3::new(1.0, 0.0, 0.0);
    }
    u0 = u0.normalized();
    let mut u1 = axes[1] - u0 * axes[1].dot(u0);
    if u1.norm_squared() < 1e-18 {
        let pick = if u0.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
        u1 = pick - u0 * pick.dot(u0);
    }
    u1 = u1.normalized();
    let u2 = u0.cross(u1);
    [u0, u1, u2]
}

fn frame_volume(axes: &[Vec3; 3], points: &[Vec3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &p in points {
        for i in 0..3 {
            let d = p.dot(axes[i]);
            lo[i] = lo[i].min(d);
            hi[i] = hi[i].max(d);
        }
    }
    (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2])
}

fn rotate_frame(axes: &[Vec3; 3], about: usize, angle: f64) -> [Vec3; 3] {
    let rot = RigidTransform::from_axis_angle(axes[about], angle);
    let mut out = *axes;
    for (i, a) in out.iter_mut().enumerate() {
        if i != about {
            *a = rot.rotate(*a);
        }
    }
    orthonormalize(out)
}

/// Oriented bounding box containing every input point, with volume at most
/// `(1 + epsilon)` times the smaller of the axis-aligned and PCA-frame box
/// volumes (the refinement only ever improves on those starting frames).
///
/// Errors on an empty cloud; `epsilon` must be positive and sets the final
/// angular resolution of the refinement.
pub fn approx_min_obb(points: &[Vec3], epsilon: f64) -> Result<Obb, Error> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if !(epsilon > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if points.len() == 1 {
        return Ok(Obb {
            center: points[0],
            axes: [
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            half_extents: [0.0; 3],
        });
    }

    let identity = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    let pca = pca_frame(points);

    let vol_id = frame_volume(&identity, points);
    let vol_pca = frame_volume(&pca, points);
    let (mut frame, mut best) =
        if vol_pca < vol_id { (pca, vol_pca) } else { (identity, vol_id) };

    // Coordinate descent on rotations about the current frame axes. The step
    // shrinks to epsilon/8 radians, more than enough angular resolution for
    // the (1 + epsilon) volume target.
    let mut step = 0.5_f64;
    let min_step = (epsilon / 8.0).min(0.05);
    while step > min_step {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let cand = rotate_frame(&frame, axis, sign * step);
                let v = frame_volume(&cand, points);
                if v < best - 1e-15 {
                    best = v;
                    frame = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    Ok(obb_from_frame(frame, points))
}
