//! Exact point-triangle proximity and ray-triangle crossing tests.

use crate::{Point, Vec3};

/// Closest point on triangle `abc` to `p`, by Voronoi-region case analysis.
pub fn closest_point_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let [u, v, w] = closest_barycentric(p, a, b, c);
    Point::from(a.coords * u + b.coords * v + c.coords * w)
}

/// Barycentric weights of the point of triangle `abc` nearest to `p`.
pub fn closest_barycentric(p: &Point, a: &Point, b: &Point, c: &Point) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    if ab.cross(&ac).norm_squared() == 0.0 {
        return degenerate_barycentric(p, [a, b, c]);
    }
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }

    let denom = va + vb + vc;
    let v = vb / denom;
    let w = vc / denom;
    [1.0 - v - w, v, w]
}

/// Zero-area triangle: nearest point over its three edges.
fn degenerate_barycentric(p: &Point, corners: [&Point; 3]) -> [f64; 3] {
    let mut best = [1.0, 0.0, 0.0];
    let mut best_d = f64::INFINITY;
    for i in 0..3 {
        let j = (i + 1) % 3;
        let t = segment_parameter(p, corners[i], corners[j]);
        let q = corners[i] + (corners[j] - corners[i]) * t;
        let d = (q - p).norm_squared();
        if d < best_d {
            best_d = d;
            best = [0.0; 3];
            best[i] = 1.0 - t;
            best[j] = t;
        }
    }
    best
}

/// Parameter in `[0, 1]` of the point of segment `ab` nearest to `p`.
pub fn segment_parameter(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
}

pub fn closest_point_on_segment(p: &Point, a: &Point, b: &Point) -> Point {
    a + (b - a) * segment_parameter(p, a, b)
}

#[inline]
pub fn point_triangle_distance_sq(p: &Point, tri: &[Point; 3]) -> f64 {
    (closest_point_on_triangle(p, &tri[0], &tri[1], &tri[2]) - p).norm_squared()
}

#[inline]
fn orient2(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
}

/// Edge function evaluated with a canonical endpoint order, so the two
/// triangles sharing an edge see bit-identical magnitudes.
#[inline]
fn canonical_edge_fn(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> f64 {
    if (a[0], a[1]) <= (b[0], b[1]) {
        orient2(a, b, q)
    } else {
        -orient2(b, a, q)
    }
}

/// Where a ray parallel to `axis` through `(u, v)` in the other two
/// coordinates pierces the triangle, as a coordinate along `axis`.
///
/// Points on shared edges and vertices are assigned to exactly one of the
/// incident (non-silhouette) triangles with a top-left ownership rule, so
/// parity counts stay exact on closed meshes.
pub fn axis_ray_crossing(tri: &[Point; 3], axis: usize, q: [f64; 2]) -> Option<f64> {
    let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
    let p = tri.map(|v| [v[iu], v[iv]]);
    let area = orient2(p[0], p[1], p[2]);
    if area == 0.0 {
        return None;
    }
    let s = area.signum();
    let mut w = [0.0; 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        let wi = s * canonical_edge_fn(a, b, q);
        if wi < 0.0 {
            return None;
        }
        if wi == 0.0 {
            // direction of the edge in counter-clockwise traversal
            let du = s * (b[0] - a[0]);
            let dv = s * (b[1] - a[1]);
            let owned = dv < 0.0 || (dv == 0.0 && du < 0.0);
            if !owned {
                return None;
            }
        }
        w[i] = wi;
    }
    let sum = w[0] + w[1] + w[2];
    if sum <= 0.0 {
        return None;
    }
    Some((w[0] * tri[0][axis] + w[1] * tri[1][axis] + w[2] * tri[2][axis]) / sum)
}

/// Ray parameter of a hit with triangle `tri` (Moller-Trumbore), for `t > 0`.
pub fn ray_triangle_hit(origin: &Point, dir: &Vec3, tri: &[Point; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = inv * dir.dot(&q);
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = inv * e2.dot(&q);
    (t > 0.0).then_some(t)
}
