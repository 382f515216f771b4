//! Planar-faced solids as segmented meshes (one label per planar face).

use std::collections::HashMap;

use crate::mesh::SegmentedMesh;
use crate::Point;

#[derive(Default)]
struct Builder {
    vertices: Vec<Point>,
    lookup: HashMap<[u64; 3], usize>,
    triangles: Vec<[usize; 3]>,
    labels: Vec<usize>,
    next_label: usize,
}

impl Builder {
    fn vertex(&mut self, p: Point) -> usize {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        *self.lookup.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            self.vertices.len() - 1
        })
    }

    fn new_face(&mut self) -> usize {
        self.next_label += 1;
        self.next_label - 1
    }

    fn tri(&mut self, a: Point, b: Point, c: Point, label: usize) {
        let t = [self.vertex(a), self.vertex(b), self.vertex(c)];
        self.triangles.push(t);
        self.labels.push(label);
    }

    /// Counter-clockwise quad seen from outside.
    fn quad(&mut self, a: Point, b: Point, c: Point, d: Point, label: usize) {
        self.tri(a, b, c, label);
        self.tri(a, c, d, label);
    }

    fn finish(self) -> SegmentedMesh {
        SegmentedMesh::new(self.vertices, self.triangles, self.labels)
            .expect("shape builders emit valid meshes")
    }
}

/// Extrude a counter-clockwise profile in the xy plane from `z0` to `z1`.
/// `cap` triangulates the profile (indices into `profile`, counter-clockwise).
fn extrude(b: &mut Builder, profile: &[(f64, f64)], cap: &[[usize; 3]], z0: f64, z1: f64) {
    let at = |i: usize, z: f64| Point::new(profile[i].0, profile[i].1, z);
    let top = b.new_face();
    for t in cap {
        b.tri(at(t[0], z1), at(t[1], z1), at(t[2], z1), top);
    }
    let bottom = b.new_face();
    for t in cap {
        b.tri(at(t[0], z0), at(t[2], z0), at(t[1], z0), bottom);
    }
    let n = profile.len();
    for i in 0..n {
        let j = (i + 1) % n;
        let side = b.new_face();
        b.quad(at(i, z0), at(j, z0), at(j, z1), at(i, z1), side);
    }
}

fn fan(n: usize) -> Vec<[usize; 3]> {
    (1..n - 1).map(|i| [0, i, i + 1]).collect()
}

/// Map `(x, y, z) -> (y, z, x)`; a cyclic permutation keeps orientation.
fn rotate_axes(mut m: SegmentedMesh) -> SegmentedMesh {
    for p in &mut m.vertices {
        *p = Point::new(p.z, p.x, p.y);
    }
    m
}

pub fn axis_box(lo: Point, hi: Point) -> SegmentedMesh {
    let mut b = Builder::default();
    let profile = [(lo.x, lo.y), (hi.x, lo.y), (hi.x, hi.y), (lo.x, hi.y)];
    extrude(&mut b, &profile, &fan(4), lo.z, hi.z);
    b.finish()
}

/// Box of the given size centered at the origin.
pub fn centered_box(sx: f64, sy: f64, sz: f64) -> SegmentedMesh {
    axis_box(
        Point::new(-sx / 2.0, -sy / 2.0, -sz / 2.0),
        Point::new(sx / 2.0, sy / 2.0, sz / 2.0),
    )
}

/// Centered box with every face tessellated as an `n x n` grid.
pub fn tessellated_box(size: [f64; 3], n: usize) -> SegmentedMesh {
    assert!(n >= 1);
    let coord = |axis: usize, k: usize| {
        let h = size[axis] / 2.0;
        match k {
            0 => -h,
            k if k == n => h,
            k => -h + size[axis] * k as f64 / n as f64,
        }
    };
    // (normal axis, side, u axis, v axis) with u x v pointing outward
    let faces = [(2, n, 0, 1), (2, 0, 1, 0), (0, n, 1, 2), (0, 0, 2, 1), (1, n, 2, 0), (1, 0, 0, 2)];
    let mut b = Builder::default();
    for (axis, side, ua, va) in faces {
        let label = b.new_face();
        let at = |i: usize, j: usize| {
            let mut k = [0usize; 3];
            k[axis] = side;
            k[ua] = i;
            k[va] = j;
            Point::new(coord(0, k[0]), coord(1, k[1]), coord(2, k[2]))
        };
        for i in 0..n {
            for j in 0..n {
                b.quad(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1), label);
            }
        }
    }
    b.finish()
}

/// L-shaped profile `width x depth` with a `notch_w x notch_d` corner
/// removed, extruded by `height`. Centered near the origin.
pub fn l_extrusion(width: f64, depth: f64, height: f64, notch_w: f64, notch_d: f64) -> SegmentedMesh {
    let (x0, y0) = (-width / 2.0, -depth / 2.0);
    let profile = [
        (x0, y0),
        (x0 + width, y0),
        (x0 + width, y0 + depth - notch_d),
        (x0 + width - notch_w, y0 + depth - notch_d),
        (x0 + width - notch_w, y0 + depth),
        (x0, y0 + depth),
    ];
    // fan from the corner opposite the reflex vertex stays inside the L
    let mut b = Builder::default();
    extrude(&mut b, &profile, &fan(6), -height / 2.0, height / 2.0);
    b.finish()
}

/// Prism of length `length` over a triangle with base `base`, height
/// `height` and apex shifted `apex` from the base midpoint.
pub fn triangular_prism(base: f64, height: f64, apex: f64, length: f64) -> SegmentedMesh {
    let profile = [(-base / 2.0, -height / 2.0), (base / 2.0, -height / 2.0), (apex, height / 2.0)];
    let mut b = Builder::default();
    extrude(&mut b, &profile, &fan(3), -length / 2.0, length / 2.0);
    rotate_axes(b.finish())
}

/// Right-angled ramp: run `length`, rise `height`, extruded by `depth`.
pub fn wedge(length: f64, height: f64, depth: f64) -> SegmentedMesh {
    let profile = [
        (-length / 2.0, -height / 2.0),
        (length / 2.0, -height / 2.0),
        (-length / 2.0, height / 2.0),
    ];
    let mut b = Builder::default();
    extrude(&mut b, &profile, &fan(3), -depth / 2.0, depth / 2.0);
    b.finish()
}

/// Box with a rectangular slot cut through it along z.
pub fn slotted_box(size: [f64; 3], slot: [f64; 2], slot_offset: [f64; 2]) -> SegmentedMesh {
    let [sx, sy, sz] = size;
    let outer = [(-sx / 2.0, -sy / 2.0), (sx / 2.0, -sy / 2.0), (sx / 2.0, sy / 2.0), (-sx / 2.0, sy / 2.0)];
    let (cx, cy) = (slot_offset[0], slot_offset[1]);
    let (hx, hy) = (slot[0] / 2.0, slot[1] / 2.0);
    let inner = [(cx - hx, cy - hy), (cx + hx, cy - hy), (cx + hx, cy + hy), (cx - hx, cy + hy)];
    let (z0, z1) = (-sz / 2.0, sz / 2.0);
    let at = |p: (f64, f64), z: f64| Point::new(p.0, p.1, z);
    let mut b = Builder::default();
    let top = b.new_face();
    for k in 0..4 {
        let l = (k + 1) % 4;
        b.quad(at(outer[k], z1), at(outer[l], z1), at(inner[l], z1), at(inner[k], z1), top);
    }
    let bottom = b.new_face();
    for k in 0..4 {
        let l = (k + 1) % 4;
        b.quad(at(outer[k], z0), at(inner[k], z0), at(inner[l], z0), at(outer[l], z0), bottom);
    }
    for k in 0..4 {
        let l = (k + 1) % 4;
        let f = b.new_face();
        b.quad(at(outer[k], z0), at(outer[l], z0), at(outer[l], z1), at(outer[k], z1), f);
    }
    for k in 0..4 {
        let l = (k + 1) % 4;
        let f = b.new_face();
        b.quad(at(inner[l], z0), at(inner[k], z0), at(inner[k], z1), at(inner[l], z1), f);
    }
    b.finish()
}

/// Translate every vertex by `offset`.
pub fn translated(mut m: SegmentedMesh, offset: [f64; 3]) -> SegmentedMesh {
    for p in &mut m.vertices {
        p.x += offset[0];
        p.y += offset[1];
        p.z += offset[2];
    }
    m
}

/// UV-sphere split at the equator into two labeled hemispheres.
pub fn hemispheres(radius: f64, stacks: usize, slices: usize) -> SegmentedMesh {
    assert!(stacks % 2 == 0 && stacks >= 2 && slices >= 3);
    let mut b = Builder::default();
    let point = |i: usize, j: usize| {
        let theta = std::f64::consts::PI * i as f64 / stacks as f64;
        let phi = 2.0 * std::f64::consts::PI * (j % slices) as f64 / slices as f64;
        if i == 0 {
            return Point::new(0.0, 0.0, radius);
        }
        if i == stacks {
            return Point::new(0.0, 0.0, -radius);
        }
        Point::new(radius * theta.sin() * phi.cos(), radius * theta.sin() * phi.sin(), radius * theta.cos())
    };
    let north = b.new_face();
    let south = b.new_face();
    for i in 0..stacks {
        let label = if i < stacks / 2 { north } else { south };
        for j in 0..slices {
            let (a, bb, c, d) = (point(i, j), point(i + 1, j), point(i + 1, j + 1), point(i, j + 1));
            if i == 0 {
                b.tri(a, bb, c, label);
            } else if i == stacks - 1 {
                b.tri(a, bb, d, label);
            } else {
                b.quad(a, bb, c, d, label);
            }
        }
    }
    b.finish()
}

/// Reconstruction benchmark: cubes, boxes at several aspect ratios,
/// L-extrusions, prisms, wedges and slotted boxes.
///
/// Dimensions keep every corner at least 0.03 normalized units away from a
/// 4-bit quantization boundary, so a sub-cell reconstruction error cannot
/// move a vertex into a neighbouring bucket.
pub fn primitive_suite() -> Vec<(&'static str, SegmentedMesh)> {
    vec![
        ("cube", centered_box(1.0, 1.0, 1.0)),
        ("cube_offset", translated(centered_box(2.5, 2.5, 2.5), [1.0, -2.0, 3.0])),
        ("box_flat", centered_box(1.0, 0.8, 0.6)),
        ("box_bar", centered_box(1.0, 0.45, 0.45)),
        ("box_plate", centered_box(1.0, 0.8, 0.25)),
        ("box_tall", centered_box(0.6, 1.0, 0.8)),
        ("l_wide", l_extrusion(1.0, 1.0, 0.6, 0.45, 0.35)),
        ("l_shallow", l_extrusion(1.0, 0.8, 0.6, 0.45, 0.2)),
        ("prism", triangular_prism(1.0, 0.8, 0.15, 1.0)),
        ("prism_thin", triangular_prism(0.8, 0.6, 0.15, 1.0)),
        ("wedge", wedge(1.0, 0.8, 0.6)),
        ("wedge_low", wedge(1.0, 0.45, 0.8)),
        ("slot", slotted_box([1.0, 1.0, 0.6], [0.4, 0.3], [0.0, 0.0])),
        ("slot_offset", slotted_box([1.0, 0.8, 0.45], [0.35, 0.25], [0.05, 0.0])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::check_watertight;
    use crate::mesh::TriMesh;

    fn all() -> Vec<SegmentedMesh> {
        vec![
            centered_box(1.0, 1.0, 1.0),
            l_extrusion(1.0, 0.8, 0.4, 0.35, 0.3),
            triangular_prism(0.8, 0.7, 0.15, 1.0),
            wedge(1.0, 0.5, 0.6),
            slotted_box([1.0, 0.8, 0.4], [0.4, 0.3], [0.0, 0.0]),
            hemispheres(0.5, 8, 12),
            tessellated_box([1.0, 0.6, 0.3], 5),
        ]
    }

    #[test]
    fn shapes_are_closed_and_outward() {
        for m in all() {
            assert!(check_watertight(&m).is_watertight());
            let vol = TriMesh::new(m.vertices.clone(), m.triangles.clone()).signed_volume();
            assert!(vol > 0.0, "volume {vol}");
        }
    }

    #[test]
    fn face_counts() {
        let counts: Vec<usize> = all().iter().map(|m| m.face_count).collect();
        assert_eq!(counts, vec![6, 8, 5, 5, 10, 2, 6]);
    }

    #[test]
    fn box_volume() {
        let m = centered_box(1.0, 2.0, 0.5);
        assert!((m.to_trimesh().signed_volume() - 1.0).abs() < 1e-12);
        let s = slotted_box([1.0, 0.8, 0.4], [0.4, 0.3], [0.0, 0.0]);
        assert!((s.to_trimesh().signed_volume() - (0.8 - 0.12) * 0.4).abs() < 1e-12);
    }
}
