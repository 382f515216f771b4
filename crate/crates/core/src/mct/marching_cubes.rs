use std::collections::HashMap;

use super::tables::TRI_TABLE;
use crate::grid::ScalarField3;
use crate::mesh::TriMesh;
use crate::Point;

/// Lattice offsets of the eight cube corners.
const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Corner pairs of the twelve cube edges.
const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Node values this close to zero are rounding noise; treating them as
/// exactly zero keeps on-surface nodes consistently outside.
pub const ZERO_SNAP: f64 = 1e-10;

#[inline]
fn snap(v: f64) -> f64 {
    if v.abs() < ZERO_SNAP {
        0.0
    } else {
        v
    }
}

/// Zero level set of `field` as a triangle mesh in normalized coordinates.
///
/// Nodes with negative values are inside. Each crossing vertex is created
/// once per lattice edge and interpolated from the edge's lower node, so
/// neighbouring cubes share identical vertices.
pub fn marching_cubes(field: &ScalarField3) -> TriMesh {
    let r = field.resolution();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles = Vec::new();

    for i in 0..r - 1 {
        for j in 0..r - 1 {
            for k in 0..r - 1 {
                let corner = |c: usize| {
                    let o = CORNERS[c];
                    (i + o[0], j + o[1], k + o[2])
                };
                let mut case = 0usize;
                let mut values = [0.0f64; 8];
                for (c, v) in values.iter_mut().enumerate() {
                    let (a, b, d) = corner(c);
                    *v = snap(field.get(a, b, d));
                    if *v < 0.0 {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRI_TABLE[case];
                let mut edge_vertex = [usize::MAX; 12];
                for tri in row.chunks(3).take_while(|t| t[0] >= 0) {
                    let mut ids = [0usize; 3];
                    for (slot, &e) in ids.iter_mut().zip(tri) {
                        let e = e as usize;
                        if edge_vertex[e] == usize::MAX {
                            let [c0, c1] = EDGES[e];
                            let (n0, n1) = (corner(c0), corner(c1));
                            // lower lattice node first
                            let (lo, hi, v_lo, v_hi) = if n0 <= n1 {
                                (n0, n1, values[c0], values[c1])
                            } else {
                                (n1, n0, values[c1], values[c0])
                            };
                            let axis = if lo.0 != hi.0 {
                                0
                            } else if lo.1 != hi.1 {
                                1
                            } else {
                                2
                            };
                            let key = (field.index(lo.0, lo.1, lo.2), axis);
                            edge_vertex[e] = *cache.entry(key).or_insert_with(|| {
                                let t = crossing(v_lo, v_hi);
                                let a = field.node_position(lo.0, lo.1, lo.2);
                                let b = field.node_position(hi.0, hi.1, hi.2);
                                vertices.push(a + (b - a) * t);
                                vertices.len() - 1
                            });
                        }
                        *slot = edge_vertex[e];
                    }
                    // table winding faces inward for negative-inside fields
                    triangles.push([ids[0], ids[2], ids[1]]);
                }
            }
        }
    }
    TriMesh::new(vertices, triangles)
}

#[inline]
fn crossing(v_lo: f64, v_hi: f64) -> f64 {
    let d = v_lo - v_hi;
    if d == 0.0 {
        0.5
    } else {
        (v_lo / d).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::check_watertight;
    use crate::grid::NormalizeTransform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(r: usize, f: impl Fn(&Point) -> f64 + Sync) -> ScalarField3 {
        ScalarField3::from_fn(r, NormalizeTransform::identity(), 10.0, f).unwrap()
    }

    #[test]
    fn all_positive_is_empty() {
        let m = marching_cubes(&field(8, |_| 0.3));
        assert!(m.is_empty());
    }

    #[test]
    fn sphere_vertices_near_radius() {
        let r = 24;
        let f = field(r, |p| p.coords.norm() - 0.5);
        let m = marching_cubes(&f);
        let diag = f.spacing() * 3f64.sqrt();
        assert!(!m.is_empty());
        for v in &m.vertices {
            assert!((v.coords.norm() - 0.5).abs() < diag);
        }
        assert!(check_watertight(&m).is_watertight());
        assert!(m.signed_volume() > 0.0);
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
        assert!((m.signed_volume() - exact).abs() / exact < 0.05);
    }

    #[test]
    fn single_inside_node() {
        let r = 5;
        let mut values = vec![0.5f32; r * r * r];
        let t = NormalizeTransform::identity();
        let probe = ScalarField3::new(r, values.clone(), t, 1.0).unwrap();
        values[probe.index(2, 2, 2)] = -0.5;
        let f = ScalarField3::new(r, values, t, 1.0).unwrap();
        let m = marching_cubes(&f);
        assert_eq!(m.vertices.len(), 6);
        assert_eq!(m.triangles.len(), 8);
        assert!(check_watertight(&m).is_watertight());
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn random_fields_are_watertight() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let r = 6 + trial % 5;
            let density: f64 = rng.gen_range(0.2..0.8);
            let t = NormalizeTransform::identity();
            let shape = ScalarField3::new(r, vec![0.0; r * r * r], t, 1.0).unwrap();
            let mut values = vec![0.0f32; r * r * r];
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        let v = if shape.is_boundary_node(i, j, k) {
                            rng.gen_range(0.01..1.0)
                        } else if rng.gen_bool(density) {
                            -rng.gen_range(0.01..1.0)
                        } else {
                            rng.gen_range(0.0..1.0)
                        };
                        values[shape.index(i, j, k)] = v as f32;
                    }
                }
            }
            let f = ScalarField3::new(r, values, t, 1.0).unwrap();
            let m = marching_cubes(&f);
            let report = check_watertight(&m);
            assert!(report.is_watertight(), "trial {trial}: {report:?}");
        }
    }
}
