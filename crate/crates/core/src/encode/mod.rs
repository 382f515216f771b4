//! Distance-field encoding of a segmented triangle mesh.
//!
//! The SDF magnitude is the distance to the whole mesh and its sign comes
//! from ray-parity votes along the three axes (a diagonal ray breaks
//! disagreements). Each face UDF is the distance to the triangles carrying
//! that face label. Encoded values are in normalized units and clamped to
//! the truncation band.

mod bvh;
pub mod geometry;

use rayon::prelude::*;

pub use self::bvh::Bvh;
use self::geometry::{axis_ray_crossing, point_triangle_distance_sq, ray_triangle_hit};
use crate::brep::check_watertight;
use crate::error::{Error, Result};
use crate::grid::{clamp_to, make_transform, node_coord, BrDf, ScalarField3};
pub use crate::mesh::SegmentedMesh;
use crate::{Point, Vec3};

/// Direction of the tie-breaking ray; irrational ratios avoid grid alignment.
fn diagonal_direction() -> Vec3 {
    Vec3::new(1.0, 0.754_877_666_246_692_7, 0.569_840_290_998_053_3).normalize()
}

/// Point queries against one segmented mesh.
pub struct DistanceQuery<'a> {
    mesh: &'a SegmentedMesh,
    tris: Vec<[Point; 3]>,
    bvh: Bvh,
}

impl<'a> DistanceQuery<'a> {
    pub fn new(mesh: &'a SegmentedMesh) -> Self {
        let tris = mesh
            .triangles
            .iter()
            .map(|t| t.map(|v| mesh.vertices[v]))
            .collect();
        Self {
            mesh,
            tris,
            bvh: Bvh::build(&mesh.vertices, &mesh.triangles),
        }
    }

    pub fn unsigned_distance(&self, p: &Point) -> f64 {
        self.bvh
            .nearest(p, |t| Some(point_triangle_distance_sq(p, &self.tris[t])))
            .map_or(f64::INFINITY, |(d, _)| d.sqrt())
    }

    pub fn unsigned_distance_to_face(&self, face: usize, p: &Point) -> Result<f64> {
        if face >= self.mesh.face_count {
            return Err(Error::InvalidFace {
                face,
                face_count: self.mesh.face_count,
            });
        }
        let labels = &self.mesh.labels;
        Ok(self
            .bvh
            .nearest(p, |t| {
                (labels[t] == face).then(|| point_triangle_distance_sq(p, &self.tris[t]))
            })
            .map_or(f64::INFINITY, |(d, _)| d.sqrt()))
    }

    fn axis_parity(&self, p: &Point, axis: usize) -> bool {
        let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
        let q = [p[iu], p[iv]];
        let hits = self
            .tris
            .iter()
            .filter_map(|t| axis_ray_crossing(t, axis, q))
            .filter(|&c| c > p[axis])
            .count();
        hits % 2 == 1
    }

    fn diagonal_parity(&self, p: &Point) -> bool {
        diagonal_parity(&self.tris, p)
    }

    /// Majority of three axis votes, refined by a diagonal ray when they disagree.
    pub fn is_inside(&self, p: &Point) -> bool {
        let votes = (0..3).filter(|&a| self.axis_parity(p, a)).count();
        resolve_votes(votes, || self.diagonal_parity(p))
    }

    pub fn signed_distance(&self, p: &Point) -> f64 {
        let d = self.unsigned_distance(p);
        if d > 0.0 && self.is_inside(p) {
            -d
        } else {
            d
        }
    }
}

fn diagonal_parity(tris: &[[Point; 3]], p: &Point) -> bool {
    let dir = diagonal_direction();
    tris.iter().filter(|t| ray_triangle_hit(p, &dir, t).is_some()).count() % 2 == 1
}

/// Unanimous axis votes decide directly; otherwise the diagonal ray joins and
/// the majority of four wins, with the diagonal settling a 2-2 split.
fn resolve_votes(axis_inside_votes: usize, diagonal: impl FnOnce() -> bool) -> bool {
    match axis_inside_votes {
        0 => false,
        3 => true,
        v => {
            let diag = diagonal();
            let total = v + diag as usize;
            if total == 2 {
                diag
            } else {
                total > 2
            }
        }
    }
}

/// Signed distance from `p` to a watertight mesh (negative inside).
pub fn signed_distance(mesh: &SegmentedMesh, p: &Point) -> Result<f64> {
    require_watertight(mesh)?;
    Ok(DistanceQuery::new(mesh).signed_distance(p))
}

/// Distance from `p` to the triangles labeled `face`.
pub fn unsigned_distance_to_face(mesh: &SegmentedMesh, face: usize, p: &Point) -> Result<f64> {
    DistanceQuery::new(mesh).unsigned_distance_to_face(face, p)
}

fn require_watertight(mesh: &SegmentedMesh) -> Result<()> {
    let report = check_watertight(mesh);
    if report.is_watertight() {
        Ok(())
    } else {
        Err(Error::NotWatertight {
            boundary_edges: report.boundary_edges.len(),
            non_manifold_edges: report.non_manifold_edges.len(),
        })
    }
}

/// Sample the SDF and every face UDF of `mesh` on a `resolution^3` lattice.
pub fn encode_brdf(mesh: &SegmentedMesh, resolution: usize, truncation: f64) -> Result<BrDf> {
    mesh.validate()?;
    require_watertight(mesh)?;
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} must be at least 2"
        )));
    }
    if !(truncation > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} must be positive"
        )));
    }
    let (lo, hi) = mesh.bbox().ok_or(Error::Empty("mesh has no vertices"))?;
    let transform = make_transform(&lo, &hi)?;
    let normalized = mesh.transformed(|p| transform.apply(p));
    let tris: Vec<[Point; 3]> = normalized
        .triangles
        .iter()
        .map(|t| t.map(|v| normalized.vertices[v]))
        .collect();
    let bvh = Bvh::build(&normalized.vertices, &normalized.triangles);

    let r = resolution;
    let faces = mesh.face_count;
    let columns: Vec<Vec<Vec<f64>>> = (0..3).map(|axis| axis_columns(&tris, axis, r)).collect();
    let tau_sq = truncation * truncation;

    let slabs: Vec<(Vec<f32>, Vec<f32>)> = (0..r)
        .into_par_iter()
        .map(|i| {
            let mut sdf = Vec::with_capacity(r * r);
            let mut udf = vec![truncation as f32; faces * r * r];
            let mut best = vec![f64::INFINITY; faces];
            for j in 0..r {
                for k in 0..r {
                    let p = Point::new(node_coord(i, r), node_coord(j, r), node_coord(k, r));
                    best.fill(f64::INFINITY);
                    bvh.for_each_near(&p, tau_sq, |t| {
                        let d = point_triangle_distance_sq(&p, &tris[t]);
                        let slot = &mut best[normalized.labels[t]];
                        if d < *slot {
                            *slot = d;
                        }
                    });
                    let mut nearest = f64::INFINITY;
                    for (f, d) in best.iter().enumerate() {
                        let d = d.sqrt();
                        nearest = nearest.min(d);
                        udf[f * r * r + j * r + k] = clamp_to(d, truncation);
                    }
                    let votes = [
                        parity(&columns[0][j * r + k], p.x),
                        parity(&columns[1][k * r + i], p.y),
                        parity(&columns[2][i * r + j], p.z),
                    ]
                    .iter()
                    .filter(|&&b| b)
                    .count();
                    let inside = resolve_votes(votes, || diagonal_parity(&tris, &p));
                    let signed = if inside && nearest > 0.0 { -nearest } else { nearest };
                    sdf.push(clamp_to(signed, truncation));
                }
            }
            (sdf, udf)
        })
        .collect();

    let mut sdf_values = Vec::with_capacity(r * r * r);
    let mut udf_values = vec![Vec::with_capacity(r * r * r); faces];
    for (sdf, udf) in slabs {
        sdf_values.extend_from_slice(&sdf);
        for (f, values) in udf_values.iter_mut().enumerate() {
            values.extend_from_slice(&udf[f * r * r..(f + 1) * r * r]);
        }
    }
    let sdf = ScalarField3::new(r, sdf_values, transform, truncation)?;
    let udfs = udf_values
        .into_iter()
        .map(|v| ScalarField3::new(r, v, transform, truncation))
        .collect::<Result<Vec<_>>>()?;
    BrDf::new(sdf, udfs)
}

/// Sorted crossing coordinates of every lattice-aligned ray along `axis`.
/// Column `(a, b)` holds rays through lattice coordinates of axes
/// `axis + 1` and `axis + 2` (mod 3).
fn axis_columns(tris: &[[Point; 3]], axis: usize, r: usize) -> Vec<Vec<f64>> {
    let (iu, iv) = ((axis + 1) % 3, (axis + 2) % 3);
    let cells = (r - 1) as f64;
    let to_lattice = |c: f64| (c + 1.0) * 0.5 * cells;
    let mut columns = vec![Vec::new(); r * r];
    for tri in tris {
        let (mut ulo, mut uhi, mut vlo, mut vhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in tri {
            ulo = ulo.min(p[iu]);
            uhi = uhi.max(p[iu]);
            vlo = vlo.min(p[iv]);
            vhi = vhi.max(p[iv]);
        }
        let range = |lo: f64, hi: f64| {
            let a = (to_lattice(lo) - 1e-9).ceil().max(0.0) as usize;
            let b = (to_lattice(hi) + 1e-9).floor().min(cells);
            (a, if b < 0.0 { None } else { Some(b as usize) })
        };
        let (a0, a1) = range(ulo, uhi);
        let (b0, b1) = range(vlo, vhi);
        let (Some(a1), Some(b1)) = (a1, b1) else { continue };
        for a in a0..=a1 {
            for b in b0..=b1 {
                let q = [node_coord(a, r), node_coord(b, r)];
                if let Some(c) = axis_ray_crossing(tri, axis, q) {
                    columns[a * r + b].push(c);
                }
            }
        }
    }
    for c in &mut columns {
        c.sort_by(f64::total_cmp);
    }
    columns
}

/// Odd number of crossings strictly beyond `coord`.
fn parity(column: &[f64], coord: f64) -> bool {
    let beyond = column.len() - column.partition_point(|&c| c <= coord);
    beyond % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::shapes;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cube() -> SegmentedMesh {
        shapes::axis_box(Point::new(-0.5, -0.5, -0.5), Point::new(0.5, 0.5, 0.5))
    }

    #[test]
    fn cube_center_and_outside() {
        let m = cube();
        assert_relative_eq!(signed_distance(&m, &Point::origin()).unwrap(), -0.5, epsilon = 1e-12);
        assert_relative_eq!(
            signed_distance(&m, &Point::new(1.0, 0.0, 0.0)).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        let on_face = signed_distance(&m, &Point::new(0.5, 0.1, -0.2)).unwrap();
        assert!(on_face.abs() < 1e-12);
    }

    #[test]
    fn open_mesh_is_refused() {
        let mut m = cube();
        m.triangles.pop();
        m.labels.pop();
        assert!(matches!(
            signed_distance(&m, &Point::origin()),
            Err(Error::NotWatertight { boundary_edges: 3, .. })
        ));
    }

    #[test]
    fn face_distance_cases() {
        let m = cube();
        let top = (0..m.face_count)
            .find(|&f| m.face_triangles(f).all(|t| m.triangles[t].iter().all(|&v| m.vertices[v].z == 0.5)))
            .unwrap();
        let d = unsigned_distance_to_face(&m, top, &Point::new(0.1, 0.2, 0.5)).unwrap();
        assert!(d.abs() < 1e-12);
        let d = unsigned_distance_to_face(&m, top, &Point::new(0.1, 0.2, 0.8)).unwrap();
        assert_relative_eq!(d, 0.3, epsilon = 1e-12);
        assert!(unsigned_distance_to_face(&m, 99, &Point::origin()).is_err());
    }

    #[test]
    fn face_distance_beyond_border_matches_exhaustive() {
        let m = cube();
        let q = DistanceQuery::new(&m);
        let p = Point::new(0.9, -0.7, 0.65);
        for f in 0..m.face_count {
            let brute = m
                .face_triangles(f)
                .map(|t| point_triangle_distance_sq(&p, &m.triangles[t].map(|v| m.vertices[v])).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert_eq!(q.unsigned_distance_to_face(f, &p).unwrap(), brute);
        }
    }

    #[test]
    fn encoded_cube_clamps_center_and_corner() {
        let b = encode_brdf(&cube(), 17, 0.1).unwrap();
        assert_eq!(b.face_count(), 6);
        assert_eq!(b.sdf.get(8, 8, 8), -0.1f32 as f64);
        assert_eq!(b.sdf.get(0, 0, 0), 0.1f32 as f64);
        // interior node near the +x face: analytic depth x scale
        let scale = b.transform().scale;
        let p = b.sdf.node_position(13, 8, 8);
        let expected = p.x - 0.5 * scale;
        assert!(expected.abs() < 0.1);
        assert!((b.sdf.get(13, 8, 8) - expected).abs() < 1e-6);
    }

    #[test]
    fn grid_signs_match_point_queries() {
        let m = shapes::l_extrusion(1.0, 0.8, 0.4, 0.35, 0.6);
        let b = encode_brdf(&m, 13, 0.5).unwrap();
        let q = DistanceQuery::new(&m);
        let t = b.transform();
        for i in 0..13 {
            for j in 0..13 {
                for k in 0..13 {
                    let world = t.inverse(&b.sdf.node_position(i, j, k));
                    let s = q.signed_distance(&world) * t.scale;
                    let v = b.sdf.get(i, j, k);
                    assert!((v - s.clamp(-0.5, 0.5)).abs() < 1e-6, "{i} {j} {k}: {v} vs {s}");
                }
            }
        }
    }

    #[test]
    fn min_udf_equals_unsigned_sdf() {
        let m = shapes::triangular_prism(0.9, 0.78, -0.1, 0.7);
        let q = DistanceQuery::new(&m);
        for p in [
            Point::new(0.1, 0.2, 0.3),
            Point::new(-0.4, 0.05, -0.2),
            Point::new(1.3, -0.6, 0.9),
            Point::new(0.0, 0.0, 0.0),
        ] {
            let min_face = (0..m.face_count)
                .map(|f| q.unsigned_distance_to_face(f, &p).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((min_face - q.unsigned_distance(&p)).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn scaling_commutes_with_transform(
            px in -2.0..2.0f64, py in -2.0..2.0f64, pz in -2.0..2.0f64,
            sx in 0.3..2.0f64, sy in 0.3..2.0f64,
        ) {
            let m = shapes::axis_box(Point::new(-sx, -0.4, 0.1), Point::new(sx * 0.5, sy, 0.9));
            let (lo, hi) = m.bbox().unwrap();
            let t = make_transform(&lo, &hi).unwrap();
            let world = Point::new(px, py, pz);
            let d_world = signed_distance(&m, &world).unwrap() * t.scale;
            let normalized = m.transformed(|p| t.apply(p));
            let d_norm = signed_distance(&normalized, &t.apply(&world)).unwrap();
            prop_assert!((d_world - d_norm).abs() < 1e-9);
        }
    }
}
