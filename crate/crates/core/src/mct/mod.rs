//! Marching Cubes and Triangles.
//!
//! 1. Marching Cubes turns the SDF into a watertight triangle mesh.
//! 2. Each mesh vertex takes the face whose interpolated UDF is smallest.
//! 3. Each triangle is classified by the three-way rule; label changes along
//!    mesh edges become crossing points and three-label triangles get an
//!    interior junction point.
//! 4. Splitting triangles at those points yields a mesh where every
//!    triangle has one label, from which faces, edges and vertices follow.

mod marching_cubes;
mod rule;
mod tables;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use self::marching_cubes::marching_cubes;
pub use self::rule::{
    edge_crossing, interior_covertex, triangle_rule, BoundarySegment, SegmentEnd, TriangleCase,
};
use crate::brep::FacetedBRep;
use crate::error::{Error, Result};
use crate::grid::BrDf;
use crate::mesh::{EdgeKey, SegmentedMesh, TriMesh};
use crate::Point;

/// Per-face offset that makes exact UDF ties resolve to the lowest face id.
pub const TIE_EPSILON: f64 = 1e-12;

/// Surface mesh with interpolated face UDFs and the minimal face per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSurfaceMesh {
    pub mesh: TriMesh,
    pub face_count: usize,
    /// `udf[v * face_count + f]`.
    pub udf: Vec<f64>,
    pub min_face: Vec<usize>,
}

impl LabeledSurfaceMesh {
    #[inline]
    pub fn udf_at(&self, v: usize, face: usize) -> f64 {
        self.udf[v * self.face_count + face]
    }

    pub fn udf_values(&self, v: usize) -> &[f64] {
        &self.udf[v * self.face_count..(v + 1) * self.face_count]
    }

    pub fn triangle_labels(&self, t: usize) -> [usize; 3] {
        self.mesh.triangles[t].map(|v| self.min_face[v])
    }

    /// Build from explicit per-vertex UDF vectors.
    pub fn from_udf(mesh: TriMesh, face_count: usize, udf: Vec<f64>) -> Result<Self> {
        if face_count == 0 || udf.len() != mesh.vertices.len() * face_count {
            return Err(Error::InvalidArgument(format!(
                "{} UDF values for {} vertices and {face_count} faces",
                udf.len(),
                mesh.vertices.len()
            )));
        }
        let min_face = udf.chunks(face_count).map(min_face).collect();
        Ok(Self {
            mesh,
            face_count,
            udf,
            min_face,
        })
    }
}

/// Index of the smallest value after adding `f * TIE_EPSILON` to entry `f`.
pub fn min_face(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (f, v) in values.iter().enumerate() {
        let perturbed = v + f as f64 * TIE_EPSILON;
        if perturbed < best_value {
            best = f;
            best_value = perturbed;
        }
    }
    best
}

/// Interpolate every UDF at every mesh vertex and pick the minimal face.
pub fn label_vertices(mesh: TriMesh, brdf: &BrDf) -> Result<LabeledSurfaceMesh> {
    let faces = brdf.face_count();
    let udf: Vec<f64> = mesh
        .vertices
        .par_iter()
        .map(|p| {
            brdf.udfs
                .iter()
                .map(|field| field.sample_trilinear(p))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    LabeledSurfaceMesh::from_udf(mesh, faces, udf)
}

/// Where each boundary crosses the surface mesh: a parameter per mesh edge
/// whose endpoints disagree, measured from the lower vertex index, and a
/// barycentric junction point per three-label triangle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryLayout {
    pub crossings: BTreeMap<EdgeKey, f64>,
    pub covertices: BTreeMap<usize, [f64; 3]>,
}

/// Crossing parameter of edge `(u, v)` measured from the lower index.
///
/// Depends only on the two endpoint UDF vectors in canonical order, so both
/// triangles sharing the edge get the same bits.
pub fn canonical_crossing(labeled: &LabeledSurfaceMesh, u: usize, v: usize) -> f64 {
    let key = EdgeKey::new(u, v);
    let (lo, hi) = (key.0, key.1);
    let (fa, fb) = (labeled.min_face[lo], labeled.min_face[hi]);
    edge_crossing(
        labeled.udf_at(lo, fa),
        labeled.udf_at(lo, fb),
        labeled.udf_at(hi, fa),
        labeled.udf_at(hi, fb),
    )
}

/// Crossing point on edge `(u, v)` in space.
pub fn crossing_point(labeled: &LabeledSurfaceMesh, u: usize, v: usize) -> Point {
    let key = EdgeKey::new(u, v);
    let t = canonical_crossing(labeled, u, v);
    lerp(&labeled.mesh.vertices[key.0], &labeled.mesh.vertices[key.1], t)
}

#[inline]
fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    a + (b - a) * t
}

/// Barycentric junction point of a three-label triangle.
pub fn triangle_covertex(labeled: &LabeledSurfaceMesh, t: usize) -> [f64; 3] {
    let tri = labeled.mesh.triangles[t];
    let faces = labeled.triangle_labels(t);
    let values = tri.map(|v| faces.map(|f| labeled.udf_at(v, f)));
    interior_covertex(values)
}

/// Apply the three-way rule to triangle `t`.
pub fn triangle_segments(
    labeled: &LabeledSurfaceMesh,
    t: usize,
) -> (TriangleCase, Vec<BoundarySegment>) {
    let tri = labeled.mesh.triangles[t];
    let labels = labeled.triangle_labels(t);
    let case = triangle_rule(labels);
    let edge_end = |i: usize, j: usize| SegmentEnd::Edge {
        edge: EdgeKey::new(tri[i], tri[j]),
        point: crossing_point(labeled, tri[i], tri[j]),
    };
    let pair = |i: usize, j: usize| [labels[i].min(labels[j]), labels[i].max(labels[j])];
    let segments = match case {
        TriangleCase::Uniform => Vec::new(),
        TriangleCase::Split { odd } => {
            let (a, b) = ((odd + 1) % 3, (odd + 2) % 3);
            vec![BoundarySegment {
                face_pair: pair(odd, a),
                ends: [edge_end(odd, a), edge_end(b, odd)],
            }]
        }
        TriangleCase::Junction => {
            let l = triangle_covertex(labeled, t);
            let pts = labeled.mesh.triangle_points(t);
            let point = Point::from(pts[0].coords * l[0] + pts[1].coords * l[1] + pts[2].coords * l[2]);
            let center = SegmentEnd::CoVertex { triangle: t, point };
            (0..3)
                .map(|i| {
                    let j = (i + 1) % 3;
                    BoundarySegment {
                        face_pair: pair(i, j),
                        ends: [center, edge_end(i, j)],
                    }
                })
                .collect()
        }
    };
    (case, segments)
}

/// Crossing parameters and junction points for every triangle.
pub fn compute_layout(labeled: &LabeledSurfaceMesh) -> BoundaryLayout {
    let mut layout = BoundaryLayout::default();
    for (t, tri) in labeled.mesh.triangles.iter().enumerate() {
        let labels = labeled.triangle_labels(t);
        for i in 0..3 {
            let j = (i + 1) % 3;
            if labels[i] != labels[j] {
                let key = EdgeKey::new(tri[i], tri[j]);
                layout
                    .crossings
                    .entry(key)
                    .or_insert_with(|| canonical_crossing(labeled, tri[i], tri[j]));
            }
        }
        if triangle_rule(labels) == TriangleCase::Junction {
            layout.covertices.insert(t, triangle_covertex(labeled, t));
        }
    }
    layout
}

/// Provenance of a vertex in the split mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    Surface(usize),
    Crossing(EdgeKey),
    CoVertex(usize),
}

/// Surface mesh re-triangulated so boundaries run along mesh edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMesh {
    pub mesh: SegmentedMesh,
    pub origins: Vec<VertexOrigin>,
}

/// Split every triangle whose vertex labels differ along the boundary
/// points in `layout`. Original vertices keep their indices; crossing
/// points follow in edge order, then junction points in triangle order.
pub fn split_mesh(labeled: &LabeledSurfaceMesh, layout: &BoundaryLayout) -> SplitMesh {
    let src = &labeled.mesh;
    let mut vertices = src.vertices.clone();
    let mut origins: Vec<VertexOrigin> = (0..vertices.len()).map(VertexOrigin::Surface).collect();
    let mut crossing_id = BTreeMap::new();
    for (&key, &t) in &layout.crossings {
        crossing_id.insert(key, vertices.len());
        vertices.push(lerp(&src.vertices[key.0], &src.vertices[key.1], t));
        origins.push(VertexOrigin::Crossing(key));
    }
    let mut covertex_id = BTreeMap::new();
    for (&t, l) in &layout.covertices {
        let p = src.triangle_points(t);
        covertex_id.insert(t, vertices.len());
        vertices.push(Point::from(p[0].coords * l[0] + p[1].coords * l[1] + p[2].coords * l[2]));
        origins.push(VertexOrigin::CoVertex(t));
    }

    let mut triangles = Vec::with_capacity(src.triangles.len() * 2);
    let mut labels = Vec::with_capacity(src.triangles.len() * 2);
    let x = |a: usize, b: usize| crossing_id[&EdgeKey::new(a, b)];
    for (t, tri) in src.triangles.iter().enumerate() {
        let l = labeled.triangle_labels(t);
        match triangle_rule(l) {
            TriangleCase::Uniform => {
                triangles.push(*tri);
                labels.push(l[0]);
            }
            TriangleCase::Split { odd } => {
                let c = tri[odd];
                let a = tri[(odd + 1) % 3];
                let b = tri[(odd + 2) % 3];
                let (xbc, xca) = (x(b, c), x(c, a));
                triangles.push([c, xca, xbc]);
                labels.push(l[odd]);
                triangles.push([a, b, xbc]);
                triangles.push([a, xbc, xca]);
                let shared = l[(odd + 1) % 3];
                labels.extend([shared, shared]);
            }
            TriangleCase::Junction => {
                let p = covertex_id[&t];
                let [v0, v1, v2] = *tri;
                let (x01, x12, x20) = (x(v0, v1), x(v1, v2), x(v2, v0));
                triangles.extend([
                    [v0, x01, p],
                    [v0, p, x20],
                    [v1, x12, p],
                    [v1, p, x01],
                    [v2, x20, p],
                    [v2, p, x12],
                ]);
                labels.extend([l[0], l[0], l[1], l[1], l[2], l[2]]);
            }
        }
    }
    SplitMesh {
        mesh: SegmentedMesh {
            vertices,
            triangles,
            labels,
            face_count: labeled.face_count,
        },
        origins,
    }
}

/// Chain the boundary pieces into B-Rep edges and vertices.
pub fn assemble_brep(labeled: &LabeledSurfaceMesh, layout: &BoundaryLayout) -> FacetedBRep {
    FacetedBRep::from_segmented(split_mesh(labeled, layout).mesh)
}

/// Full MCT output.
#[derive(Debug, Clone)]
pub struct MctOutput {
    pub labeled: LabeledSurfaceMesh,
    pub layout: BoundaryLayout,
    /// Provenance of every vertex of `brep.mesh`.
    pub origins: Vec<VertexOrigin>,
    pub brep: FacetedBRep,
}

/// Count lattice boundary nodes inside the solid.
pub fn open_boundary_nodes(brdf: &BrDf) -> usize {
    let f = &brdf.sdf;
    let r = f.resolution();
    let mut count = 0;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                if f.is_boundary_node(i, j, k) && f.get(i, j, k) < 0.0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Run Marching Cubes and Triangles on a BR-DF.
pub fn extract(brdf: &BrDf) -> Result<MctOutput> {
    let open = open_boundary_nodes(brdf);
    if open > 0 {
        return Err(Error::OpenBoundary { nodes: open });
    }
    let surface = marching_cubes(&brdf.sdf);
    let labeled = label_vertices(surface, brdf)?;
    let layout = compute_layout(&labeled);
    let split = split_mesh(&labeled, &layout);
    Ok(MctOutput {
        labeled,
        layout,
        origins: split.origins,
        brep: FacetedBRep::from_segmented(split.mesh),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::{check_watertight, validate_topology};
    use crate::encode::encode_brdf;
    use crate::grid::{NormalizeTransform, ScalarField3};
    use crate::synth::shapes;

    #[test]
    fn min_face_rules() {
        assert_eq!(min_face(&[0.02, 0.05, 0.09]), 0);
        assert_eq!(min_face(&[0.03, 0.03]), 0);
        assert_eq!(min_face(&[0.04, 0.01, 0.01]), 1);
        assert_eq!(min_face(&[0.7]), 0);
    }

    fn triangle(labels_udf: [[f64; 3]; 3]) -> LabeledSurfaceMesh {
        let mesh = TriMesh::new(
            vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        );
        LabeledSurfaceMesh::from_udf(mesh, 3, labels_udf.concat()).unwrap()
    }

    #[test]
    fn uniform_triangle_emits_nothing() {
        let l = triangle([[0.01, 0.05, 0.05], [0.02, 0.06, 0.05], [0.01, 0.04, 0.07]]);
        let (case, segs) = triangle_segments(&l, 0);
        assert_eq!(case, TriangleCase::Uniform);
        assert!(segs.is_empty());
    }

    #[test]
    fn split_triangle_emits_edge_segment() {
        let l = triangle([[0.01, 0.05, 0.09], [0.02, 0.06, 0.09], [0.05, 0.01, 0.09]]);
        let (case, segs) = triangle_segments(&l, 0);
        assert_eq!(case, TriangleCase::Split { odd: 2 });
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].face_pair, [0, 1]);
        assert!(segs[0].ends.iter().all(|e| matches!(e, SegmentEnd::Edge { .. })));
        let split = split_mesh(&l, &compute_layout(&l));
        assert_eq!(split.mesh.triangles.len(), 3);
        assert_eq!(split.mesh.labels.iter().filter(|&&x| x == 1).count(), 1);
    }

    #[test]
    fn junction_triangle_emits_vertex_and_three_segments() {
        let l = triangle([[0.01, 0.05, 0.06], [0.05, 0.01, 0.06], [0.06, 0.05, 0.01]]);
        let (case, segs) = triangle_segments(&l, 0);
        assert_eq!(case, TriangleCase::Junction);
        assert_eq!(segs.len(), 3);
        let centers: Vec<_> = segs
            .iter()
            .filter_map(|s| match s.ends[0] {
                SegmentEnd::CoVertex { point, .. } => Some(point),
                _ => None,
            })
            .collect();
        assert_eq!(centers.len(), 3);
        assert!(centers.windows(2).all(|w| w[0] == w[1]));
        let split = split_mesh(&l, &compute_layout(&l));
        assert_eq!(split.mesh.triangles.len(), 6);
        for f in 0..3 {
            assert_eq!(split.mesh.labels.iter().filter(|&&x| x == f).count(), 2);
        }
        // sub-triangles keep the parent orientation
        for t in 0..6 {
            let [a, b, c] = split.mesh.triangles[t].map(|v| split.mesh.vertices[v]);
            assert!((b - a).cross(&(c - a)).z >= 0.0);
        }
    }

    #[test]
    fn single_face_sphere_has_no_edges() {
        let r = 24;
        let t = NormalizeTransform::identity();
        let sdf = ScalarField3::from_fn(r, t, 0.1, |p| p.coords.norm() - 0.5).unwrap();
        let udf = ScalarField3::from_fn(r, t, 0.1, |p| (p.coords.norm() - 0.5).abs()).unwrap();
        let out = extract(&BrDf::new(sdf, vec![udf]).unwrap()).unwrap();
        assert_eq!(out.brep.counts(), (0, 0, 1));
        assert!(validate_topology(&out.brep).is_valid());
    }

    #[test]
    fn two_hemispheres_give_one_loop() {
        let r = 32;
        let t = NormalizeTransform::identity();
        let sdf = ScalarField3::from_fn(r, t, 0.1, |p| p.coords.norm() - 0.5).unwrap();
        let hemi = |north: bool| {
            ScalarField3::from_fn(r, t, 0.1, move |p| {
                // distance to the closed upper (or lower) half of the sphere
                let z = if north { p.z } else { -p.z };
                let radial = (p.x * p.x + p.y * p.y).sqrt();
                if z >= 0.0 {
                    (p.coords.norm() - 0.5).abs()
                } else {
                    ((radial - 0.5).powi(2) + z * z).sqrt()
                }
            })
            .unwrap()
        };
        let brdf = BrDf::new(sdf, vec![hemi(true), hemi(false)]).unwrap();
        let out = extract(&brdf).unwrap();
        assert_eq!(out.brep.counts(), (0, 1, 2));
        assert!(out.brep.edges[0].is_closed());
        assert!(validate_topology(&out.brep).is_valid());
    }

    #[test]
    fn encoded_cube_roundtrip_topology() {
        let m = shapes::centered_box(1.0, 1.0, 1.0);
        let brdf = encode_brdf(&m, 64, 0.1).unwrap();
        let out = extract(&brdf).unwrap();
        assert!(check_watertight(&out.labeled.mesh).is_watertight());
        let report = validate_topology(&out.brep);
        assert!(report.is_valid(), "{report:?}");
        assert_eq!(out.brep.counts(), (8, 12, 6));
    }

    #[test]
    fn open_boundary_rejected() {
        let r = 8;
        let t = NormalizeTransform::identity();
        let sdf = ScalarField3::from_fn(r, t, 0.1, |p| p.x - 0.5).unwrap();
        let udf = ScalarField3::from_fn(r, t, 0.1, |p| (p.x - 0.5).abs()).unwrap();
        let brdf = BrDf::new(sdf, vec![udf]).unwrap();
        assert!(matches!(extract(&brdf), Err(Error::OpenBoundary { .. })));
    }
}
