//! Faceted B-Rep model: a labeled triangle mesh plus the vertices, edges and
//! faces it induces, and their incidence.

mod signature;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use self::signature::{
    compare_topology, quantize, same_topology, EdgeGeometry, EdgeRecord, TopologyMatch,
    TopologySignature, QUANT_LEVELS,
};
pub use self::validate::{validate_topology, TopologyReport, Violation};
use crate::mesh::{edge_triangles, EdgeKey, SegmentedMesh, TriMeshRef};
use crate::Point;

/// Result of a per-edge manifold check.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WatertightReport {
    /// Edges with a single incident triangle.
    pub boundary_edges: Vec<EdgeKey>,
    /// Edges with three or more incident triangles.
    pub non_manifold_edges: Vec<EdgeKey>,
    /// Vertices referenced by no triangle.
    pub isolated_vertices: Vec<usize>,
}

impl WatertightReport {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges.is_empty()
            && self.non_manifold_edges.is_empty()
            && self.isolated_vertices.is_empty()
    }
}

impl Serialize for EdgeKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

/// Every undirected edge must have exactly two incident triangles and every
/// vertex must be used.
pub fn check_watertight<'a>(mesh: impl Into<TriMeshRef<'a>>) -> WatertightReport {
    let mesh = mesh.into();
    let mut report = WatertightReport::default();
    for (edge, tris) in edge_triangles(mesh.triangles) {
        match tris.len() {
            2 => {}
            1 => report.boundary_edges.push(edge),
            _ => report.non_manifold_edges.push(edge),
        }
    }
    let mut used = vec![false; mesh.vertices.len()];
    for t in mesh.triangles {
        for &v in t {
            used[v] = true;
        }
    }
    report.isolated_vertices = used
        .iter()
        .enumerate()
        .filter(|(_, u)| !**u)
        .map(|(v, _)| v)
        .collect();
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct BRepVertex {
    pub mesh_vertex: usize,
    pub position: Point,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BRepEdge {
    /// Indices into `FacetedBRep::faces`, ascending.
    pub faces: [usize; 2],
    /// Mesh vertex indices along the curve. A closed edge does not repeat
    /// its first point.
    pub polyline: Vec<usize>,
    /// Start and end B-Rep vertices; `None` for a closed loop.
    pub ends: Option<[usize; 2]>,
}

impl BRepEdge {
    pub fn is_closed(&self) -> bool {
        self.ends.is_none()
    }

    /// Consecutive mesh-vertex pairs along the polyline.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.polyline.len();
        let count = if self.is_closed() { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.polyline[i], self.polyline[(i + 1) % n]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BRepFace {
    /// Source face id (the UDF index for MCT output).
    pub label: usize,
    pub triangles: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Triangle patches, boundary polylines and junction vertices of a labeled mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetedBRep {
    pub mesh: SegmentedMesh,
    pub vertices: Vec<BRepVertex>,
    pub edges: Vec<BRepEdge>,
    pub faces: Vec<BRepFace>,
}

impl FacetedBRep {
    pub fn empty(face_count: usize) -> Self {
        Self::from_segmented(SegmentedMesh {
            face_count,
            ..Default::default()
        })
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (
            self.vertices.len(),
            self.edges.len(),
            self.faces.iter().filter(|f| !f.triangles.is_empty()).count(),
        )
    }

    /// Positions of an edge's polyline points.
    pub fn edge_points(&self, e: usize) -> Vec<Point> {
        self.edges[e]
            .polyline
            .iter()
            .map(|&v| self.mesh.vertices[v])
            .collect()
    }

    /// Face index of every triangle.
    pub fn triangle_faces(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.mesh.triangles.len()];
        for (f, face) in self.faces.iter().enumerate() {
            for &t in &face.triangles {
                out[t] = f;
            }
        }
        out
    }

    pub fn signature(&self) -> TopologySignature {
        TopologySignature::of(self)
    }

    /// Derive faces, edges and vertices from a labeled mesh.
    ///
    /// Faces are maximal edge-connected patches of equal label; labels in
    /// `[0, face_count)` without triangles get an empty face record. Edges
    /// are chains of mesh edges separating two faces, broken at junctions.
    pub fn from_segmented(mesh: SegmentedMesh) -> Self {
        let edge_map = edge_triangles(&mesh.triangles);
        let tri_count = mesh.triangles.len();

        // patches by union-find across same-label manifold edges
        let mut parent: Vec<usize> = (0..tri_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for tris in edge_map.values() {
            if let [a, b] = tris[..] {
                if mesh.labels[a] == mesh.labels[b] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut roots: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for t in 0..tri_count {
            let r = find(&mut parent, t);
            roots.entry((mesh.labels[r], r)).or_default().push(t);
        }
        let mut faces: Vec<BRepFace> = Vec::new();
        let mut tri_face = vec![0usize; tri_count];
        let mut used_labels = BTreeSet::new();
        for ((label, _), tris) in roots {
            used_labels.insert(label);
            for &t in &tris {
                tri_face[t] = faces.len();
            }
            faces.push(BRepFace {
                label,
                triangles: tris,
                edges: Vec::new(),
            });
        }
        for label in 0..mesh.face_count {
            if !used_labels.contains(&label) {
                faces.push(BRepFace {
                    label,
                    triangles: Vec::new(),
                    edges: Vec::new(),
                });
            }
        }
        faces.sort_by_key(|f| (f.label, f.triangles.first().copied().unwrap_or(usize::MAX)));
        for (f, face) in faces.iter().enumerate() {
            for &t in &face.triangles {
                tri_face[t] = f;
            }
        }

        // mesh edges separating two faces
        let mut boundary: BTreeMap<EdgeKey, [usize; 2]> = BTreeMap::new();
        for (key, tris) in &edge_map {
            if let [a, b] = tris[..] {
                let (fa, fb) = (tri_face[a], tri_face[b]);
                if fa != fb {
                    boundary.insert(*key, [fa.min(fb), fa.max(fb)]);
                }
            }
        }
        let mut incident: BTreeMap<usize, Vec<EdgeKey>> = BTreeMap::new();
        for key in boundary.keys() {
            incident.entry(key.0).or_default().push(*key);
            incident.entry(key.1).or_default().push(*key);
        }
        let is_junction = |v: usize| -> bool {
            let edges = &incident[&v];
            edges.len() != 2 || boundary[&edges[0]] != boundary[&edges[1]]
        };
        let mut vertex_id: BTreeMap<usize, usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        for &v in incident.keys() {
            if is_junction(v) {
                vertex_id.insert(v, vertices.len());
                vertices.push(BRepVertex {
                    mesh_vertex: v,
                    position: mesh.vertices[v],
                    edges: Vec::new(),
                });
            }
        }

        let mut used: BTreeSet<EdgeKey> = BTreeSet::new();
        let mut edges: Vec<BRepEdge> = Vec::new();
        let other = |key: &EdgeKey, v: usize| if key.0 == v { key.1 } else { key.0 };
        let starts: Vec<usize> = vertex_id.keys().copied().collect();
        for start in starts {
            for first in incident[&start].clone() {
                if used.contains(&first) {
                    continue;
                }
                let pair = boundary[&first];
                let mut polyline = vec![start];
                let mut key = first;
                let mut cur = start;
                loop {
                    used.insert(key);
                    cur = other(&key, cur);
                    polyline.push(cur);
                    if vertex_id.contains_key(&cur) {
                        break;
                    }
                    key = *incident[&cur]
                        .iter()
                        .find(|k| !used.contains(k) && boundary[k] == pair)
                        .expect("interior chain vertex has a continuation");
                }
                edges.push(BRepEdge {
                    faces: pair,
                    polyline,
                    ends: Some([vertex_id[&start], vertex_id[&cur]]),
                });
            }
        }
        let remaining: Vec<EdgeKey> = boundary.keys().copied().collect();
        for first in remaining {
            if used.contains(&first) {
                continue;
            }
            let pair = boundary[&first];
            let start = first.0;
            let mut polyline = vec![start];
            let mut key = first;
            let mut cur = start;
            loop {
                used.insert(key);
                cur = other(&key, cur);
                if cur == start {
                    break;
                }
                polyline.push(cur);
                match incident[&cur]
                    .iter()
                    .find(|k| !used.contains(k) && boundary[k] == pair)
                {
                    Some(k) => key = *k,
                    None => break,
                }
            }
            edges.push(BRepEdge {
                faces: pair,
                polyline,
                ends: None,
            });
        }

        for (e, edge) in edges.iter().enumerate() {
            for f in edge.faces {
                faces[f].edges.push(e);
            }
            if let Some(ends) = edge.ends {
                vertices[ends[0]].edges.push(e);
                if ends[1] != ends[0] {
                    vertices[ends[1]].edges.push(e);
                }
            }
        }

        Self {
            mesh,
            vertices,
            edges,
            faces,
        }
    }
}
